// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/optimizer.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "v2vbpc/errors.hpp"
#include "v2vbpc/fusion.hpp"

namespace v2vbpc {

namespace {

Mat2 transverse_block(const Mat3& m) {
  Mat2 out;
  out << m(0, 0), m(0, 2), m(2, 0), m(2, 2);
  return out;
}

void require_psd2(const Mat2& C, const char* what) {
  require_psd(C, 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff()), what);
}

// Probability mass of N(0, C) outside the footprint ellipse. With
// S = A^{1/2} C A^{1/2} (A the ellipse form) and eigenvalues m1 >= m2 of S,
// the radial integral is analytic and
//   P = (2/pi) int_0^{pi/2} exp(-1 / (2 (m1 cos^2 t + m2 sin^2 t))) dt.
// exp() of anything below this is subnormal or zero.
constexpr double kLogUnderflow = -700.0;

double misalignment(const Beamwidth& w, const Mat2& C, double d) {
  require_valid(w);
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorKind::kInvalidArgument, "footprint distance must be positive");
  }
  require_psd2(C, "LOS-plane covariance");
  const double a = d * std::tan(0.5 * w.az);
  const double b = d * std::tan(0.5 * w.el);
  const double s11 = C(0, 0) / (a * a);
  const double s22 = C(1, 1) / (b * b);
  const double s12 = 0.5 * (C(0, 1) + C(1, 0)) / (a * b);
  const double mean = 0.5 * (s11 + s22);
  const double rad = std::hypot(0.5 * (s11 - s22), s12);
  const double m1 = mean + rad;
  const double m2 = std::max(0.0, mean - rad);

  if (!(m1 > 0.0)) return 0.0;
  if (m2 <= 1e-14 * m1) {
    // rank one: 1 - erf(1/sqrt(2 m1))
    return std::erfc(1.0 / std::sqrt(2.0 * m1));
  }
  // Peak value exp(-1/(2 m1)) factored out so the integrand stays in (0, 1].
  const double log_peak = -0.5 / m1;
  if (log_peak < kLogUnderflow) return 0.0;
  auto f = [m1, m2](double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double g = m1 * c * c + m2 * s * s;
    const double x = -0.5 * (m1 - m2) * s * s / (g * m1);
    return x < kLogUnderflow ? 0.0 : std::exp(x);
  };
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, 0.5 * std::numbers::pi, 15, 1e-12, &err);
  const double p = std::exp(log_peak) * integral * 2.0 / std::numbers::pi;
  if (!std::isfinite(p) || !(integral > 0.0) || err > 1e-9 * integral) {
    throw Error(ErrorKind::kNumericalFailure,
                "footprint quadrature did not converge: m1=" + std::to_string(m1) +
                    " m2=" + std::to_string(m2) + " error=" + std::to_string(err));
  }
  return std::clamp(p, 0.0, 1.0);
}

struct AxisRoot {
  double width = 0.0;
  int iterations = 0;
};

// Smallest width in [lo, hi] along one axis whose misalignment meets target;
// p_of(lo) > target >= p_of(hi) must hold.
template <class F>
AxisRoot solve_axis(F p_of, double target, double lo, double hi) {
  auto excess = [&](double log_w) {
    return std::log(std::max(p_of(std::exp(log_w)), 1e-300)) - std::log(target);
  };
  std::uintmax_t iters = 60;
  const auto bracket = boost::math::tools::toms748_solve(
      excess, std::log(lo), std::log(hi), boost::math::tools::eps_tolerance<double>(40), iters);
  return {std::exp(bracket.second), static_cast<int>(iters)};
}

}  // namespace

LosPlaneCovariance project_position_cov(const Mat3& C_p, const Quaternion& q_self,
                                        const LosAngles& los) {
  require_psd(C_p, 1e-9, "position covariance");
  const Mat3 Q = los_frame_rotation(los) * rotation_matrix(q_self).transpose();
  return transverse_block(Q * C_p * Q.transpose());
}

Mat2 orientation_cov_to_los(const Mat3& C_gamma, const Quaternion& q_self, const Vec3& dp_nav) {
  require_psd(C_gamma, 1e-12, "Euler covariance");
  const EulerResult e = quat_to_euler(q_self);
  if (e.gimbal_lock) {
    throw Error(ErrorKind::kDegenerateGeometry, "orientation covariance at gimbal lock");
  }
  const Quaternion qm = euler_to_quat(e.angles);
  const Vec3 dp_local = rotation_matrix(qm).transpose() * dp_nav;
  const double d = dp_local.norm();
  const LosAngles los = los_angles(dp_local);
  const Mat4 D = Vec4(1.0, -1.0, -1.0, -1.0).asDiagonal();
  const Mat3 jac = rotation_gradient(qm.conjugate(), dp_nav) * D * euler_to_quat_jacobian(e.angles);
  const Mat3 rot = los_frame_rotation(los) * jac / d;
  Eigen::Matrix<double, 2, 3> J;
  J << rot.row(0), rot.row(2);
  Mat2 c = J * C_gamma * J.transpose();
  return 0.5 * (c + c.transpose());
}

LosPlaneCovariance combined_los_cov(const LosPlaneCovariance& c1, const LosPlaneCovariance& c2,
                                    const Mat2& c_orient, double d) {
  return c1 + c2 + d * d * c_orient;
}

double p_beam_cover(const Beamwidth& w, const LosPlaneCovariance& C, double d) {
  return 1.0 - misalignment(w, C, d);
}

double p_mis_total(double p_tx, double p_rx) { return p_tx + p_rx - p_tx * p_rx; }
double p_mis_total_approx(double p_tx, double p_rx) { return p_tx + p_rx; }

double per_side_target(double budget) {
  if (!(budget > 0.0 && budget < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "outage budget must lie in (0, 1)");
  }
  return -std::expm1(0.5 * std::log1p(-budget));
}

double required_ptx_worstcase(const Beamwidth& w1, const Beamwidth& w2, double d,
                              const LinkConfig& cfg) {
  LinkConfig c = cfg;
  c.power_margin_db = 0.0;
  return power_control(w1, w2, d, c).ptx_dbm;
}

SideSolution optimize_side(const LosPlaneCovariance& C, double d, double target,
                           const BeamLimits& limits) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "misalignment target must lie in (0, 1)");
  }
  SideSolution out;
  const Beamwidth narrow{limits.min_rad, limits.min_rad};
  const double p_narrow = misalignment(narrow, C, d);
  if (p_narrow <= target) {
    out.w = narrow;
    out.p_mis = p_narrow;
    return out;
  }
  const Beamwidth wide{limits.max_rad, limits.max_rad};
  const double p_wide = misalignment(wide, C, d);
  if (p_wide > target) {
    out.w = wide;
    out.p_mis = p_wide;
    out.attainable = false;
    return out;
  }

  // Search over the azimuth width; the elevation width is solved per candidate.
  const double lmin = limits.min_rad, lmax = limits.max_rad;
  auto track = [&](int iterations) {
    out.bisection_iterations = std::max(out.bisection_iterations, iterations);
  };
  auto el_for = [&](double az) {
    if (misalignment({az, lmin}, C, d) <= target) return lmin;
    if (misalignment({az, lmax}, C, d) > target) return std::numeric_limits<double>::infinity();
    const AxisRoot r = solve_axis([&](double el) { return misalignment({az, el}, C, d); }, target,
                                  lmin, lmax);
    track(r.iterations);
    return r.width;
  };
  Beamwidth best{lmax, lmax};
  double best_area = lmax * lmax;
  auto eval = [&](double log_az) {
    const double az = std::exp(log_az);
    const double el = el_for(az);
    const double a = az * el;
    if (a < best_area) {
      best_area = a;
      best = {az, el};
    }
    return a;
  };

  const double x_lo = std::log(lmin), x_hi = std::log(lmax);
  constexpr int kGrid = 24;
  const double step = (x_hi - x_lo) / kGrid;
  double best_x = x_hi;
  for (int i = 0; i <= kGrid; ++i) {
    const double before = best_area;
    eval(x_lo + step * i);
    if (best_area < before) best_x = x_lo + step * i;
  }

  double lo = std::max(x_lo, best_x - step);
  double hi = std::min(x_hi, best_x + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  std::array<double, 2> evals{eval(x1), eval(x2)};
  while (hi - lo > 1e-6) {
    if (evals[0] <= evals[1]) {
      hi = x2;
      x2 = x1;
      evals[1] = evals[0];
      x1 = hi - g * (hi - lo);
      evals[0] = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      evals[0] = evals[1];
      x2 = lo + g * (hi - lo);
      evals[1] = eval(x2);
    }
  }

  // With the elevation on the floor, shrink the azimuth onto the target.
  if (best.el == lmin && best.az > lmin && misalignment({lmin, lmin}, C, d) > target) {
    const AxisRoot r = solve_axis([&](double az) { return misalignment({az, lmin}, C, d); }, target,
                                  lmin, best.az);
    track(r.iterations);
    best.az = std::max(lmin, std::min(best.az, r.width));
  }
  out.w = best;
  out.p_mis = misalignment(best, C, d);
  return out;
}

OptSolution optimize(const OptProblem& prob) {
  if (!(prob.p_out_max > 0.0 && prob.p_out_max < 0.5)) {
    throw Error(ErrorKind::kInvalidArgument, "p_out_max must lie in (0, 0.5)");
  }
  const Vec3 dp = prob.p2 - prob.p1;
  const double d = dp.norm();
  if (!(d > kMinDistance)) {
    throw Error(ErrorKind::kDegenerateGeometry, "vehicles coincide");
  }
  const LosAngles los1 = los_angles(rotation_matrix(prob.q1).transpose() * dp);
  const LosAngles los2 = los_angles(rotation_matrix(prob.q2).transpose() * (-dp));

  const Mat2 c_tx = combined_los_cov(project_position_cov(prob.C_p1, prob.q1, los1),
                                     project_position_cov(prob.C_p2, prob.q1, los1),
                                     orientation_cov_to_los(prob.C_gamma1, prob.q1, dp), d);
  const Mat2 c_rx = combined_los_cov(project_position_cov(prob.C_p2, prob.q2, los2),
                                     project_position_cov(prob.C_p1, prob.q2, los2),
                                     orientation_cov_to_los(prob.C_gamma2, prob.q2, -dp), d);

  const double target = per_side_target(prob.p_out_max);
  const SideSolution tx = optimize_side(c_tx, d, target, prob.limits);
  const SideSolution rx = optimize_side(c_rx, d, target, prob.limits);

  OptSolution sol;
  sol.w1 = tx.w;
  sol.w2 = rx.w;
  sol.p_mis_tx = tx.p_mis;
  sol.p_mis_rx = rx.p_mis;
  sol.p_mis = p_mis_total(tx.p_mis, rx.p_mis);
  LinkConfig c = prob.cfg;
  c.power_margin_db = 0.0;
  const PowerDecision p = power_control(sol.w1, sol.w2, d, c);
  sol.ptx_dbm = p.ptx_dbm;
  sol.eirp_clipped = p.clipped;
  sol.feasible = tx.attainable && rx.attainable && !p.clipped;
  return sol;
}

}  // namespace v2vbpc
