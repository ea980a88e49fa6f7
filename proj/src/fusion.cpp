// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "v2vbpc/errors.hpp"

namespace v2vbpc {

namespace {

constexpr double kMinSpeedForHeading = 1e-3;

Quaternion quat_of(const StateVec& x) { return Quaternion(x.segment<4>(6)); }

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

StateVec FilterState::mean() const {
  StateVec x;
  x << p, v, q.coeffs();
  return x;
}

FilterState FilterState::from_mean(const StateVec& x, const StateCov& P) {
  FilterState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q = quat_of(x);
  s.P = P;
  return s;
}

Eigen::Matrix<double, kNoiseDim, kNoiseDim> process_noise(const NoiseConfig& n) {
  Eigen::Matrix<double, kNoiseDim, kNoiseDim> c = Eigen::Matrix<double, kNoiseDim, kNoiseDim>::Zero();
  c.block<6, 6>(0, 0).diagonal().setConstant(n.sigma_a * n.sigma_a);
  c.block<3, 3>(6, 6).diagonal().setConstant(n.sigma_omega * n.sigma_omega);
  return c;
}

StateVec transition(const StateVec& x, const ImuSample& u, double T, const NoiseConfig& n,
                    const NoiseVec& w) {
  const Vec3 p = x.segment<3>(0);
  const Vec3 v = x.segment<3>(3);
  const Quaternion q = quat_of(x);
  const Vec3 acc = rotation_matrix_unchecked(q) * (u.accel - n.accel_bias) + n.gravity;
  StateVec out;
  out.segment<3>(0) = p + T * v + 0.5 * T * T * (acc + w.segment<3>(0));
  out.segment<3>(3) = v + T * (acc + w.segment<3>(3));
  const Vec3 rot = 0.5 * T * (u.gyro - n.gyro_bias + w.segment<3>(6));
  out.segment<4>(6) = (q * quat_exp(rot)).coeffs();
  return out;
}

ObsVec observation(const StateVec& x) {
  ObsVec z;
  z << x.segment<3>(0), x.segment<3>(3).norm(), x.segment<4>(6);
  return z;
}

Jacobians jacobians(const FilterState& s, const ImuSample& u, double T, const NoiseConfig& n) {
  Jacobians j;
  const Vec3 f_body = u.accel - n.accel_bias;
  const Mat34 dR = rotation_gradient(s.q, f_body);
  const Vec3 half_rot = 0.5 * T * (u.gyro - n.gyro_bias);

  j.F.setIdentity();
  j.F.block<3, 3>(0, 3) = T * Mat3::Identity();
  j.F.block<3, 4>(0, 6) = 0.5 * T * T * dR;
  j.F.block<3, 4>(3, 6) = T * dR;
  j.F.block<4, 4>(6, 6) = quat_right(quat_exp(half_rot));

  j.G.setZero();
  j.G.block<3, 3>(0, 0) = 0.5 * T * T * Mat3::Identity();
  j.G.block<3, 3>(3, 3) = T * Mat3::Identity();
  j.G.block<4, 3>(6, 6) = quat_left(s.q) * quat_exp_jacobian(half_rot) * (0.5 * T);

  j.H.setZero();
  j.H.block<3, 3>(0, 0).setIdentity();
  const double speed = s.v.norm();
  if (speed > kMinSpeedForHeading) {
    j.H.block<1, 3>(3, 3) = s.v.transpose() / speed;
  } else {
    j.speed_row_valid = false;
  }
  j.H.block<4, 4>(4, 6).setIdentity();
  return j;
}

void require_psd(const Eigen::MatrixXd& P, double tol, const char* what) {
  if (!P.allFinite()) {
    throw Error(ErrorKind::kNumericalFailure, std::string(what) + ": non-finite covariance");
  }
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorKind::kNumericalFailure, std::string(what) + ": covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw Error(ErrorKind::kNumericalFailure,
                std::string(what) + ": covariance has eigenvalue " +
                    std::to_string(es.eigenvalues().minCoeff()));
  }
}

FilterState predict(const FilterState& s, const ImuSample& u, double T, const NoiseConfig& n) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::kInvalidArgument, "prediction interval must be positive");
  }
  if (!finite(u.accel) || !finite(u.gyro)) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite IMU sample at t=" + std::to_string(u.t));
  }
  const Jacobians j = jacobians(s, u, T, n);
  StateVec x = transition(s.mean(), u, T, n);
  x.segment<4>(6).normalize();
  StateCov P = j.F * s.P * j.F.transpose() + j.G * process_noise(n) * j.G.transpose();
  P = 0.5 * (P + P.transpose());
  require_psd(P, 1e-9, "predict");
  return FilterState::from_mean(x, P);
}

UpdateResult update(const FilterState& s, const GpsObservation& z, const NoiseConfig& n) {
  UpdateResult out;
  out.state = s;

  std::vector<int> rows;
  if (z.has_pos) {
    if (!finite(z.pos)) throw Error(ErrorKind::kInvalidArgument, "non-finite GNSS position");
    rows.insert(rows.end(), {0, 1, 2});
  }
  const Jacobians jac = jacobians(s, ImuSample{}, 0.0, n);
  if (z.has_speed) {
    if (jac.speed_row_valid) {
      rows.push_back(3);
    } else {
      out.speed_skipped = true;
    }
  }
  Quaternion zq = z.quat_obs;
  if (z.has_quat) {
    require_unit(zq);
    if (zq.coeffs().dot(s.q.coeffs()) < 0.0) zq = -zq;
    rows.insert(rows.end(), {4, 5, 6, 7});
  }
  if (rows.empty()) {
    if (out.speed_skipped) return out;
    throw Error(ErrorKind::kInvalidArgument, "update without any observation component");
  }

  Eigen::Matrix<double, kObsDim, kObsDim> R = Eigen::Matrix<double, kObsDim, kObsDim>::Zero();
  R.block<3, 3>(0, 0).diagonal().setConstant(n.sigma_gnss * n.sigma_gnss);
  R(3, 3) = n.sigma_v * n.sigma_v;
  if (z.has_quat) {
    R.block<4, 4>(4, 4) = quat_cov_from_euler_cov(s.q, n.C_gamma) + n.quat_obs_floor * Mat4::Identity();
  }
  ObsVec zfull;
  zfull << z.pos, z.speed, zq.coeffs();
  const ObsVec hfull = observation(s.mean());

  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd H(m, kStateDim);
  Eigen::MatrixXd Rs(m, m);
  Eigen::VectorXd innov(m);
  for (int i = 0; i < m; ++i) {
    H.row(i) = jac.H.row(rows[i]);
    innov[i] = zfull[rows[i]] - hfull[rows[i]];
    for (int k = 0; k < m; ++k) Rs(i, k) = R(rows[i], rows[k]);
  }
  const Eigen::MatrixXd S = H * s.P * H.transpose() + Rs;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    out.singular_skipped = true;
    return out;
  }
  const Eigen::MatrixXd K = llt.solve(H * s.P).transpose();
  const StateVec x = s.mean() + K * innov;
  const StateCov IKH = StateCov::Identity() - K * H;
  StateCov P = IKH * s.P * IKH.transpose() + K * Rs * K.transpose();
  P = 0.5 * (P + P.transpose());

  out.state = renormalize(FilterState::from_mean(x, P));
  out.applied = true;
  return out;
}

FilterState renormalize(const FilterState& s) {
  const double nq = s.q.norm();
  if (!(nq > 1e-6) || !std::isfinite(nq)) {
    throw Error(ErrorKind::kNumericalFailure, "degenerate quaternion norm in renormalization");
  }
  const Vec4 qt = s.q.coeffs();
  StateCov J = StateCov::Identity();
  J.block<4, 4>(6, 6) = (nq * nq * Mat4::Identity() - qt * qt.transpose()) / (nq * nq * nq);
  FilterState out = s;
  out.q = Quaternion(qt / nq);
  out.P = J * s.P * J.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

Mat4 quat_cov_from_euler_cov(const Quaternion& q, const Mat3& C_gamma) {
  const EulerResult e = quat_to_euler(q);
  if (e.gimbal_lock) {
    throw Error(ErrorKind::kDegenerateGeometry, "Euler covariance mapping at gimbal lock");
  }
  const Mat43 J = euler_to_quat_jacobian(e.angles);
  Mat4 c = J * C_gamma * J.transpose();
  return 0.5 * (c + c.transpose());
}

Mat3 euler_cov_from_quat_cov(const Quaternion& q, const Mat4& C_q) {
  const EulerResult e = quat_to_euler(q);
  if (e.gimbal_lock) {
    throw Error(ErrorKind::kDegenerateGeometry, "Euler covariance mapping at gimbal lock");
  }
  const Mat43 J = euler_to_quat_jacobian(e.angles);
  const Eigen::Matrix<double, 3, 4> Jp = (J.transpose() * J).inverse() * J.transpose();
  Mat3 c = Jp * C_q * Jp.transpose();
  return 0.5 * (c + c.transpose());
}

}  // namespace v2vbpc
