// One test case per acceptance criterion; each prints a single
// "[criterion N] PASS|FAIL ..." line followed by indented detail lines.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include "support.hpp"
#include "v2vbpc/bpc.hpp"
#include "v2vbpc/channel.hpp"
#include "v2vbpc/cli.hpp"
#include "v2vbpc/fusion.hpp"
#include "v2vbpc/optimizer.hpp"
#include "v2vbpc/sim.hpp"
#include "v2vbpc/trajectory.hpp"

using namespace v2vbpc;
namespace fs = std::filesystem;

namespace {

const Trajectory& urban() {
  static const Trajectory t = generate_trajectory(trajectory_preset("milan_like"));
  return t;
}

SimConfig scenario(int s) {
  SimConfig c;
  c.sigma_p = s == 1 ? 1.5 : 0.15;
  c.sigma_gamma = deg2rad(s == 1 ? 1.5 : 0.15);
  return c;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void verdict(int n, bool pass, const std::string& text, double seconds) {
  std::printf("[criterion %d] %s  %s (%.1f s)\n", n, pass ? "PASS" : "FAIL", text.c_str(), seconds);
  std::fflush(stdout);
}

__attribute__((format(printf, 1, 2))) void detail(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  std::printf("    ");
  std::vprintf(fmt, args);
  std::printf("\n");
  va_end(args);
  std::fflush(stdout);
}

// Boresight Tx power for equal beams and a target SNR.
double anchor_ptx(double beam_deg, double d, double snr, const LinkConfig& link) {
  const Beamwidth w{deg2rad(beam_deg), deg2rad(beam_deg)};
  return snr - 2.0 * max_gain_db(w, link) + path_loss_db(d, link.f0_hz) + link.noise_power_dbm;
}

// Two-sided Mann-Whitney U test, normal approximation with tie correction.
// Returns the p-value for "a and b come from the same distribution".
double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  struct Item {
    double v;
    int group;
  };
  std::vector<Item> all;
  for (double x : a) all.push_back({x, 0});
  for (double x : b) all.push_back({x, 1});
  std::sort(all.begin(), all.end(), [](const Item& l, const Item& r) { return l.v < r.v; });
  const double n1 = a.size(), n2 = b.size(), n = n1 + n2;
  double rank_sum = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].v == all[i].v) ++j;
    const double avg = 0.5 * (i + 1 + j);
    const double t = j - i;
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].group == 0) rank_sum += avg;
    i = j;
  }
  const double u = rank_sum - n1 * (n1 + 1) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)));
  if (var <= 0.0) return 1.0;
  const double z = (std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::max(z, 0.0))));
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("criterion 1: link-budget anchors") {
  const Clock clock;
  const LinkConfig link = default_link_config();
  const double kg = calibrate_gain_constant(CalibrationAnchor{}, link);
  const double p20 = anchor_ptx(20.0, 100.0, 10.0, link);
  const double p10 = anchor_ptx(10.0, 100.0, 10.0, link);
  const double residual = p10 - (-12.2);
  const double delta = p20 - p10;
  const bool absolute_ok = std::abs(residual) <= 0.3 && std::abs(p20) < 1e-9;
  const bool delta_ok = std::abs(delta - 12.2) <= 0.1;
  const double t = clock.seconds();
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "10x10 deg needs %.4f dBm (target -12.2, |r| %.4f <= 0.3: %s); delta %.4f dB vs 12.2 "
                "(|d| %.4f <= 0.1: %s)",
                p10, std::abs(residual), absolute_ok ? "ok" : "no", delta, std::abs(delta - 12.2),
                delta_ok ? "ok" : "no");
  verdict(1, absolute_ok && delta_ok && t < 1.0, buf, t);
  detail("K_g = %.12g (%.4f dB), 20x20 deg anchor reproduces %.2e dBm", kg, 10 * std::log10(kg), p20);
  detail("delta is 10 log10(4) per end for a gain ~ 1/(az el): %.4f dB, set by the pattern law alone",
         10 * std::log10(16.0));
  CHECK(absolute_ok);
  CHECK(delta_ok);
  CHECK(t < 1.0);
}

TEST_CASE("criterion 2: misalignment oracle") {
  const Clock clock;
  double worst_rayleigh = 0.0;
  for (double sigma2 : {0.01, 0.3, 2.0, 25.0}) {
    for (double r_over_s : {0.2, 0.7, 1.0, 2.0, 3.0, 4.5}) {
      const double r = r_over_s * std::sqrt(sigma2);
      const double d = 20.0;
      const double w = 2.0 * std::atan(r / d);
      const double p = p_beam_cover({w, w}, Mat2::Identity() * sigma2, d);
      worst_rayleigh = std::max(worst_rayleigh, std::abs(p - (1.0 - std::exp(-r * r / (2 * sigma2)))));
    }
  }

  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  const long samples = 10000000;
  int within = 0;
  double worst_z = 0.0;
  for (int i = 0; i < 50; ++i) {
    // anisotropic, correlated covariance and an elliptical footprint of 0.5-4 sigma
    const double s1 = std::exp(-1.0 + 3.0 * U(g)), s2 = s1 * (0.1 + 0.9 * U(g));
    const double th = 3.14159 * U(g);
    Mat2 R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Mat2 C = R * Eigen::Vector2d(s1 * s1, s2 * s2).asDiagonal() * R.transpose();
    const double d = 5.0 + 75.0 * U(g);
    const double a = (0.5 + 3.5 * U(g)) * std::sqrt(C(0, 0));
    const double b = (0.5 + 3.5 * U(g)) * std::sqrt(C(1, 1));
    const Beamwidth w{2 * std::atan(a / d), 2 * std::atan(b / d)};
    const double p_mis = 1.0 - p_beam_cover(w, C, d);

    const Eigen::LLT<Mat2> llt(C);
    const Mat2 L = llt.matrixL();
    long out = 0;
    for (long k = 0; k < samples; ++k) {
      const Eigen::Vector2d x = L * Eigen::Vector2d(N(g), N(g));
      if ((x[0] / a) * (x[0] / a) + (x[1] / b) * (x[1] / b) > 1.0) ++out;
    }
    const double mc = double(out) / samples;
    const double se = std::sqrt(std::max(p_mis * (1 - p_mis), 1.0 / samples) / samples);
    const double z = std::abs(mc - p_mis) / se;
    worst_z = std::max(worst_z, z);
    if (z <= 3.0) ++within;
  }
  const double t = clock.seconds();
  const bool pass = worst_rayleigh <= 1e-6 && within == 50 && t < 120.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Rayleigh max error %.2e (<= 1e-6); %d/50 instances within 3 SE of 1e7-sample Monte "
                "Carlo (worst %.2f SE)",
                worst_rayleigh, within, worst_z);
  verdict(2, pass, buf, t);
  CHECK(worst_rayleigh <= 1e-6);
  CHECK(within == 50);
  CHECK(t < 120.0);
}

TEST_CASE("criterion 3: outage control") {
  const Clock clock;
  const SimConfig s1 = scenario(1);
  const OutageEstimate h = estimate_outage(s1, urban(), 200000, 200, 0.0);

  SimConfig s2 = scenario(2);
  s2.mode = Mode::kOptimizer;
  s2.limits.min_rad = deg2rad(0.2);
  const OutageEstimate o = estimate_outage(s2, urban(), 1000000, 200, 0.0);
  const double z = std::abs(o.misalignment - s2.p_out_max) / o.misalignment_se;

  const bool heur_ok = h.outage <= 3e-3 && h.trials >= 100000;
  const bool opt_ok = z <= 3.0;
  const double t_main = clock.seconds();
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "heuristic k=3 (S1): outage %.3g +- %.2g over %zu trials (<= 3e-3); optimizer (S2): "
                "misalignment %.3g +- %.2g vs 6e-4 (%.2f SE <= 3)",
                h.outage, h.outage_se, h.trials, o.misalignment, o.misalignment_se, z);
  verdict(3, heur_ok && opt_ok && t_main < 300.0, buf, t_main);
  detail("heuristic misalignment %.3g; optimizer SNR outage %.3g, mean design misalignment %.3g",
         h.misalignment, o.outage, o.design_p_mis);
  detail("optimizer beams may go down to 0.2 deg here so every instant meets the budget with equality");

  const OutageEstimate shared = estimate_outage(s2, urban(), 200000, 200, 1.0);
  detail("info: same estimate pair at both ends (fully correlated Tx/Rx errors): misalignment %.3g +- %.2g",
         shared.misalignment, shared.misalignment_se);
  SimConfig s1o = scenario(1);
  s1o.mode = Mode::kOptimizer;
  const OutageEstimate o1 = estimate_outage(s1o, urban(), 20000, 50, 0.0);
  detail("info: optimizer at S1: misalignment %.3g +- %.2g vs design %.3g (linear pointing model "
         "breaks down at 6-10 m with ~1 m relative position error)",
         o1.misalignment, o1.misalignment_se, o1.design_p_mis);
  CHECK(heur_ok);
  CHECK(opt_ok);
  CHECK(t_main < 300.0);
}

TEST_CASE("criterion 4: heuristic-vs-optimal gap") {
  const Clock clock;
  SimConfig h = scenario(1);
  h.eval_rate_hz = 100.0;
  SimConfig o = h;
  o.mode = Mode::kOptimizer;
  const Summary sh = run(h, urban()).summary;
  const Summary so = run(o, urban()).summary;
  // budget at which a circular k-sigma footprint would be exact on both sides
  SimConfig m = o;
  const double per_side = std::exp(-0.5 * h.k * h.k);
  m.p_out_max = 1.0 - (1.0 - per_side) * (1.0 - per_side);
  const Summary sm = run(m, urban()).summary;

  const double literal = sh.ptx_median_dbm - so.ptx_median_dbm;
  const double matched = sh.ptx_median_dbm - sm.ptx_median_dbm;
  const double t = clock.seconds();
  const bool pass = literal <= 3.0 && matched >= -0.1 && matched <= 3.0 && t < 300.0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "median ptx heuristic %.2f dBm, optimizer at 6e-4 %.2f dBm (gap %+.2f dB <= 3); "
                "optimizer at matched coverage %.4g: %.2f dBm (gap %+.2f dB in [-0.1, 3])",
                sh.ptx_median_dbm, so.ptx_median_dbm, literal, m.p_out_max, sm.ptx_median_dbm, matched);
  verdict(4, pass, buf, t);
  detail("at 6e-4 the optimizer needs wider beams than the k=3 box, whose per-side miss is %.3g", per_side);
  detail("outage rates: heuristic %.3g, optimizer %.3g, matched optimizer %.3g", sh.outage_rate,
         so.outage_rate, sm.outage_rate);
  CHECK(literal <= 3.0);
  CHECK(matched >= -0.1);
  CHECK(matched <= 3.0);
  CHECK(t < 300.0);
}

TEST_CASE("criterion 5: adaptive-vs-fixed benefit") {
  const Clock clock;
  bool pass = true;
  std::string line;
  std::vector<std::string> rows;
  for (int s : {1, 2}) {
    const SimConfig a = scenario(s);
    const Summary ha = run(a, urban()).summary;
    SimConfig f = a;
    f.mode = Mode::kFixed;
    f.fixed_beam = ha.beam_mean;
    const Summary hf = run(f, urban()).summary;
    const double gap = hf.ptx_mean_dbm - ha.ptx_mean_dbm;
    const bool ok = gap >= 3.0 && ha.outage_rate < hf.outage_rate;
    pass = pass && ok;
    char buf[256];
    std::snprintf(buf, sizeof buf, "S%d %.2f dB (outage %.3g vs %.3g) %s", s, gap, ha.outage_rate,
                  hf.outage_rate, ok ? "ok" : "short");
    line += (line.empty() ? "" : "; ") + std::string(buf);
    std::snprintf(buf, sizeof buf,
                  "S%d: adaptive beams %.2f-%.2f deg (mean %.2f), mean ptx adaptive %.2f dBm, fixed %.2f dBm",
                  s, rad2deg(ha.beam_min), rad2deg(ha.beam_max), rad2deg(ha.beam_mean), ha.ptx_mean_dbm,
                  hf.ptx_mean_dbm);
    rows.push_back(buf);
    CHECK(gap >= 3.0);
    CHECK(ha.outage_rate < hf.outage_rate);
  }
  const double t = clock.seconds();
  verdict(5, pass && t < 300.0, "fixed minus adaptive mean ptx (>= 3 dB, adaptive outage lower): " + line, t);
  for (const auto& r : rows) detail("%s", r.c_str());
  CHECK(t < 300.0);
}

TEST_CASE("criterion 6: EKF correctness") {
  using namespace testing;
  const Clock clock;
  const NoiseConfig n;
  double worst_fd = 0.0;
  for (int i = 0; i < 100; ++i) {
    FilterState s;
    s.p = random_vec(50.0);
    s.v = random_vec(10.0);
    s.q = random_unit_quat();
    ImuSample u;
    u.accel = random_vec(2.0) + Vec3(0, 0, 9.8);
    u.gyro = random_vec(0.3);
    const double T = uniform(0.001, 0.1);
    const Jacobians j = jacobians(s, u, T, n);
    auto fx = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return transition(x, u, T, n); };
    auto fw = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      return transition(s.mean(), u, T, n, NoiseVec(w));
    };
    auto hx = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return observation(x); };
    worst_fd = std::max({worst_fd, rel_err(j.F, numeric_jacobian(fx, s.mean())),
                         rel_err(j.G, numeric_jacobian(fw, NoiseVec::Zero())),
                         rel_err(j.H, numeric_jacobian(hx, s.mean()))});
  }

  // Ground truth from the filter's own transition with sampled process noise.
  std::mt19937_64 g(17);
  std::normal_distribution<double> N(0.0, 1.0);
  auto nvec = [&](double sd) -> Vec3 { return Vec3(N(g), N(g), N(g)) * sd; };
  StateVec truth;
  truth << 0, 0, 0, 10, 0, 0, 1, 0, 0, 0;
  StateCov P0 = StateCov::Zero();
  P0.diagonal() << 1, 1, 1, 0.1, 0.1, 0.1, 1e-4, 1e-4, 1e-4, 1e-4;
  FilterState s = FilterState::from_mean(truth, P0);
  s.p += nvec(1.0);
  s.v += nvec(std::sqrt(0.1));
  s = renormalize(s);
  const Eigen::LLT<Mat3> cg(n.C_gamma);
  const double T = 0.01;
  const int steps = 5000, burn_in = 500;
  double nees = 0.0, att = 0.0, worst_norm = 0.0, min_eig = 0.0, worst_asym = 0.0;
  for (int k = 0; k < steps; ++k) {
    ImuSample u;
    u.accel = Vec3(0.4 * std::sin(0.3 * k * T), 0.9 * std::cos(0.25 * k * T), 9.80665);
    u.gyro = Vec3(0.01 * std::sin(k * T), 0.01 * std::cos(k * T), 0.2 * std::sin(0.1 * k * T));
    NoiseVec w;
    w << nvec(n.sigma_a), nvec(n.sigma_a), nvec(n.sigma_omega);
    truth = transition(truth, u, T, n, w);
    truth.segment<4>(6).normalize();
    s = predict(s, u, T, n);
    if (k % 10 == 9) {
      const Quaternion qt(Vec4(truth.segment<4>(6)));
      GpsObservation z;
      z.pos = truth.segment<3>(0) + nvec(n.sigma_gnss);
      z.speed = truth.segment<3>(3).norm() + n.sigma_v * N(g);
      z.quat_obs = euler_to_quat(to_euler(to_vec3(quat_to_euler(qt).angles) + cg.matrixL() * nvec(1.0)));
      s = update(s, z, n).state;
      worst_norm = std::max(worst_norm, std::abs(s.q.norm() - 1.0));
    }
    Eigen::SelfAdjointEigenSolver<StateCov> es(s.P, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    worst_asym = std::max(worst_asym, (s.P - s.P.transpose()).cwiseAbs().maxCoeff());
    if (k >= burn_in) {
      const Vec3 e = truth.segment<3>(0) - s.p;
      nees += e.dot(s.P.topLeftCorner<3, 3>().ldlt().solve(e));
      const Eigen::Matrix<double, 4, 3> xi = quat_left(s.q).rightCols<3>();
      Vec4 qt = truth.segment<4>(6);
      if (qt.dot(s.q.coeffs()) < 0.0) qt = -qt;
      const Vec3 dth = 2.0 * xi.transpose() * (qt - s.q.coeffs());
      att += dth.dot((4.0 * xi.transpose() * s.P.block<4, 4>(6, 6) * xi).ldlt().solve(dth));
    }
  }
  nees /= steps - burn_in;
  att /= steps - burn_in;
  const double t = clock.seconds();
  const bool pass = worst_fd <= 1e-5 && nees >= 1.5 && nees <= 5.5 && worst_norm <= 1e-12 &&
                    min_eig >= -1e-9 && worst_asym <= 1e-10;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "F/G/H worst relative FD error %.2e (<= 1e-5); position NEES %.3f over %d steps "
                "(in [1.5, 5.5]); max | |q|-1 | %.1e; min eigenvalue %.1e",
                worst_fd, nees, steps - burn_in, worst_norm, min_eig);
  verdict(6, pass, buf, t);
  detail("attitude NEES %.3f (3 DoF, tangent space at the estimate)", att);
  CHECK(worst_fd <= 1e-5);
  CHECK(nees >= 1.5);
  CHECK(nees <= 5.5);
  CHECK(worst_norm <= 1e-12);
  CHECK(min_eig >= -1e-9);
}

TEST_CASE("criterion 7: parameter-sensitivity shape") {
  const Clock clock;
  const int seeds = 10;
  auto rates = [&](double tau, double f_data) {
    std::vector<double> r;
    for (int s = 1; s <= seeds; ++s) {
      SimConfig c = scenario(2);
      c.latency_tau = tau;
      c.f_data = f_data;
      c.seed = static_cast<std::uint64_t>(s);
      r.push_back(run(c, urban()).summary.outage_rate);
    }
    return r;
  };
  const auto t1 = rates(0.001, 100.0);
  const auto t10 = rates(0.010, 100.0);
  const auto t100 = rates(0.100, 100.0);
  const auto k10 = rates(0.010, 1000.0);

  const double p_100_10 = mann_whitney_p(t100, t10);
  const double p_10_1 = mann_whitney_p(t10, t1);
  const double tau_effect = mean(t100) - mean(t10);
  const double f_effect = std::abs(mean(k10) - mean(t10));
  const bool a = mean(t100) > mean(t10) && p_100_10 < 0.05;
  const bool b = p_10_1 > 0.05;
  const bool c = f_effect < tau_effect;
  const double t = clock.seconds();
  char buf[360];
  std::snprintf(buf, sizeof buf,
                "S2 mean outage over %d seeds: tau 1/10/100 ms = %.3g/%.3g/%.3g; 100 vs 10 ms p=%.3g "
                "(< 0.05), 10 vs 1 ms p=%.3g (> 0.05); |1 kHz - 100 Hz| %.3g < tau effect %.3g",
                seeds, mean(t1), mean(t10), mean(t100), p_100_10, p_10_1, f_effect, tau_effect);
  verdict(7, a && b && c && t < 600.0, buf, t);
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
      char b2[32];
      std::snprintf(b2, sizeof b2, "%s%.2g", s.empty() ? "" : " ", x);
      s += b2;
    }
    return s;
  };
  detail("tau=1 ms:   %s", list(t1).c_str());
  detail("tau=10 ms:  %s", list(t10).c_str());
  detail("tau=100 ms: %s", list(t100).c_str());
  detail("1 kHz, 10 ms: %s", list(k10).c_str());
  CHECK(a);
  CHECK(b);
  CHECK(c);
  CHECK(t < 600.0);
}

TEST_CASE("criterion 8: determinism") {
  const Clock clock;
  auto render = [](const SimConfig& c) {
    const RunResult r = run(c, urban());
    std::ostringstream os;
    write_results_csv(os, r.records);
    write_summary(os, r.summary, c);
    write_cdf_csv(os, r.summary);
    return os.str();
  };
  bool same = true;
  int cases = 0;
  for (Mode m : {Mode::kHeuristic, Mode::kFixed, Mode::kOptimizer}) {
    for (FusionMode fm : {FusionMode::kSampled, FusionMode::kFullEkf}) {
      SimConfig c = scenario(1);
      c.mode = m;
      c.fusion_mode = fm;
      c.seed = 77;
      c.max_duration = m == Mode::kOptimizer ? 5.0 : 60.0;
      same = same && render(c) == render(c);
      ++cases;
    }
  }
  // through the command line, whole files
  const fs::path base = fs::temp_directory_path() / "v2vbpc_acceptance";
  fs::remove_all(base);
  std::vector<std::string> files[2];
  for (int i = 0; i < 2; ++i) {
    const std::string dir = (base / std::to_string(i)).string();
    const char* argv[] = {"v2vbpc", "run", "--out-dir", dir.c_str(), "--seed", "5", "--scenario", "S2"};
    std::ostringstream out, err;
    REQUIRE(cli_main(8, argv, out, err) == kExitOk);
    for (const char* f : {"results.csv", "summary.txt", "cdf.csv", "config.ini"})
      files[i].push_back(slurp(fs::path(dir) / f));
  }
  const bool cli_same = files[0] == files[1];
  const double t = clock.seconds();
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d in-process configurations and one full command-line run repeated with the same "
                "seed: %s",
                cases, same && cli_same ? "byte-identical" : "DIFFERENT");
  verdict(8, same && cli_same, buf, t);
  CHECK(same);
  CHECK(cli_same);
}
