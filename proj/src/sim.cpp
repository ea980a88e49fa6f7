// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "v2vbpc/errors.hpp"
#include "v2vbpc/optimizer.hpp"

namespace v2vbpc {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kHeuristic: return "heuristic";
    case Mode::kFixed: return "fixed";
    case Mode::kOptimizer: return "optimizer";
  }
  return "?";
}

std::string to_string(FusionMode m) { return m == FusionMode::kSampled ? "sampled" : "full_ekf"; }

Mode parse_mode(const std::string& s) {
  if (s == "heuristic") return Mode::kHeuristic;
  if (s == "fixed") return Mode::kFixed;
  if (s == "optimizer") return Mode::kOptimizer;
  throw Error(ErrorKind::kConfig, "unknown mode '" + s + "' (heuristic, fixed, optimizer)");
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "sampled") return FusionMode::kSampled;
  if (s == "full_ekf") return FusionMode::kFullEkf;
  throw Error(ErrorKind::kConfig, "unknown fusion mode '" + s + "' (sampled, full_ekf)");
}

void validate(const SimConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kConfig, what);
  };
  need(c.delta_t_gap > 0.0, "delta_t_gap must be positive");
  need(c.latency_tau >= 0.0 && std::isfinite(c.latency_tau), "latency must be >= 0");
  need(c.f_data > 0.0 && std::isfinite(c.f_data), "f_data must be positive");
  need(c.eval_rate_hz > 0.0 && std::isfinite(c.eval_rate_hz), "eval_rate_hz must be positive");
  need(c.max_duration >= 0.0, "max_duration must be >= 0");
  need(c.sigma_p >= 0.0 && c.sigma_gamma >= 0.0, "sigma_p and sigma_gamma must be >= 0");
  need(c.k > 0.0, "k must be positive");
  need(c.limits.min_rad > 0.0 && c.limits.max_rad >= c.limits.min_rad &&
           c.limits.max_rad <= 3.141592653589793,
       "beam limits must satisfy 0 < min <= max <= 180 deg");
  need(c.fixed_beam > 0.0 && c.fixed_beam <= 3.141592653589793, "fixed beam must lie in (0, 180] deg");
  need(c.p_out_max > 0.0 && c.p_out_max < 0.5, "p_out_max must lie in (0, 0.5)");
  need(c.error_corr_time >= 0.0 && std::isfinite(c.error_corr_time),
       "error correlation time must be >= 0");
  need(c.gps_rate_hz > 0.0 && c.gps_rate_hz <= c.f_data, "gps rate must lie in (0, f_data]");
  need(c.link.f0_hz > 0.0 && std::isfinite(c.link.eirp_max_dbm), "invalid link configuration");
  need(c.link.gain_constant > 0.0, "gain constant must be positive");
  for (double w : c.codebook) need(w > 0.0 && w <= 3.141592653589793, "codebook entries in (0, 180] deg");
}

namespace {

struct Snapshot {
  PeerEstimate est;
  Mat3 C_gamma = Mat3::Zero();
};

Vec3 normal3(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return {a, b, c};
}

// Estimate built from standardized errors zp (position) and zg (Euler angles).
Snapshot sampled_snapshot(const VehicleState& truth, double sigma_p, double sigma_gamma,
                          const Vec3& zp, const Vec3& zg) {
  const double sp = sigma_p / std::sqrt(3.0);
  const double sg = sigma_gamma / std::sqrt(3.0);
  Snapshot s;
  s.est.timestamp = truth.t;
  s.est.p_hat = truth.p + sp * zp;
  s.est.C_p = sp * sp * Mat3::Identity();
  const Vec3 gamma = to_vec3(quat_to_euler(truth.q).angles) + sg * zg;
  s.est.q_hat = euler_to_quat(to_euler(gamma));
  s.C_gamma = sg * sg * Mat3::Identity();
  s.est.C_q = quat_cov_from_euler_cov(s.est.q_hat, s.C_gamma);
  return s;
}

struct ErrorDraw {
  Vec3 zp = Vec3::Zero();
  Vec3 zg = Vec3::Zero();
};

ErrorDraw fresh_draw(std::mt19937_64& rng) {
  ErrorDraw e;
  e.zp = normal3(rng);
  e.zg = normal3(rng);
  return e;
}

// Unit-variance draw with correlation rho to `prev`.
ErrorDraw correlated_draw(const ErrorDraw& prev, double rho, std::mt19937_64& rng) {
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const ErrorDraw n = fresh_draw(rng);
  return {rho * prev.zp + c * n.zp, rho * prev.zg + c * n.zg};
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

// Estimates of one vehicle at the sensor ticks t_ref + j / f_data.
class EstimateStream {
 public:
  EstimateStream(const SimConfig& cfg, const Trajectory& traj, double offset, double t_ref,
                 std::uint64_t stream)
      : cfg_(cfg), traj_(traj), offset_(offset), t_ref_(t_ref),
        rng_(make_rng(cfg.seed, stream, 0x5eed)) {}

  double tick_time(long j) const { return t_ref_ + static_cast<double>(j) / cfg_.f_data; }

  VehicleState truth(double t) const {
    VehicleState s = state_at(traj_, t - offset_);
    s.t = t;
    return s;
  }

  const Snapshot& get(long j) {
    while (next_ <= j) {
      cache_.push_back(produce(next_));
      ++next_;
    }
    return cache_.at(static_cast<std::size_t>(j - base_));
  }

  void release_before(long j) {
    while (base_ < j && !cache_.empty()) {
      cache_.pop_front();
      ++base_;
    }
  }

 private:
  Snapshot produce(long j) {
    const double t = tick_time(j);
    const VehicleState truth_now = truth(t);
    if (cfg_.fusion_mode == FusionMode::kSampled) {
      const double rho =
          cfg_.error_corr_time > 0.0 ? std::exp(-1.0 / (cfg_.f_data * cfg_.error_corr_time)) : 0.0;
      draw_ = j == 0 ? fresh_draw(rng_) : correlated_draw(draw_, rho, rng_);
      return sampled_snapshot(truth_now, cfg_.sigma_p, cfg_.sigma_gamma, draw_.zp, draw_.zg);
    }
    const NoiseConfig& n = cfg_.noise;
    if (j == 0) {
      FilterState s;
      s.p = truth_now.p;
      s.v = truth_now.v;
      s.q = truth_now.q;
      s.P.block<3, 3>(0, 0) = n.sigma_gnss * n.sigma_gnss * Mat3::Identity();
      s.P.block<3, 3>(3, 3) = n.sigma_v * n.sigma_v * Mat3::Identity();
      s.P.block<4, 4>(6, 6) =
          quat_cov_from_euler_cov(s.q, n.C_gamma) + n.quat_obs_floor * Mat4::Identity();
      ekf_ = FilterState(s);
      gps_every_ = std::max(1L, std::lround(cfg_.f_data / cfg_.gps_rate_hz));
    } else {
      const double T = 1.0 / cfg_.f_data;
      ImuSample u = imu_at(traj_, tick_time(j - 1) - offset_);
      std::normal_distribution<double> nd;
      for (int i = 0; i < 3; ++i) u.accel[i] += n.accel_bias[i] + n.sigma_a * nd(rng_);
      for (int i = 0; i < 3; ++i) u.gyro[i] += n.gyro_bias[i] + n.sigma_omega * nd(rng_);
      ekf_ = predict(ekf_, u, T, n);
      if (j % gps_every_ == 0 && truth_now.gps_valid) {
        GpsObservation z;
        z.t = t;
        z.pos = truth_now.p + n.sigma_gnss * normal3(rng_);
        z.speed = std::max(0.0, truth_now.v.norm() + n.sigma_v * nd(rng_));
        const Eigen::LLT<Mat3> llt(n.C_gamma);
        const Vec3 gamma =
            to_vec3(quat_to_euler(truth_now.q).angles) + Mat3(llt.matrixL()) * normal3(rng_);
        z.quat_obs = euler_to_quat(to_euler(gamma));
        ekf_ = update(ekf_, z, n).state;
      }
    }
    Snapshot out;
    out.est.timestamp = t;
    out.est.p_hat = ekf_.p;
    out.est.C_p = ekf_.P.block<3, 3>(0, 0);
    out.est.q_hat = ekf_.q;
    out.est.C_q = ekf_.P.block<4, 4>(6, 6);
    out.C_gamma = euler_cov_from_quat_cov(ekf_.q, out.est.C_q);
    return out;
  }

  const SimConfig& cfg_;
  const Trajectory& traj_;
  double offset_;
  double t_ref_;
  std::mt19937_64 rng_;
  std::deque<Snapshot> cache_;
  long base_ = 0;
  long next_ = 0;
  ErrorDraw draw_;
  FilterState ekf_;
  long gps_every_ = 1;
};

struct Decision {
  Beamwidth w1;
  Beamwidth w2;
  double ptx_dbm = 0.0;
  LosAngles point1;
  LosAngles point2;
  bool clipped = false;
  bool infeasible = false;
  double design_p_mis = 0.0;
};

BpcConfig bpc_config(const SimConfig& cfg) { return {cfg.k, cfg.limits, cfg.codebook}; }

OptProblem opt_problem(const SimConfig& cfg, const VehicleState& v1, const VehicleState& v2,
                       const Snapshot& s1, const Snapshot& s2) {
  OptProblem prob;
  prob.p1 = v1.p;
  prob.p2 = v2.p;
  prob.q1 = v1.q;
  prob.q2 = v2.q;
  prob.C_p1 = s1.est.C_p;
  prob.C_p2 = s2.est.C_p;
  prob.C_gamma1 = s1.C_gamma;
  prob.C_gamma2 = s2.C_gamma;
  prob.p_out_max = cfg.p_out_max;
  prob.cfg = cfg.link;
  prob.limits = cfg.limits;
  return prob;
}

// own1/peer2 is what the Tx holds, own2/peer1 what the Rx holds.
Decision decide(const SimConfig& cfg, const PeerEstimate& own1, const PeerEstimate& peer2,
                const PeerEstimate& own2, const PeerEstimate& peer1, const OptSolution* opt) {
  Decision d;
  const BpcConfig bc = bpc_config(cfg);
  const PointingStatistics rx = pointing_statistics(own2, peer1);
  d.point2 = rx.los;
  switch (cfg.mode) {
    case Mode::kHeuristic: {
      const BpcDecision tx = bpc_step(own1, peer2, cfg.link, bc);
      d.w1 = tx.beamwidth;
      d.w2 = select_beamwidth(rx.sigma_alpha, rx.sigma_beta, cfg.k, cfg.limits, cfg.codebook);
      d.ptx_dbm = tx.ptx_dbm;
      d.point1 = tx.pointing;
      d.clipped = tx.eirp_clipped;
      break;
    }
    case Mode::kFixed: {
      const PointingStatistics tx = pointing_statistics(own1, peer2);
      d.w1 = d.w2 = {cfg.fixed_beam, cfg.fixed_beam};
      const PowerDecision p = fixed_power_control(d.w1, tx.distance, cfg.link);
      d.ptx_dbm = p.ptx_dbm;
      d.clipped = p.clipped;
      d.point1 = tx.los;
      break;
    }
    case Mode::kOptimizer: {
      const PointingStatistics tx = pointing_statistics(own1, peer2);
      d.w1 = opt->w1;
      d.w2 = opt->w2;
      d.ptx_dbm = opt->ptx_dbm;
      d.clipped = opt->eirp_clipped;
      d.infeasible = !opt->feasible;
      d.design_p_mis = opt->p_mis;
      d.point1 = tx.los;
      break;
    }
  }
  return d;
}

struct Truth {
  double d = 0.0;
  LosAngles los1;
  LosAngles los2;
};

Truth true_geometry(const VehicleState& v1, const VehicleState& v2) {
  const Vec3 dp = v2.p - v1.p;
  Truth t;
  t.d = dp.norm();
  t.los1 = los_angles(rotation_matrix(v1.q).transpose() * dp);
  t.los2 = los_angles(rotation_matrix(v2.q).transpose() * (-dp));
  return t;
}

PointingError pointing_error(const LosAngles& truth, const LosAngles& pointed) {
  return {wrap_angle(truth.azimuth - pointed.azimuth), truth.elevation - pointed.elevation};
}

bool outside_footprint(const PointingError& e, const Beamwidth& w) {
  const double u = 2.0 * e.d_az / w.az;
  const double v = 2.0 * e.d_el / w.el;
  return u * u + v * v > 1.0;
}

TimeStepRecord score(double t, const Truth& truth, const Decision& dec, const LinkConfig& link) {
  TimeStepRecord r;
  r.t = t;
  r.d = truth.d;
  r.w1 = dec.w1;
  r.w2 = dec.w2;
  r.ptx_dbm = dec.ptx_dbm;
  r.err1 = pointing_error(truth.los1, dec.point1);
  r.err2 = pointing_error(truth.los2, dec.point2);
  r.snr_db = record_snr_db(r, link);
  r.outage = r.snr_db < link.snr_min_db;
  r.eirp_clipped = dec.clipped;
  r.infeasible = dec.infeasible;
  return r;
}

}  // namespace

double record_snr_db(const TimeStepRecord& r, const LinkConfig& cfg) {
  return r.ptx_dbm + max_gain_db(r.w1, cfg) + pattern_gain_db(r.err1, r.w1) +
         max_gain_db(r.w2, cfg) + pattern_gain_db(r.err2, r.w2) - path_loss_db(r.d, cfg.f0_hz) -
         cfg.noise_power_dbm;
}

RunResult run(const SimConfig& cfg, const Trajectory& traj) {
  validate(cfg);
  if (traj.size() < 2) throw Error(ErrorKind::kInvalidArgument, "trajectory needs at least two samples");
  const double t_ref = traj.front().t + cfg.delta_t_gap;
  const double t_last = traj.back().t;
  const double t_start = t_ref + cfg.latency_tau;
  if (!(t_start < t_last)) {
    throw Error(ErrorKind::kInvalidArgument, "trajectory too short for the time gap and latency");
  }
  double t_stop = t_last;
  if (cfg.max_duration > 0.0) t_stop = std::min(t_stop, t_start + cfg.max_duration);

  EstimateStream lead(cfg, traj, 0.0, t_ref, 1);
  EstimateStream follow(cfg, traj, cfg.delta_t_gap, t_ref, 2);

  RunResult res;
  const auto n_steps =
      static_cast<std::size_t>(std::floor((t_stop - t_start) * cfg.eval_rate_hz + 1e-9)) + 1;
  res.records.reserve(n_steps);

  long key_own = -1, key_peer = -1;
  Decision dec;
  OptSolution opt;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = t_start + static_cast<double>(i) / cfg.eval_rate_hz;
    try {
      const long j_own = static_cast<long>(std::floor((t - t_ref) * cfg.f_data + 1e-9));
      const long j_peer =
          static_cast<long>(std::floor((t - cfg.latency_tau - t_ref) * cfg.f_data + 1e-9));
      const Snapshot& own1 = lead.get(j_own);
      const Snapshot& own2 = follow.get(j_own);
      const Snapshot& peer1 = lead.get(j_peer);
      const Snapshot& peer2 = follow.get(j_peer);
      if (j_own != key_own || j_peer != key_peer) {
        if (cfg.mode == Mode::kOptimizer && j_own != key_own) {
          const double tj = lead.tick_time(j_own);
          opt = optimize(opt_problem(cfg, lead.truth(tj), follow.truth(tj), own1, own2));
        }
        dec = decide(cfg, own1.est, peer2.est, own2.est, peer1.est, &opt);
        key_own = j_own;
        key_peer = j_peer;
      }
      const Truth truth = true_geometry(lead.truth(t), follow.truth(t));
      TimeStepRecord r = score(t, truth, dec, cfg.link);
      if (r.ptx_dbm + max_gain_db(r.w1, cfg.link) > cfg.link.eirp_max_dbm + 1e-9) {
        throw Error(ErrorKind::kNumericalFailure, "EIRP limit exceeded");
      }
      r.trace_cp = own1.est.C_p.trace();
      r.trace_cg = own1.C_gamma.trace();
      res.records.push_back(r);
      lead.release_before(j_peer);
      follow.release_before(j_peer);
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(i) + " (t=" + std::to_string(t) +
                                " s): " + e.what());
    }
  }
  res.summary = metrics(res.records, cfg.link);
  return res;
}

Summary metrics(const std::vector<TimeStepRecord>& records, const LinkConfig& cfg) {
  if (records.empty()) throw Error(ErrorKind::kInvalidArgument, "no records to summarize");
  Summary s;
  const double n = static_cast<double>(records.size());
  s.steps = records.size();
  double tcp = 0.0, tcg = 0.0, ptx = 0.0, bw = 0.0;
  s.beam_min = std::numeric_limits<double>::infinity();
  s.beam_max = 0.0;
  std::vector<double> snr, p;
  snr.reserve(records.size());
  p.reserve(records.size());
  for (const TimeStepRecord& r : records) {
    tcp += r.trace_cp;
    tcg += r.trace_cg;
    ptx += r.ptx_dbm;
    p.push_back(r.ptx_dbm);
    snr.push_back(r.snr_db);
    if (r.snr_db < cfg.snr_min_db) ++s.outage_steps;
    if (r.eirp_clipped) ++s.eirp_clipped_steps;
    if (r.infeasible) ++s.infeasible_steps;
    for (double w : {r.w1.az, r.w1.el, r.w2.az, r.w2.el}) {
      s.beam_min = std::min(s.beam_min, w);
      s.beam_max = std::max(s.beam_max, w);
      bw += w;
    }
  }
  s.sigma_p = std::sqrt(tcp / n);
  s.sigma_gamma = std::sqrt(tcg / n);
  s.outage_rate = static_cast<double>(s.outage_steps) / n;
  s.ptx_mean_dbm = ptx / n;
  std::sort(p.begin(), p.end());
  s.ptx_median_dbm = p.size() % 2 ? p[p.size() / 2] : 0.5 * (p[p.size() / 2 - 1] + p[p.size() / 2]);
  s.beam_mean = bw / (4.0 * n);

  std::sort(snr.begin(), snr.end());
  const long lo = static_cast<long>(std::floor(std::max(snr.front(), -100.0) * 10.0));
  const long hi = static_cast<long>(std::ceil(snr.back() * 10.0));
  for (long g = lo; g <= std::max(lo, hi); ++g) {
    const double x = static_cast<double>(g) / 10.0;
    const auto c = std::upper_bound(snr.begin(), snr.end(), x) - snr.begin();
    s.cdf_snr_db.push_back(x);
    s.cdf.push_back(static_cast<double>(c) / n);
  }
  return s;
}

OutageEstimate estimate_outage(const SimConfig& cfg, const Trajectory& traj, std::size_t n_trials,
                               std::size_t instants, double peer_correlation) {
  validate(cfg);
  if (n_trials < 10000) throw Error(ErrorKind::kInvalidArgument, "estimate_outage needs >= 1e4 trials");
  if (instants == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one instant");
  if (!(peer_correlation >= 0.0 && peer_correlation <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "peer correlation must lie in [0, 1]");
  const double t_ref = traj.front().t + cfg.delta_t_gap;
  const double span = traj.back().t - t_ref;
  if (!(span > 0.0)) throw Error(ErrorKind::kInvalidArgument, "trajectory shorter than the time gap");
  const std::size_t per = (n_trials + instants - 1) / instants;

  std::size_t outages = 0, misses = 0, total = 0;
  double design = 0.0;
  std::vector<InstantOutage> per_instant;
  per_instant.reserve(instants);
  for (std::size_t i = 0; i < instants; ++i) {
    const double t = t_ref + (static_cast<double>(i) + 0.5) * span / static_cast<double>(instants);
    VehicleState v1 = state_at(traj, t);
    VehicleState v2 = state_at(traj, t - cfg.delta_t_gap);
    v1.t = v2.t = t;
    const Truth truth = true_geometry(v1, v2);
    std::mt19937_64 rng = make_rng(cfg.seed, i, 0x7a6e);

    OptSolution opt;
    if (cfg.mode == Mode::kOptimizer) {
      const double sp2 = cfg.sigma_p * cfg.sigma_p / 3.0;
      const double sg2 = cfg.sigma_gamma * cfg.sigma_gamma / 3.0;
      OptProblem prob;
      prob.p1 = v1.p;
      prob.p2 = v2.p;
      prob.q1 = v1.q;
      prob.q2 = v2.q;
      prob.C_p1 = prob.C_p2 = sp2 * Mat3::Identity();
      prob.C_gamma1 = prob.C_gamma2 = sg2 * Mat3::Identity();
      prob.p_out_max = cfg.p_out_max;
      prob.cfg = cfg.link;
      prob.limits = cfg.limits;
      opt = optimize(prob);
      design += opt.p_mis;
    }
    InstantOutage inst;
    inst.t = t;
    inst.d = truth.d;
    inst.design_p_mis = opt.p_mis;
    for (std::size_t k = 0; k < per; ++k) {
      const ErrorDraw e1 = fresh_draw(rng);
      const ErrorDraw e2 = fresh_draw(rng);
      const ErrorDraw f1 = correlated_draw(e1, peer_correlation, rng);
      const ErrorDraw f2 = correlated_draw(e2, peer_correlation, rng);
      const Snapshot a1 = sampled_snapshot(v1, cfg.sigma_p, cfg.sigma_gamma, e1.zp, e1.zg);
      const Snapshot a2 = sampled_snapshot(v2, cfg.sigma_p, cfg.sigma_gamma, e2.zp, e2.zg);
      const Snapshot b1 = sampled_snapshot(v1, cfg.sigma_p, cfg.sigma_gamma, f1.zp, f1.zg);
      const Snapshot b2 = sampled_snapshot(v2, cfg.sigma_p, cfg.sigma_gamma, f2.zp, f2.zg);
      const Decision dec = decide(cfg, a1.est, b2.est, a2.est, b1.est, &opt);
      const TimeStepRecord r = score(t, truth, dec, cfg.link);
      if (r.outage) ++inst.outages;
      if (outside_footprint(r.err1, r.w1) || outside_footprint(r.err2, r.w2)) ++inst.misses;
      ++inst.trials;
    }
    outages += inst.outages;
    misses += inst.misses;
    total += inst.trials;
    per_instant.push_back(inst);
  }
  OutageEstimate out;
  out.per_instant = std::move(per_instant);
  out.trials = total;
  const double n = static_cast<double>(total);
  out.outage = static_cast<double>(outages) / n;
  out.outage_se = std::sqrt(out.outage * (1.0 - out.outage) / n);
  out.misalignment = static_cast<double>(misses) / n;
  out.misalignment_se = std::sqrt(out.misalignment * (1.0 - out.misalignment) / n);
  out.design_p_mis = design / static_cast<double>(instants);
  return out;
}

void write_results_csv(std::ostream& os, const std::vector<TimeStepRecord>& records) {
  os << "t,d,omega1_az,omega1_el,omega2_az,omega2_el,ptx_dbm,snr_db,outage,err_az1,err_el1,"
        "err_az2,err_el2\n";
  char buf[512];
  for (const TimeStepRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g\n",
                  r.t, r.d, rad2deg(r.w1.az), rad2deg(r.w1.el), rad2deg(r.w2.az),
                  rad2deg(r.w2.el), r.ptx_dbm, r.snr_db, r.outage ? 1 : 0, rad2deg(r.err1.d_az),
                  rad2deg(r.err1.d_el), rad2deg(r.err2.d_az), rad2deg(r.err2.d_el));
    os << buf;
  }
}

void write_summary(std::ostream& os, const Summary& s, const SimConfig& cfg) {
  char buf[128];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.10g\n", key, v);
    os << buf;
  };
  os << "mode = " << to_string(cfg.mode) << '\n';
  os << "fusion_mode = " << to_string(cfg.fusion_mode) << '\n';
  os << "seed = " << cfg.seed << '\n';
  if (cfg.mode == Mode::kFixed) kv("fixed_beam_deg", rad2deg(cfg.fixed_beam));
  kv("latency_ms", cfg.latency_tau * 1e3);
  kv("f_data_hz", cfg.f_data);
  kv("k", cfg.k);
  kv("snr_min_db", cfg.link.snr_min_db);
  os << "steps = " << s.steps << '\n';
  kv("sigma_p_m", s.sigma_p);
  kv("sigma_gamma_deg", rad2deg(s.sigma_gamma));
  kv("outage_rate", s.outage_rate);
  os << "outage_steps = " << s.outage_steps << '\n';
  kv("ptx_mean_dbm", s.ptx_mean_dbm);
  kv("ptx_median_dbm", s.ptx_median_dbm);
  kv("beam_min_deg", rad2deg(s.beam_min));
  kv("beam_max_deg", rad2deg(s.beam_max));
  kv("beam_mean_deg", rad2deg(s.beam_mean));
  os << "eirp_clipped_steps = " << s.eirp_clipped_steps << '\n';
  os << "infeasible_steps = " << s.infeasible_steps << '\n';
}

void write_cdf_csv(std::ostream& os, const Summary& s) {
  os << "snr_db,cdf\n";
  char buf[64];
  for (std::size_t i = 0; i < s.cdf.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.1f,%.9g\n", s.cdf_snr_db[i], s.cdf[i]);
    os << buf;
  }
}

}  // namespace v2vbpc
