// SPDX-License-Identifier: Apache-2.0
//
// Two-vehicle link simulation: the follower replays the leader's trajectory
// delayed by a time gap, each vehicle produces estimates at the sensor rate,
// the peer's estimate arrives after the control-link latency, and every
// evaluation tick is scored against the true geometry.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "v2vbpc/bpc.hpp"
#include "v2vbpc/channel.hpp"
#include "v2vbpc/fusion.hpp"
#include "v2vbpc/trajectory.hpp"

namespace v2vbpc {

enum class Mode { kHeuristic, kFixed, kOptimizer };
enum class FusionMode { kSampled, kFullEkf };

std::string to_string(Mode m);
std::string to_string(FusionMode m);
Mode parse_mode(const std::string& s);
FusionMode parse_fusion_mode(const std::string& s);

struct SimConfig {
  double delta_t_gap = 3.0;      // s
  double latency_tau = 0.01;     // s
  double f_data = 100.0;         // Hz
  double eval_rate_hz = 1000.0;  // Hz, truth evaluation grid
  double max_duration = 0.0;     // s of evaluated time, 0 = whole trajectory
  double sigma_p = 1.5;          // m, sqrt(trace C_p)
  double sigma_gamma = 0.02617993877991494;  // rad, sqrt(trace C_gamma), 1.5 deg
  double k = 3.0;
  BeamLimits limits;
  std::vector<double> codebook;               // rad, empty = continuous
  double fixed_beam = 0.22689280275926285;    // rad, 13 deg
  double p_out_max = 6e-4;
  double error_corr_time = 1.0;               // s, sampled errors; 0 = white
  double gps_rate_hz = 10.0;                  // full_ekf only
  Mode mode = Mode::kHeuristic;
  FusionMode fusion_mode = FusionMode::kSampled;
  std::uint64_t seed = 1;
  LinkConfig link = default_link_config();
  NoiseConfig noise;  // full_ekf sensor and filter noise
};

/// Throws kConfig on out-of-range settings.
void validate(const SimConfig& cfg);

struct TimeStepRecord {
  double t = 0.0;
  double d = 0.0;  // true distance
  Beamwidth w1;
  Beamwidth w2;
  double ptx_dbm = 0.0;
  double snr_db = 0.0;
  bool outage = false;
  PointingError err1;  // true minus pointed, Tx
  PointingError err2;  // Rx
  bool eirp_clipped = false;
  bool infeasible = false;
  double trace_cp = 0.0;  // own position covariance trace, Tx side
  double trace_cg = 0.0;  // own Euler covariance trace, Tx side
};

struct Summary {
  std::size_t steps = 0;
  double sigma_p = 0.0;      // m
  double sigma_gamma = 0.0;  // rad
  double outage_rate = 0.0;
  std::size_t outage_steps = 0;
  double ptx_mean_dbm = 0.0;
  double ptx_median_dbm = 0.0;
  double beam_min = 0.0;  // rad, over both ends and both axes
  double beam_max = 0.0;
  double beam_mean = 0.0;
  std::size_t eirp_clipped_steps = 0;
  std::size_t infeasible_steps = 0;
  std::vector<double> cdf_snr_db;  // 0.1 dB grid
  std::vector<double> cdf;
};

struct RunResult {
  std::vector<TimeStepRecord> records;
  Summary summary;
};

RunResult run(const SimConfig& cfg, const Trajectory& traj);

/// SNR recomputed from a record's logged beam, pointing and power values.
double record_snr_db(const TimeStepRecord& r, const LinkConfig& cfg);

Summary metrics(const std::vector<TimeStepRecord>& records, const LinkConfig& cfg);

struct InstantOutage {
  double t = 0.0;
  double d = 0.0;
  std::size_t trials = 0;
  std::size_t outages = 0;
  std::size_t misses = 0;
  double design_p_mis = 0.0;
};

struct OutageEstimate {
  std::size_t trials = 0;
  double outage = 0.0;  // SNR below threshold
  double outage_se = 0.0;
  double misalignment = 0.0;  // peer outside the -3 dB footprint at either end
  double misalignment_se = 0.0;
  double design_p_mis = 0.0;  // mean model misalignment of the decisions, optimizer only
  std::vector<InstantOutage> per_instant;
};

/// Monte Carlo over estimate errors at `instants` evenly spaced instants of
/// the paired trajectory, truth geometry frozen per instant. Each end combines
/// a fresh estimate of its own state with a snapshot of the peer whose errors
/// have correlation `peer_correlation` with the peer's own fresh estimate
/// (0: independent, 1: the same pair of estimates at both ends).
OutageEstimate estimate_outage(const SimConfig& cfg, const Trajectory& traj, std::size_t n_trials,
                               std::size_t instants = 200, double peer_correlation = 0.0);

void write_results_csv(std::ostream& os, const std::vector<TimeStepRecord>& records);
void write_summary(std::ostream& os, const Summary& s, const SimConfig& cfg);
void write_cdf_csv(std::ostream& os, const Summary& s);

}  // namespace v2vbpc
