// SPDX-License-Identifier: Apache-2.0
//
// Heuristic beamwidth and power control: pointing-angle variances from the
// exchanged estimates, k-sigma beamwidths, worst-case Tx power.
#pragma once

#include <vector>

#include "v2vbpc/channel.hpp"
#include "v2vbpc/geometry.hpp"

namespace v2vbpc {

/// Estimate exchanged between vehicles. C_q is the covariance of q_hat = q^{nv}.
struct PeerEstimate {
  Vec3 p_hat = Vec3::Zero();
  Mat3 C_p = Mat3::Zero();
  Quaternion q_hat;
  Mat4 C_q = Mat4::Zero();
  double timestamp = 0.0;
};

struct BpcGradients {
  Mat34 B_q1;  // w.r.t. q^{v1 n}, the conjugate of q_hat
  Mat3 B_dp;
  RowVec3 b_alpha;
  RowVec3 b_beta;
  Vec3 dp_local;  // estimated peer position in the own frame
};

BpcGradients bpc_gradients(const PeerEstimate& self, const PeerEstimate& peer);

struct PointingStatistics {
  LosAngles los;
  double sigma_alpha = 0.0;
  double sigma_beta = 0.0;
  double distance = 0.0;
  Mat3 C_dp = Mat3::Zero();
};

PointingStatistics pointing_statistics(const PeerEstimate& self, const PeerEstimate& peer);

struct BeamLimits {
  double min_rad = 0.031415926535897934;  // 1.8 deg
  double max_rad = 2.0943951023931953;    // 120 deg
};

/// 2k sigma per axis, clamped, then snapped upward to `codebook` (radians)
/// when it is non-empty.
Beamwidth select_beamwidth(double sigma_alpha, double sigma_beta, double k,
                           const BeamLimits& limits = {},
                           const std::vector<double>& codebook = {});

struct PowerDecision {
  double ptx_dbm = 0.0;
  bool clipped = false;
};

/// Tx power for SNR_min under the 1/16 worst-case pointing loss, clipped to
/// the EIRP limit on the Tx side.
PowerDecision power_control(const Beamwidth& w1, const Beamwidth& w2, double d_hat,
                            const LinkConfig& cfg);
/// Same law with one beamwidth shared by both ends.
PowerDecision fixed_power_control(const Beamwidth& w, double d_hat, const LinkConfig& cfg);

struct BpcConfig {
  double k = 3.0;
  BeamLimits limits;
  std::vector<double> codebook;
};

struct BpcDecision {
  Beamwidth beamwidth;  // Tx
  double ptx_dbm = 0.0;
  LosAngles pointing;  // Tx
  double sigma_alpha = 0.0;
  double sigma_beta = 0.0;
  bool eirp_clipped = false;
  Beamwidth rx_beamwidth;
  LosAngles rx_pointing;
  double distance_hat = 0.0;
};

/// One control step for the link self -> peer; the Rx beam is what the peer
/// selects from the same pair of estimates.
BpcDecision bpc_step(const PeerEstimate& self, const PeerEstimate& peer, const LinkConfig& cfg,
                     const BpcConfig& bpc = {});

}  // namespace v2vbpc
