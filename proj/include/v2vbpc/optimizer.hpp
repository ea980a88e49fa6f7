// SPDX-License-Identifier: Apache-2.0
//
// Outage-constrained beamwidth/power benchmark. Position and orientation
// errors are projected onto the plane transverse to the LOS at the peer and
// the beams are sized so that the Gaussian error mass outside each footprint
// meets a per-side misalignment target.
#pragma once

#include "v2vbpc/bpc.hpp"
#include "v2vbpc/channel.hpp"
#include "v2vbpc/geometry.hpp"

namespace v2vbpc {

/// Covariance on the (horizontal, vertical) transverse axes of the LOS frame, m^2.
using LosPlaneCovariance = Mat2;

/// Position covariance (nav frame) seen on the transverse plane of the LOS
/// leaving a vehicle with orientation q_self.
LosPlaneCovariance project_position_cov(const Mat3& C_p, const Quaternion& q_self,
                                        const LosAngles& los);

/// Pointing-direction covariance (rad^2, transverse axes) caused by Euler
/// errors C_gamma on the vehicle with orientation q_self looking at dp_nav.
Mat2 orientation_cov_to_los(const Mat3& C_gamma, const Quaternion& q_self, const Vec3& dp_nav);

LosPlaneCovariance combined_los_cov(const LosPlaneCovariance& c1, const LosPlaneCovariance& c2,
                                    const Mat2& c_orient, double d);

/// Mass of N(0, C) inside the footprint ellipse with semi-axes d tan(az/2),
/// d tan(el/2).
double p_beam_cover(const Beamwidth& w, const LosPlaneCovariance& C, double d);

double p_mis_total(double p_tx, double p_rx);
double p_mis_total_approx(double p_tx, double p_rx);
/// Per-side target whose union equals `budget`.
double per_side_target(double budget);

double required_ptx_worstcase(const Beamwidth& w1, const Beamwidth& w2, double d,
                              const LinkConfig& cfg);

struct SideSolution {
  Beamwidth w;
  double p_mis = 0.0;
  bool attainable = true;
  int bisection_iterations = 0;
};

/// Smallest-solid-angle axis-aligned beam whose misalignment probability
/// equals `target` within the beam limits.
SideSolution optimize_side(const LosPlaneCovariance& C, double d, double target,
                           const BeamLimits& limits = {});

struct OptProblem {
  Vec3 p1 = Vec3::Zero();
  Vec3 p2 = Vec3::Zero();
  Quaternion q1;
  Quaternion q2;
  Mat3 C_p1 = Mat3::Zero();
  Mat3 C_p2 = Mat3::Zero();
  Mat3 C_gamma1 = Mat3::Zero();
  Mat3 C_gamma2 = Mat3::Zero();
  double p_out_max = 6e-4;
  LinkConfig cfg;
  BeamLimits limits;
};

struct OptSolution {
  Beamwidth w1;
  Beamwidth w2;
  double ptx_dbm = 0.0;
  double p_mis = 0.0;
  double p_mis_tx = 0.0;
  double p_mis_rx = 0.0;
  bool feasible = true;
  bool eirp_clipped = false;
};

OptSolution optimize(const OptProblem& prob);

}  // namespace v2vbpc
