// SPDX-License-Identifier: Apache-2.0
//
// Vehicle trajectories: synthetic generation from a segment list, CSV
// ingestion/emission, interpolation and leader/follower pairing.
#pragma once

#include <string>
#include <vector>

#include "v2vbpc/fusion.hpp"
#include "v2vbpc/geometry.hpp"

namespace v2vbpc {

struct TrajectorySample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  EulerAngles euler;
  ImuSample imu;
  bool gps_valid = true;
};

using Trajectory = std::vector<TrajectorySample>;

struct Segment {
  enum class Kind { kStraight, kArc };
  Kind kind = Kind::kStraight;
  double length_m = 0.0;   // straight
  double v_end = 0.0;      // straight, speed reached at its end
  double radius_m = 0.0;   // arc
  double angle_rad = 0.0;  // arc, positive turns left
};

struct TrajectorySpec {
  std::vector<Segment> segments;
  double v0 = 10.0;
  int laps = 1;
  double rate_hz = 1000.0;
  double smoothing_s = 1.0;          // box filter on yaw rate and acceleration
  double tilt_rad_per_mps2 = 0.0087; // body roll/pitch per unit of acceleration
  double heading0 = 0.0;
  double max_yaw_rate = 0.3490658503988659;  // 20 deg/s
  Vec3 origin = Vec3::Zero();
};

/// "S:<length m>:<end speed m/s>" and "A:<radius m>:<angle deg>" items
/// separated by commas, e.g. "S:200:25,A:30:-90".
std::vector<Segment> parse_segments(const std::string& text);
std::string format_segments(const std::vector<Segment>& segments);

/// "milan_like" or "stadium".
TrajectorySpec trajectory_preset(const std::string& name);

Trajectory generate_trajectory(const TrajectorySpec& spec);

/// Header: t,px,py,pz,vx,vy,vz,roll,pitch,yaw,ax,ay,az,wx,wy,wz,gps_valid
Trajectory load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const Trajectory& traj);

struct GpsGap {
  std::size_t first = 0;  // sample indices, inclusive
  std::size_t last = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
};

std::vector<GpsGap> gps_gaps(const Trajectory& traj);

struct VehicleState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quaternion q;
  bool gps_valid = true;
};

/// Linear in position/velocity, spherical-linear in orientation.
VehicleState state_at(const Trajectory& traj, double t);
/// IMU sample linearly interpolated at t.
ImuSample imu_at(const Trajectory& traj, double t);

struct PairedState {
  double t = 0.0;
  VehicleState lead;    // trajectory at t
  VehicleState follow;  // trajectory at t - gap
};

/// Leader/follower on a uniform grid at rate_hz starting gap seconds in.
std::vector<PairedState> pair_vehicles(const Trajectory& traj, double gap, double rate_hz);

}  // namespace v2vbpc
