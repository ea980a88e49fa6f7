// SPDX-License-Identifier: Apache-2.0
//
// Quaternion EKF fusing IMU (prediction input) with GNSS position, speed and
// an orientation observation. State layout: [p(3) v(3) q(4)], p/v in the
// navigation frame, q = q^{nv}.
#pragma once

#include <utility>

#include <Eigen/Dense>

#include "v2vbpc/geometry.hpp"

namespace v2vbpc {

inline constexpr int kStateDim = 10;
inline constexpr int kNoiseDim = 9;
inline constexpr int kObsDim = 8;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateCov = Eigen::Matrix<double, kStateDim, kStateDim>;
using NoiseVec = Eigen::Matrix<double, kNoiseDim, 1>;
using ObsVec = Eigen::Matrix<double, kObsDim, 1>;
using MatF = StateCov;
using MatG = Eigen::Matrix<double, kStateDim, kNoiseDim>;
using MatH = Eigen::Matrix<double, kObsDim, kStateDim>;

struct FilterState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quaternion q;
  StateCov P = StateCov::Zero();

  StateVec mean() const;
  static FilterState from_mean(const StateVec& x, const StateCov& P);
};

struct ImuSample {
  Vec3 accel = Vec3::Zero();  // specific force, vehicle frame
  Vec3 gyro = Vec3::Zero();   // body rates
  double t = 0.0;
};

struct GpsObservation {
  Vec3 pos = Vec3::Zero();
  double speed = 0.0;
  Quaternion quat_obs;
  double t = 0.0;
  bool has_pos = true;
  bool has_speed = true;
  bool has_quat = true;
};

struct NoiseConfig {
  double sigma_a = 0.05;       // m/s^2
  double sigma_omega = 0.005;  // rad/s
  double sigma_gnss = 0.5;     // m
  double sigma_v = 0.1;        // m/s
  Mat3 C_gamma = Mat3::Identity() * 7.6e-5;  // (0.5 deg)^2 per angle
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 gravity{0.0, 0.0, -9.80665};
  /// Variance added to the quaternion observation covariance; keeps the
  /// innovation covariance invertible along the (unobservable) norm direction.
  double quat_obs_floor = 1e-10;
};

/// Process-noise covariance C_w, 9x9: [w_p; w_v; w_omega].
Eigen::Matrix<double, kNoiseDim, kNoiseDim> process_noise(const NoiseConfig& n);

/// Transition map with explicit noise; w = [w_a into p; w_a into v; w_omega].
StateVec transition(const StateVec& x, const ImuSample& u, double T, const NoiseConfig& n,
                    const NoiseVec& w = NoiseVec::Zero());
/// h(x) = [p; ‖v‖; q].
ObsVec observation(const StateVec& x);

struct Jacobians {
  MatF F;
  MatG G;
  MatH H;
  bool speed_row_valid = true;  // false when ‖v‖ <= 1e-3; row zeroed
};

Jacobians jacobians(const FilterState& s, const ImuSample& u, double T, const NoiseConfig& n);

FilterState predict(const FilterState& s, const ImuSample& u, double T, const NoiseConfig& n);

struct UpdateResult {
  FilterState state;
  bool applied = false;
  bool speed_skipped = false;     // speed available but ‖v‖ too small
  bool singular_skipped = false;  // innovation covariance not invertible
};

UpdateResult update(const FilterState& s, const GpsObservation& z, const NoiseConfig& n);

/// q <- q/‖q‖, P <- J P J^T with J the gradient of the normalization.
FilterState renormalize(const FilterState& s);

/// C_q = (dm/dgamma) C_gamma (dm/dgamma)^T at the Euler angles of q.
Mat4 quat_cov_from_euler_cov(const Quaternion& q, const Mat3& C_gamma);
/// Inverse mapping through the pseudo-inverse of dm/dgamma.
Mat3 euler_cov_from_quat_cov(const Quaternion& q, const Mat4& C_q);

/// Thin stateful wrapper: one predict per IMU sample, update on GNSS.
class Ekf {
 public:
  Ekf(FilterState initial, NoiseConfig noise) : state_(std::move(initial)), noise_(noise) {}

  void predict(const ImuSample& u, double T) { state_ = v2vbpc::predict(state_, u, T, noise_); }
  UpdateResult update(const GpsObservation& z) {
    UpdateResult r = v2vbpc::update(state_, z, noise_);
    state_ = r.state;
    return r;
  }

  const FilterState& state() const { return state_; }
  const NoiseConfig& noise() const { return noise_; }

 private:
  FilterState state_;
  NoiseConfig noise_;
};

/// Throws kNumericalFailure when P is not finite, not symmetric or has an
/// eigenvalue below -tol.
void require_psd(const Eigen::MatrixXd& P, double tol, const char* what);

}  // namespace v2vbpc
