// SPDX-License-Identifier: Apache-2.0
//
// Reference frames and quaternion algebra.
//
// Conventions used throughout the library:
//   navigation frame  ENU (x east, y north, z up)
//   vehicle frame     x forward, y left, z up, origin at the transceiver
//   quaternions       scalar first, Hamilton product, q^{nv} maps vehicle
//                     coordinates into navigation coordinates
//   Euler angles      intrinsic Z-Y-X (yaw, then pitch, then roll)
#pragma once

#include <Eigen/Dense>

namespace v2vbpc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat2 = Eigen::Matrix2d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat43 = Eigen::Matrix<double, 4, 3>;
using RowVec3 = Eigen::RowVector3d;

/// Norm deviation above which a quaternion is not accepted as an orientation.
inline constexpr double kUnitTolerance = 1e-6;
/// Displacements shorter than this have no defined pointing direction.
inline constexpr double kMinDistance = 1e-3;

class Quaternion {
 public:
  Quaternion() : c_(1.0, 0.0, 0.0, 0.0) {}
  Quaternion(double q0, double q1, double q2, double q3) : c_(q0, q1, q2, q3) {}
  explicit Quaternion(const Vec4& c) : c_(c) {}

  static Quaternion identity() { return {}; }
  /// Pure quaternion [0, u].
  static Quaternion pure(const Vec3& u) { return {0.0, u.x(), u.y(), u.z()}; }
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  double w() const { return c_[0]; }
  double x() const { return c_[1]; }
  double y() const { return c_[2]; }
  double z() const { return c_[3]; }
  double operator[](int i) const { return c_[i]; }

  const Vec4& coeffs() const { return c_; }
  Vec3 vec() const { return c_.tail<3>(); }

  double norm() const { return c_.norm(); }
  Quaternion conjugate() const { return {c_[0], -c_[1], -c_[2], -c_[3]}; }
  Quaternion normalized() const { return Quaternion(c_ / c_.norm()); }
  Quaternion operator-() const { return Quaternion(-c_); }

  /// Hamilton product.
  friend Quaternion operator*(const Quaternion& a, const Quaternion& b);

 private:
  Vec4 c_;
};

struct EulerAngles {
  double roll = 0.0;   // about vehicle x
  double pitch = 0.0;  // about vehicle y
  double yaw = 0.0;    // heading, about z
};

struct EulerResult {
  EulerAngles angles;
  bool gimbal_lock = false;  // yaw forced to 0 when set
};

struct LosAngles {
  double azimuth = 0.0;    // (-pi, pi]
  double elevation = 0.0;  // [-pi/2, pi/2]
};

/// Throws kInvalidOrientation when |‖q‖ - 1| > kUnitTolerance.
void require_unit(const Quaternion& q);

/// Rotation matrix of a unit quaternion, R{q} u = vec(q ⊙ [0,u] ⊙ q*).
Mat3 rotation_matrix(const Quaternion& q);
/// Same quadratic form without the unit-norm check; used for gradients.
Mat3 rotation_matrix_unchecked(const Quaternion& q);
/// d(R{q} a)/dq of the quadratic form above, 3x4.
Mat34 rotation_gradient(const Quaternion& q, const Vec3& a);

Vec3 quat_rotate(const Quaternion& q, const Vec3& u);

/// Displacement p2 - p1 expressed in the frame of the vehicle with
/// orientation q1 = q^{n v1}.
Vec3 relative_position(const Vec3& p1, const Vec3& p2, const Quaternion& q1);

LosAngles los_angles(const Vec3& dp);
/// Unit vector with the given azimuth and elevation.
Vec3 los_direction(const LosAngles& a);
RowVec3 azimuth_gradient(const Vec3& dp);
RowVec3 elevation_gradient(const Vec3& dp);

/// Rotation from a vehicle frame into the LOS-aligned frame whose y axis
/// points along `los`, x is the horizontal transverse axis and z the
/// vertical transverse axis.
Mat3 los_frame_rotation(const LosAngles& los);

Quaternion quat_exp(const Vec3& v);
/// d exp_q(v) / dv, 4x3.
Mat43 quat_exp_jacobian(const Vec3& v);
/// quat_left(a) * b == a ⊙ b.
Mat4 quat_left(const Quaternion& q);
/// quat_right(b) * a == a ⊙ b.
Mat4 quat_right(const Quaternion& q);

Quaternion euler_to_quat(const EulerAngles& e);
EulerResult quat_to_euler(const Quaternion& q);
/// d euler_to_quat / d(roll, pitch, yaw), 4x3.
Mat43 euler_to_quat_jacobian(const EulerAngles& e);

Quaternion slerp(const Quaternion& a, const Quaternion& b, double t);

/// Wraps to (-pi, pi].
double wrap_angle(double a);

inline Vec3 to_vec3(const EulerAngles& e) { return {e.roll, e.pitch, e.yaw}; }
inline EulerAngles to_euler(const Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace v2vbpc
