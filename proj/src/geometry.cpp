// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "v2vbpc/errors.hpp"

namespace v2vbpc {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

}  // namespace

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = axis.normalized();
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  const Vec3 av = a.vec();
  const Vec3 bv = b.vec();
  const Vec3 v = a.w() * bv + b.w() * av + av.cross(bv);
  return {a.w() * b.w() - av.dot(bv), v.x(), v.y(), v.z()};
}

void require_unit(const Quaternion& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitTolerance) {
    throw Error(ErrorKind::kInvalidOrientation,
                "quaternion norm " + std::to_string(n) + " is not unit");
  }
}

Mat3 rotation_matrix_unchecked(const Quaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 r;
  r << w * w + x * x - y * y - z * z, 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), w * w - x * x + y * y - z * z, 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), w * w - x * x - y * y + z * z;
  return r;
}

Mat3 rotation_matrix(const Quaternion& q) {
  require_unit(q);
  return rotation_matrix_unchecked(q);
}

// R{q} a = (w^2 - v.v) a + 2 (v.a) v + 2 w (v x a)
Mat34 rotation_gradient(const Quaternion& q, const Vec3& a) {
  const double w = q.w();
  const Vec3 v = q.vec();
  Mat34 g;
  g.col(0) = 2.0 * (w * a + v.cross(a));
  g.rightCols<3>() = 2.0 * (v.dot(a) * Mat3::Identity() + v * a.transpose() -
                            a * v.transpose() - w * skew(a));
  return g;
}

Vec3 quat_rotate(const Quaternion& q, const Vec3& u) {
  require_unit(q);
  return (q * Quaternion::pure(u) * q.conjugate()).vec();
}

Vec3 relative_position(const Vec3& p1, const Vec3& p2, const Quaternion& q1) {
  require_unit(q1);
  return rotation_matrix_unchecked(q1).transpose() * (p2 - p1);
}

LosAngles los_angles(const Vec3& dp) {
  const double r = dp.norm();
  if (!(r > kMinDistance)) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "displacement norm " + std::to_string(r) + " m too small for pointing");
  }
  return {std::atan2(dp.y(), dp.x()), std::asin(std::clamp(dp.z() / r, -1.0, 1.0))};
}

Vec3 los_direction(const LosAngles& a) {
  const double ce = std::cos(a.elevation);
  return {ce * std::cos(a.azimuth), ce * std::sin(a.azimuth), std::sin(a.elevation)};
}

RowVec3 azimuth_gradient(const Vec3& dp) {
  const double h2 = dp.x() * dp.x() + dp.y() * dp.y();
  if (!(h2 > kMinDistance * kMinDistance)) {
    throw Error(ErrorKind::kDegenerateGeometry, "azimuth undefined on the vertical axis");
  }
  return {-dp.y() / h2, dp.x() / h2, 0.0};
}

RowVec3 elevation_gradient(const Vec3& dp) {
  const double h2 = dp.x() * dp.x() + dp.y() * dp.y();
  const double h = std::sqrt(h2);
  const double r2 = h2 + dp.z() * dp.z();
  if (!(h > kMinDistance)) {
    throw Error(ErrorKind::kDegenerateGeometry, "elevation gradient undefined on the vertical axis");
  }
  return {-dp.x() * dp.z() / (r2 * h), -dp.y() * dp.z() / (r2 * h), h / r2};
}

Mat3 los_frame_rotation(const LosAngles& los) {
  const double ca = std::cos(los.azimuth), sa = std::sin(los.azimuth);
  const double ce = std::cos(los.elevation), se = std::sin(los.elevation);
  Mat3 r;
  r << sa, -ca, 0.0,
       ce * ca, ce * sa, se,
       -se * ca, -se * sa, ce;
  return r;
}

Quaternion quat_exp(const Vec3& v) {
  const double th = v.norm();
  if (!std::isfinite(th)) {
    throw Error(ErrorKind::kInvalidArgument, "quat_exp of non-finite vector");
  }
  if (th < 1e-12) {
    return {1.0, v.x(), v.y(), v.z()};
  }
  const double s = std::sin(th) / th;
  return {std::cos(th), s * v.x(), s * v.y(), s * v.z()};
}

Mat43 quat_exp_jacobian(const Vec3& v) {
  const double th = v.norm();
  const double th2 = th * th;
  double sinc = 0.0;   // sin(th)/th
  double dsinc = 0.0;  // (th cos th - sin th)/th^3
  if (th < 1e-4) {
    sinc = 1.0 - th2 / 6.0;
    dsinc = -1.0 / 3.0 + th2 / 30.0;
  } else {
    sinc = std::sin(th) / th;
    dsinc = (th * std::cos(th) - std::sin(th)) / (th2 * th);
  }
  Mat43 j;
  j.row(0) = -sinc * v.transpose();
  j.bottomRows<3>() = sinc * Mat3::Identity() + dsinc * v * v.transpose();
  return j;
}

Mat4 quat_left(const Quaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat4 m;
  m << w, -x, -y, -z,
       x, w, -z, y,
       y, z, w, -x,
       z, -y, x, w;
  return m;
}

Mat4 quat_right(const Quaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat4 m;
  m << w, -x, -y, -z,
       x, w, z, -y,
       y, -z, w, x,
       z, y, -x, w;
  return m;
}

namespace {

struct HalfAngles {
  double cr, sr, cp, sp, cy, sy;
};

HalfAngles half_angles(const EulerAngles& e) {
  return {std::cos(0.5 * e.roll), std::sin(0.5 * e.roll), std::cos(0.5 * e.pitch),
          std::sin(0.5 * e.pitch), std::cos(0.5 * e.yaw), std::sin(0.5 * e.yaw)};
}

}  // namespace

Quaternion euler_to_quat(const EulerAngles& e) {
  if (!std::isfinite(e.roll) || !std::isfinite(e.pitch) || !std::isfinite(e.yaw)) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite Euler angles");
  }
  const Quaternion qz(std::cos(0.5 * e.yaw), 0.0, 0.0, std::sin(0.5 * e.yaw));
  const Quaternion qy(std::cos(0.5 * e.pitch), 0.0, std::sin(0.5 * e.pitch), 0.0);
  const Quaternion qx(std::cos(0.5 * e.roll), std::sin(0.5 * e.roll), 0.0, 0.0);
  return qz * qy * qx;
}

Mat43 euler_to_quat_jacobian(const EulerAngles& e) {
  const HalfAngles h = half_angles(e);
  const Quaternion qz(h.cy, 0.0, 0.0, h.sy);
  const Quaternion qy(h.cp, 0.0, h.sp, 0.0);
  const Quaternion qx(h.cr, h.sr, 0.0, 0.0);
  const Quaternion dqz(-0.5 * h.sy, 0.0, 0.0, 0.5 * h.cy);
  const Quaternion dqy(-0.5 * h.sp, 0.0, 0.5 * h.cp, 0.0);
  const Quaternion dqx(-0.5 * h.sr, 0.5 * h.cr, 0.0, 0.0);
  Mat43 j;
  j.col(0) = (qz * qy * dqx).coeffs();
  j.col(1) = (qz * dqy * qx).coeffs();
  j.col(2) = (dqz * qy * qx).coeffs();
  return j;
}

EulerResult quat_to_euler(const Quaternion& q) {
  require_unit(q);
  const Quaternion u = q.normalized();
  const double w = u.w(), x = u.x(), y = u.y(), z = u.z();
  const double sp = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  EulerResult out;
  // |pitch| within 1e-6 rad of pi/2
  if (std::abs(sp) >= std::cos(1e-6)) {
    out.gimbal_lock = true;
    out.angles.pitch = std::copysign(std::numbers::pi / 2.0, sp);
    out.angles.roll = wrap_angle(2.0 * std::atan2(x, w));
    out.angles.yaw = 0.0;
    return out;
  }
  out.angles.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  out.angles.pitch = std::asin(sp);
  out.angles.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return out;
}

Quaternion slerp(const Quaternion& a, const Quaternion& b, double t) {
  Vec4 bc = b.coeffs();
  double d = a.coeffs().dot(bc);
  if (d < 0.0) {
    bc = -bc;
    d = -d;
  }
  if (d > 1.0 - 1e-12) {
    return Quaternion(((1.0 - t) * a.coeffs() + t * bc).normalized());
  }
  const double th = std::acos(std::min(d, 1.0));
  const double s = std::sin(th);
  return Quaternion(((std::sin((1.0 - t) * th) / s) * a.coeffs() + (std::sin(t * th) / s) * bc)
                        .normalized());
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

}  // namespace v2vbpc
