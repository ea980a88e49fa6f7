// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "v2vbpc/channel.hpp"
#include "v2vbpc/errors.hpp"

namespace v2vbpc {

namespace {

constexpr const char* kCsvHeader =
    "t,px,py,pz,vx,vy,vz,roll,pitch,yaw,ax,ay,az,wx,wy,wz,gps_valid";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

// Centered moving average; samples outside the signal count as zero.
std::vector<double> box_filter(const std::vector<double>& x, int half) {
  if (half <= 0) return x;
  const int n = static_cast<int>(x.size());
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> y(n);
  const double w = 2.0 * half + 1.0;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n, i + half + 1);
    y[i] = (prefix[hi] - prefix[lo]) / w;
  }
  return y;
}

Vec3 body_rates(const EulerAngles& e, const Vec3& euler_rate) {
  const double sr = std::sin(e.roll), cr = std::cos(e.roll);
  const double sp = std::sin(e.pitch), cp = std::cos(e.pitch);
  const double dr = euler_rate[0], dp = euler_rate[1], dy = euler_rate[2];
  return {dr - dy * sp, dp * cr + dy * sr * cp, -dp * sr + dy * cr * cp};
}

}  // namespace

std::vector<Segment> parse_segments(const std::string& text) {
  std::vector<Segment> out;
  for (const std::string& raw : split(text, ',')) {
    const std::string item = trim(raw);
    const std::vector<std::string> f = split(item, ':');
    double a = 0.0, b = 0.0;
    if (f.size() != 3 || !parse_double(f[1], a) || !parse_double(f[2], b)) {
      throw Error(ErrorKind::kInvalidArgument, "malformed segment '" + item + "'");
    }
    Segment s;
    const std::string kind = trim(f[0]);
    if (kind == "S" || kind == "s") {
      s.kind = Segment::Kind::kStraight;
      s.length_m = a;
      s.v_end = b;
    } else if (kind == "A" || kind == "a") {
      s.kind = Segment::Kind::kArc;
      s.radius_m = a;
      s.angle_rad = deg2rad(b);
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown segment kind '" + kind + "'");
    }
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidArgument, "empty segment list");
  return out;
}

std::string format_segments(const std::vector<Segment>& segments) {
  std::string out;
  char buf[96];
  for (const Segment& s : segments) {
    if (!out.empty()) out += ',';
    if (s.kind == Segment::Kind::kStraight) {
      std::snprintf(buf, sizeof buf, "S:%.17g:%.17g", s.length_m, s.v_end);
    } else {
      std::snprintf(buf, sizeof buf, "A:%.17g:%.17g", s.radius_m, rad2deg(s.angle_rad));
    }
    out += buf;
  }
  return out;
}

TrajectorySpec trajectory_preset(const std::string& name) {
  TrajectorySpec spec;
  if (name == "milan_like") {
    // Urban loop: fast straights, roundabouts and sharp corners, 2-27 m/s.
    spec.v0 = 2.0;
    spec.laps = 1;
    spec.segments = parse_segments(
        "S:20:2,S:150:14,A:45:-60,S:350:27,S:400:27,S:250:6,A:20:270,S:100:15,A:50:90,"
        "S:300:25,A:80:-45,S:200:25,S:200:4,A:12:-90,S:60:2,S:40:2,A:6:180,S:150:20,"
        "A:60:-90,S:300:20,S:100:2");
  } else if (name == "stadium") {
    spec.v0 = 10.0;
    spec.segments = parse_segments("S:100:10,A:50:180,S:200:10,A:50:180,S:100:10");
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown trajectory preset '" + name + "'");
  }
  return spec;
}

Trajectory generate_trajectory(const TrajectorySpec& spec) {
  if (!(spec.rate_hz > 0.0) || spec.laps < 1 || spec.segments.empty() || !(spec.v0 >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid trajectory spec");
  }
  const double dt = 1.0 / spec.rate_hz;

  struct Piece {
    double duration, accel, yaw_rate;
  };
  std::vector<Piece> pieces;
  double v = spec.v0;
  for (int lap = 0; lap < spec.laps; ++lap) {
    for (const Segment& s : spec.segments) {
      if (s.kind == Segment::Kind::kStraight) {
        if (!(s.length_m > 0.0) || !(s.v_end >= 0.0) || !(v + s.v_end > 0.0)) {
          throw Error(ErrorKind::kInvalidArgument, "straight segment needs length > 0 and motion");
        }
        pieces.push_back({2.0 * s.length_m / (v + s.v_end),
                          (s.v_end * s.v_end - v * v) / (2.0 * s.length_m), 0.0});
        v = s.v_end;
      } else {
        if (!(s.radius_m > 0.0) || s.angle_rad == 0.0) {
          throw Error(ErrorKind::kInvalidArgument, "arc segment needs radius > 0 and a turn angle");
        }
        if (!(v > 0.0)) throw Error(ErrorKind::kInvalidArgument, "arc entered at zero speed");
        const double rate = std::copysign(v / s.radius_m, s.angle_rad);
        if (std::abs(rate) > spec.max_yaw_rate * (1.0 + 1e-9)) {
          throw Error(ErrorKind::kInvalidArgument,
                      "arc of radius " + std::to_string(s.radius_m) + " m at " + std::to_string(v) +
                          " m/s exceeds the yaw-rate limit");
        }
        pieces.push_back({std::abs(s.angle_rad) * s.radius_m / v, 0.0, rate});
      }
    }
  }

  double total = 0.0;
  for (const Piece& p : pieces) total += p.duration;
  const auto n = static_cast<std::size_t>(std::llround(total / dt));
  // Commands on interval midpoints.
  std::vector<double> acc(n), yaw_rate(n);
  std::size_t k = 0;
  double t_end = pieces[0].duration;
  for (std::size_t i = 0; i < n; ++i) {
    const double tm = (static_cast<double>(i) + 0.5) * dt;
    while (tm > t_end && k + 1 < pieces.size()) t_end += pieces[++k].duration;
    acc[i] = pieces[k].accel;
    yaw_rate[i] = pieces[k].yaw_rate;
  }
  const int half = static_cast<int>(std::llround(0.5 * spec.smoothing_s / dt));
  acc = box_filter(acc, half);
  yaw_rate = box_filter(yaw_rate, half);

  // Integrate speed, heading and position over the intervals.
  std::vector<double> speed(n + 1), heading(n + 1);
  std::vector<Vec3> pos(n + 1);
  speed[0] = spec.v0;
  heading[0] = spec.heading0;
  pos[0] = spec.origin;
  for (std::size_t i = 0; i < n; ++i) {
    speed[i + 1] = speed[i] + acc[i] * dt;
    if (speed[i + 1] < -1e-9) throw Error(ErrorKind::kInvalidArgument, "speed profile turns negative");
    speed[i + 1] = std::max(0.0, speed[i + 1]);
    heading[i + 1] = heading[i] + yaw_rate[i] * dt;
    const double vm = 0.5 * (speed[i] + speed[i + 1]);
    const double hm = 0.5 * (heading[i] + heading[i + 1]);
    pos[i + 1] = pos[i] + dt * vm * Vec3(std::cos(hm), std::sin(hm), 0.0);
  }

  auto at_node = [&](const std::vector<double>& mid, std::size_t i) {
    if (i == 0) return mid.front();
    if (i == n) return mid.back();
    return 0.5 * (mid[i - 1] + mid[i]);
  };

  std::vector<EulerAngles> euler(n + 1);
  std::vector<double> a_long(n + 1), rate(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    a_long[i] = at_node(acc, i);
    rate[i] = at_node(yaw_rate, i);
    const double a_lat = speed[i] * rate[i];
    euler[i].roll = spec.tilt_rad_per_mps2 * a_lat;
    euler[i].pitch = -spec.tilt_rad_per_mps2 * a_long[i];
    euler[i].yaw = wrap_angle(heading[i]);
  }

  const Vec3 gravity(0.0, 0.0, -9.80665);
  Trajectory traj(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    TrajectorySample& s = traj[i];
    s.t = static_cast<double>(i) * dt;
    const double c = std::cos(heading[i]), sn = std::sin(heading[i]);
    s.p = pos[i];
    s.v = speed[i] * Vec3(c, sn, 0.0);
    s.euler = euler[i];
    const std::size_t ip = std::min(i + 1, n);
    const std::size_t im = i == 0 ? 0 : i - 1;
    const double span = static_cast<double>(ip - im) * dt;
    const Vec3 euler_rate((euler[ip].roll - euler[im].roll) / span,
                          (euler[ip].pitch - euler[im].pitch) / span, rate[i]);
    const Vec3 a_nav = a_long[i] * Vec3(c, sn, 0.0) + speed[i] * rate[i] * Vec3(-sn, c, 0.0);
    const Quaternion q = euler_to_quat(euler[i]);
    s.imu.t = s.t;
    s.imu.accel = rotation_matrix(q).transpose() * (a_nav - gravity);
    s.imu.gyro = body_rates(euler[i], euler_rate);
  }
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write trajectory file " + path);
  os << kCsvHeader << '\n';
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (const TrajectorySample& s : traj) {
    const double row[16] = {s.t,          s.p.x(),        s.p.y(),        s.p.z(),
                            s.v.x(),      s.v.y(),        s.v.z(),        s.euler.roll,
                            s.euler.pitch, s.euler.yaw,   s.imu.accel.x(), s.imu.accel.y(),
                            s.imu.accel.z(), s.imu.gyro.x(), s.imu.gyro.y(), s.imu.gyro.z()};
    for (double x : row) {
      put(x);
      os << ',';
    }
    os << (s.gps_valid ? 1 : 0) << '\n';
  }
  if (!os) throw Error(ErrorKind::kIo, "failed writing trajectory file " + path);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open trajectory file " + path);
  std::string line;
  if (!std::getline(is, line) || trim(line).empty()) {
    throw Error(ErrorKind::kInvalidArgument, path + ": empty trajectory input");
  }
  if (trim(line) != kCsvHeader) {
    throw Error(ErrorKind::kInvalidArgument,
                path + ":1: unexpected header, want " + std::string(kCsvHeader));
  }
  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(trim(line), ',');
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::kInvalidArgument, path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != 17) fail("expected 17 fields, got " + std::to_string(f.size()));
    double x[16];
    for (int i = 0; i < 16; ++i) {
      if (!parse_double(f[i], x[i])) fail("bad number '" + f[i] + "' in column " + std::to_string(i + 1));
    }
    const std::string g = trim(f[16]);
    if (g != "0" && g != "1") fail("gps_valid must be 0 or 1");
    TrajectorySample s;
    s.t = x[0];
    s.p = {x[1], x[2], x[3]};
    s.v = {x[4], x[5], x[6]};
    s.euler = {x[7], x[8], x[9]};
    s.imu.accel = {x[10], x[11], x[12]};
    s.imu.gyro = {x[13], x[14], x[15]};
    s.imu.t = s.t;
    s.gps_valid = g == "1";
    if (!traj.empty() && !(s.t > traj.back().t)) fail("timestamps not strictly increasing");
    traj.push_back(s);
  }
  if (traj.empty()) throw Error(ErrorKind::kInvalidArgument, path + ": empty trajectory input");
  return traj;
}

std::vector<GpsGap> gps_gaps(const Trajectory& traj) {
  std::vector<GpsGap> gaps;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj[i].gps_valid) continue;
    if (!gaps.empty() && gaps.back().last + 1 == i) {
      gaps.back().last = i;
      gaps.back().t_end = traj[i].t;
    } else {
      gaps.push_back({i, i, traj[i].t, traj[i].t});
    }
  }
  return gaps;
}

VehicleState state_at(const Trajectory& traj, double t) {
  if (traj.empty()) throw Error(ErrorKind::kInvalidArgument, "empty trajectory");
  if (t < traj.front().t - 1e-9 || t > traj.back().t + 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "time " + std::to_string(t) + " outside trajectory");
  }
  auto it = std::upper_bound(traj.begin(), traj.end(), t,
                             [](double x, const TrajectorySample& s) { return x < s.t; });
  const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - traj.begin()), 1,
                                                traj.size() - 1);
  VehicleState out;
  out.t = t;
  if (traj.size() == 1) {
    out.p = traj[0].p;
    out.v = traj[0].v;
    out.q = euler_to_quat(traj[0].euler);
    out.gps_valid = traj[0].gps_valid;
    return out;
  }
  const TrajectorySample& a = traj[j - 1];
  const TrajectorySample& b = traj[j];
  const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
  out.p = (1.0 - u) * a.p + u * b.p;
  out.v = (1.0 - u) * a.v + u * b.v;
  out.q = slerp(euler_to_quat(a.euler), euler_to_quat(b.euler), u);
  out.gps_valid = u < 0.5 ? a.gps_valid : b.gps_valid;
  return out;
}

ImuSample imu_at(const Trajectory& traj, double t) {
  if (traj.empty()) throw Error(ErrorKind::kInvalidArgument, "empty trajectory");
  auto it = std::upper_bound(traj.begin(), traj.end(), t,
                             [](double x, const TrajectorySample& s) { return x < s.t; });
  ImuSample out;
  out.t = t;
  if (it == traj.begin() || traj.size() == 1) {
    out.accel = traj.front().imu.accel;
    out.gyro = traj.front().imu.gyro;
    return out;
  }
  if (it == traj.end()) {
    out.accel = traj.back().imu.accel;
    out.gyro = traj.back().imu.gyro;
    return out;
  }
  const TrajectorySample& a = *(it - 1);
  const TrajectorySample& b = *it;
  const double u = (t - a.t) / (b.t - a.t);
  out.accel = (1.0 - u) * a.imu.accel + u * b.imu.accel;
  out.gyro = (1.0 - u) * a.imu.gyro + u * b.imu.gyro;
  return out;
}

std::vector<PairedState> pair_vehicles(const Trajectory& traj, double gap, double rate_hz) {
  if (traj.empty()) throw Error(ErrorKind::kInvalidArgument, "empty trajectory");
  if (!(gap > 0.0)) {
    throw Error(ErrorKind::kDegenerateGeometry, "time gap must be positive (vehicles would coincide)");
  }
  if (!(rate_hz > 0.0)) throw Error(ErrorKind::kInvalidArgument, "pairing rate must be positive");
  const double t0 = traj.front().t;
  const double t1 = traj.back().t;
  if (gap >= t1 - t0) {
    throw Error(ErrorKind::kInvalidArgument, "time gap exceeds trajectory duration");
  }
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0 - gap) * rate_hz + 1e-9)) + 1;
  std::vector<PairedState> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = std::min(t1, t0 + gap + static_cast<double>(k) / rate_hz);
    out.push_back({t, state_at(traj, t), state_at(traj, t - gap)});
  }
  return out;
}

}  // namespace v2vbpc
