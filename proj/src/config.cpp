// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "v2vbpc/errors.hpp"

namespace v2vbpc {

namespace pt = boost::property_tree;

namespace {

constexpr double kMsPerS = 1000.0;

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw Error(ErrorKind::kConfig, origin + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorKind::kConfig, key + ": not a number: '" + raw + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::kConfig, key + ": not a non-negative integer: '" + raw + "'");
  return v;
}

int to_int(const std::string& key, const std::string& raw) {
  const std::uint64_t v = to_u64(key, raw);
  if (v > 1000000) throw Error(ErrorKind::kConfig, key + ": out of range");
  return static_cast<int>(v);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest-ish decimal for a value stored in internal units that parses back
// to exactly the same internal value.
std::string fmt_scaled(double internal, const std::function<double(double)>& to_user,
                       const std::function<double(double)>& from_user) {
  double u = to_user(internal);
  for (int i = 0; i < 64; ++i) {
    const std::string s = fmt(u);
    const double back = from_user(std::strtod(s.c_str(), nullptr));
    if (back == internal) return s;
    u = std::nextafter(u, back < internal ? INFINITY : -INFINITY);
  }
  return fmt(to_user(internal));
}

std::string fmt_deg(double rad) { return fmt_scaled(rad, rad2deg, deg2rad); }

std::string fmt_ms(double s) {
  return fmt_scaled(
      s, [](double x) { return x * kMsPerS; }, [](double x) { return x / kMsPerS; });
}

std::string fmt_gamma_obs(const Mat3& C) {
  return fmt_scaled(
      C(0, 0), [](double var) { return rad2deg(std::sqrt(var)); },
      [](double deg) {
        const double r = deg2rad(deg);
        return r * r;
      });
}

std::vector<double> to_deg_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(deg2rad(to_double(key, item)));
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& raw) {
  std::stringstream ss(raw);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) v.push_back(to_double(key, item));
  if (v.size() != 3) throw Error(ErrorKind::kConfig, key + ": expected three comma-separated values");
  return {v[0], v[1], v[2]};
}

std::string fmt_vec3(const Vec3& v) { return fmt(v.x()) + "," + fmt(v.y()) + "," + fmt(v.z()); }

using Setter = std::function<void(AppConfig&, const std::string&)>;

struct KeyTable {
  std::map<std::string, Setter> setters;  // "section.key"
};

double load_gain_constant(const std::string& path);

const KeyTable& keys() {
  static const KeyTable table = [] {
    KeyTable t;
    auto& s = t.setters;
    // [sim]
    s["sim.delta_t_gap_s"] = [](AppConfig& c, const std::string& v) { c.sim.delta_t_gap = to_double("sim.delta_t_gap_s", v); };
    s["sim.latency_ms"] = [](AppConfig& c, const std::string& v) { c.sim.latency_tau = to_double("sim.latency_ms", v) / kMsPerS; };
    s["sim.f_data_hz"] = [](AppConfig& c, const std::string& v) { c.sim.f_data = to_double("sim.f_data_hz", v); };
    s["sim.eval_rate_hz"] = [](AppConfig& c, const std::string& v) { c.sim.eval_rate_hz = to_double("sim.eval_rate_hz", v); };
    s["sim.max_duration_s"] = [](AppConfig& c, const std::string& v) { c.sim.max_duration = to_double("sim.max_duration_s", v); };
    s["sim.sigma_p_m"] = [](AppConfig& c, const std::string& v) { c.sim.sigma_p = to_double("sim.sigma_p_m", v); };
    s["sim.sigma_gamma_deg"] = [](AppConfig& c, const std::string& v) { c.sim.sigma_gamma = deg2rad(to_double("sim.sigma_gamma_deg", v)); };
    s["sim.k"] = [](AppConfig& c, const std::string& v) { c.sim.k = to_double("sim.k", v); };
    s["sim.beam_min_deg"] = [](AppConfig& c, const std::string& v) { c.sim.limits.min_rad = deg2rad(to_double("sim.beam_min_deg", v)); };
    s["sim.beam_max_deg"] = [](AppConfig& c, const std::string& v) { c.sim.limits.max_rad = deg2rad(to_double("sim.beam_max_deg", v)); };
    s["sim.codebook_deg"] = [](AppConfig& c, const std::string& v) { c.sim.codebook = to_deg_list("sim.codebook_deg", v); };
    s["sim.fixed_beam_deg"] = [](AppConfig& c, const std::string& v) { c.sim.fixed_beam = deg2rad(to_double("sim.fixed_beam_deg", v)); };
    s["sim.p_out_max"] = [](AppConfig& c, const std::string& v) { c.sim.p_out_max = to_double("sim.p_out_max", v); };
    s["sim.error_corr_time_s"] = [](AppConfig& c, const std::string& v) { c.sim.error_corr_time = to_double("sim.error_corr_time_s", v); };
    s["sim.gps_rate_hz"] = [](AppConfig& c, const std::string& v) { c.sim.gps_rate_hz = to_double("sim.gps_rate_hz", v); };
    s["sim.mode"] = [](AppConfig& c, const std::string& v) { c.sim.mode = parse_mode(trim(v)); };
    s["sim.fusion_mode"] = [](AppConfig& c, const std::string& v) { c.sim.fusion_mode = parse_fusion_mode(trim(v)); };
    s["sim.seed"] = [](AppConfig& c, const std::string& v) { c.sim.seed = to_u64("sim.seed", v); };
    // [link]
    s["link.f0_hz"] = [](AppConfig& c, const std::string& v) { c.sim.link.f0_hz = to_double("link.f0_hz", v); };
    s["link.bandwidth_hz"] = [](AppConfig& c, const std::string& v) { c.sim.link.bandwidth_hz = to_double("link.bandwidth_hz", v); };
    s["link.noise_power_dbm"] = [](AppConfig& c, const std::string& v) { c.sim.link.noise_power_dbm = to_double("link.noise_power_dbm", v); };
    s["link.eirp_max_dbm"] = [](AppConfig& c, const std::string& v) { c.sim.link.eirp_max_dbm = to_double("link.eirp_max_dbm", v); };
    s["link.gain_constant"] = [](AppConfig& c, const std::string& v) { c.sim.link.gain_constant = to_double("link.gain_constant", v); };
    s["link.snr_min_db"] = [](AppConfig& c, const std::string& v) { c.sim.link.snr_min_db = to_double("link.snr_min_db", v); };
    s["link.power_margin_db"] = [](AppConfig& c, const std::string& v) { c.sim.link.power_margin_db = to_double("link.power_margin_db", v); };
    s["link.calibration_file"] = [](AppConfig& c, const std::string& v) { c.sim.link.gain_constant = load_gain_constant(trim(v)); };
    // [noise]
    s["noise.sigma_a"] = [](AppConfig& c, const std::string& v) { c.sim.noise.sigma_a = to_double("noise.sigma_a", v); };
    s["noise.sigma_omega"] = [](AppConfig& c, const std::string& v) { c.sim.noise.sigma_omega = to_double("noise.sigma_omega", v); };
    s["noise.sigma_gnss"] = [](AppConfig& c, const std::string& v) { c.sim.noise.sigma_gnss = to_double("noise.sigma_gnss", v); };
    s["noise.sigma_v"] = [](AppConfig& c, const std::string& v) { c.sim.noise.sigma_v = to_double("noise.sigma_v", v); };
    s["noise.sigma_gamma_obs_deg"] = [](AppConfig& c, const std::string& v) {
      const double r = deg2rad(to_double("noise.sigma_gamma_obs_deg", v));
      c.sim.noise.C_gamma = Mat3::Identity() * (r * r);
    };
    s["noise.accel_bias"] = [](AppConfig& c, const std::string& v) { c.sim.noise.accel_bias = to_vec3("noise.accel_bias", v); };
    s["noise.gyro_bias"] = [](AppConfig& c, const std::string& v) { c.sim.noise.gyro_bias = to_vec3("noise.gyro_bias", v); };
    s["noise.quat_obs_floor"] = [](AppConfig& c, const std::string& v) { c.sim.noise.quat_obs_floor = to_double("noise.quat_obs_floor", v); };
    // [trajectory]; preset is applied before the other keys
    s["trajectory.preset"] = [](AppConfig& c, const std::string& v) {
      c.preset = trim(v);
      c.trajectory = trajectory_preset(c.preset);
    };
    s["trajectory.segments"] = [](AppConfig& c, const std::string& v) { c.trajectory.segments = parse_segments(trim(v)); };
    s["trajectory.file"] = [](AppConfig& c, const std::string& v) { c.trajectory_file = trim(v); };
    s["trajectory.v0_mps"] = [](AppConfig& c, const std::string& v) { c.trajectory.v0 = to_double("trajectory.v0_mps", v); };
    s["trajectory.laps"] = [](AppConfig& c, const std::string& v) { c.trajectory.laps = to_int("trajectory.laps", v); };
    s["trajectory.rate_hz"] = [](AppConfig& c, const std::string& v) { c.trajectory.rate_hz = to_double("trajectory.rate_hz", v); };
    s["trajectory.smoothing_s"] = [](AppConfig& c, const std::string& v) { c.trajectory.smoothing_s = to_double("trajectory.smoothing_s", v); };
    s["trajectory.tilt_deg_per_mps2"] = [](AppConfig& c, const std::string& v) { c.trajectory.tilt_rad_per_mps2 = deg2rad(to_double("trajectory.tilt_deg_per_mps2", v)); };
    s["trajectory.heading0_deg"] = [](AppConfig& c, const std::string& v) { c.trajectory.heading0 = deg2rad(to_double("trajectory.heading0_deg", v)); };
    s["trajectory.max_yaw_rate_deg_s"] = [](AppConfig& c, const std::string& v) { c.trajectory.max_yaw_rate = deg2rad(to_double("trajectory.max_yaw_rate_deg_s", v)); };
    s["trajectory.origin_m"] = [](AppConfig& c, const std::string& v) { c.trajectory.origin = to_vec3("trajectory.origin_m", v); };
    return t;
  }();
  return table;
}

void set_key(AppConfig& cfg, const std::string& full_key, const std::string& value,
             const std::string& origin) {
  const auto& s = keys().setters;
  const auto it = s.find(full_key);
  if (it == s.end()) fail(origin, "unknown key '" + full_key + "'");
  try {
    it->second(cfg, value);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo || e.kind() == ErrorKind::kConfig) throw;
    fail(origin, full_key + ": " + e.what());
  }
}

double load_gain_constant(const std::string& path) { return load_calibration(path); }

}  // namespace

AppConfig parse_config(std::istream& is, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(origin, e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  static const char* kSections[] = {"sim", "link", "noise", "trajectory"};
  for (const auto& [section, body] : tree) {
    bool known = false;
    for (const char* s : kSections) known = known || section == s;
    if (!known) {
      if (body.empty()) fail(origin, "key outside any section: '" + section + "'");
      fail(origin, "unknown section [" + section + "]");
    }
  }

  AppConfig cfg;
  if (const auto traj = tree.get_child_optional("trajectory")) {
    if (const auto p = traj->get_optional<std::string>("preset"))
      set_key(cfg, "trajectory.preset", *p, origin);
  }
  for (const char* section : kSections) {
    const auto child = tree.get_child_optional(section);
    if (!child) continue;
    for (const auto& [key, node] : *child) {
      if (!node.empty()) fail(origin, std::string("nested key under [") + section + "]");
      const std::string full = std::string(section) + "." + key;
      if (full == "trajectory.preset") continue;
      set_key(cfg, full, node.data(), origin);
    }
  }
  validate(cfg.sim);
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void apply_override(AppConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorKind::kConfig, "override must look like section.key=value: '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  set_key(cfg, key, assignment.substr(eq + 1), "override");
}

std::string serialize_config(const AppConfig& c) {
  std::ostringstream os;
  const SimConfig& s = c.sim;
  os << "[sim]\n";
  os << "delta_t_gap_s = " << fmt(s.delta_t_gap) << "\n";
  os << "latency_ms = " << fmt_ms(s.latency_tau) << "\n";
  os << "f_data_hz = " << fmt(s.f_data) << "\n";
  os << "eval_rate_hz = " << fmt(s.eval_rate_hz) << "\n";
  os << "max_duration_s = " << fmt(s.max_duration) << "\n";
  os << "sigma_p_m = " << fmt(s.sigma_p) << "\n";
  os << "sigma_gamma_deg = " << fmt_deg(s.sigma_gamma) << "\n";
  os << "k = " << fmt(s.k) << "\n";
  os << "beam_min_deg = " << fmt_deg(s.limits.min_rad) << "\n";
  os << "beam_max_deg = " << fmt_deg(s.limits.max_rad) << "\n";
  os << "codebook_deg = ";
  for (std::size_t i = 0; i < s.codebook.size(); ++i) os << (i ? "," : "") << fmt_deg(s.codebook[i]);
  os << "\n";
  os << "fixed_beam_deg = " << fmt_deg(s.fixed_beam) << "\n";
  os << "p_out_max = " << fmt(s.p_out_max) << "\n";
  os << "error_corr_time_s = " << fmt(s.error_corr_time) << "\n";
  os << "gps_rate_hz = " << fmt(s.gps_rate_hz) << "\n";
  os << "mode = " << to_string(s.mode) << "\n";
  os << "fusion_mode = " << to_string(s.fusion_mode) << "\n";
  os << "seed = " << s.seed << "\n";

  const LinkConfig& l = s.link;
  os << "\n[link]\n";
  os << "f0_hz = " << fmt(l.f0_hz) << "\n";
  os << "bandwidth_hz = " << fmt(l.bandwidth_hz) << "\n";
  os << "noise_power_dbm = " << fmt(l.noise_power_dbm) << "\n";
  os << "eirp_max_dbm = " << fmt(l.eirp_max_dbm) << "\n";
  os << "gain_constant = " << fmt(l.gain_constant) << "\n";
  os << "snr_min_db = " << fmt(l.snr_min_db) << "\n";
  os << "power_margin_db = " << fmt(l.power_margin_db) << "\n";

  const NoiseConfig& n = s.noise;
  os << "\n[noise]\n";
  os << "sigma_a = " << fmt(n.sigma_a) << "\n";
  os << "sigma_omega = " << fmt(n.sigma_omega) << "\n";
  os << "sigma_gnss = " << fmt(n.sigma_gnss) << "\n";
  os << "sigma_v = " << fmt(n.sigma_v) << "\n";
  os << "sigma_gamma_obs_deg = " << fmt_gamma_obs(n.C_gamma) << "\n";
  os << "accel_bias = " << fmt_vec3(n.accel_bias) << "\n";
  os << "gyro_bias = " << fmt_vec3(n.gyro_bias) << "\n";
  os << "quat_obs_floor = " << fmt(n.quat_obs_floor) << "\n";

  const TrajectorySpec& t = c.trajectory;
  os << "\n[trajectory]\n";
  os << "preset = " << c.preset << "\n";
  os << "segments = " << format_segments(t.segments) << "\n";
  if (!c.trajectory_file.empty()) os << "file = " << c.trajectory_file << "\n";
  os << "v0_mps = " << fmt(t.v0) << "\n";
  os << "laps = " << t.laps << "\n";
  os << "rate_hz = " << fmt(t.rate_hz) << "\n";
  os << "smoothing_s = " << fmt(t.smoothing_s) << "\n";
  os << "tilt_deg_per_mps2 = " << fmt_deg(t.tilt_rad_per_mps2) << "\n";
  os << "heading0_deg = " << fmt_deg(t.heading0) << "\n";
  os << "max_yaw_rate_deg_s = " << fmt_deg(t.max_yaw_rate) << "\n";
  os << "origin_m = " << fmt_vec3(t.origin) << "\n";
  return os.str();
}

Trajectory build_trajectory(const AppConfig& cfg) {
  if (!cfg.trajectory_file.empty()) return load_trajectory(cfg.trajectory_file);
  return generate_trajectory(cfg.trajectory);
}

double load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open calibration file '" + path + "'");
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfig, path + ": " + e.message());
  }
  const auto v = tree.get_optional<std::string>("calibration.gain_constant");
  if (!v) throw Error(ErrorKind::kConfig, path + ": missing [calibration] gain_constant");
  const double k = to_double("calibration.gain_constant", *v);
  if (!(k > 0.0)) throw Error(ErrorKind::kConfig, path + ": gain_constant must be positive");
  return k;
}

}  // namespace v2vbpc
