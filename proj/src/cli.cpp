// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "v2vbpc/channel.hpp"
#include "v2vbpc/config.hpp"
#include "v2vbpc/errors.hpp"
#include "v2vbpc/sim.hpp"

namespace v2vbpc {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string fusion_mode;
  std::string trajectory_file;
  std::string preset;
  std::string scenario;
  std::optional<double> fixed_beam_deg;
  std::optional<double> latency_ms;
  std::optional<double> f_data_hz;
  std::optional<double> sigma_p_m;
  std::optional<double> sigma_gamma_deg;
  std::optional<double> k;
  std::optional<double> max_duration_s;
  std::vector<std::string> sets;
};

std::string default_out_dir() {
  const char* env = std::getenv("V2VBPC_OUT_DIR");
  return (env && *env) ? env : "out";
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "INI configuration file");
  cmd->add_option("--out-dir", o.out_dir, "output directory (default $V2VBPC_OUT_DIR or ./out)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--mode", o.mode, "heuristic | fixed | optimizer");
  cmd->add_option("--fusion-mode", o.fusion_mode, "sampled | full_ekf");
  cmd->add_option("--trajectory", o.trajectory_file, "trajectory CSV instead of the generator");
  cmd->add_option("--preset", o.preset, "generator preset: milan_like | stadium");
  cmd->add_option("--scenario", o.scenario, "S1 (1.5 m, 1.5 deg) | S2 (0.15 m, 0.15 deg)");
  cmd->add_option("--fixed-beam-deg", o.fixed_beam_deg, "beamwidth for --mode fixed");
  cmd->add_option("--latency-ms", o.latency_ms, "control-link latency");
  cmd->add_option("--f-data", o.f_data_hz, "estimate rate in Hz");
  cmd->add_option("--sigma-p", o.sigma_p_m, "position error, m");
  cmd->add_option("--sigma-gamma-deg", o.sigma_gamma_deg, "orientation error, deg");
  cmd->add_option("--k", o.k, "beamwidth scaling factor");
  cmd->add_option("--max-duration", o.max_duration_s, "evaluated seconds, 0 = all");
  cmd->add_option("--set", o.sets, "section.key=value override, repeatable");
}

AppConfig resolve(const CommonOptions& o) {
  AppConfig cfg = o.config_path.empty() ? AppConfig{} : load_config(o.config_path);
  if (!o.scenario.empty()) {
    if (o.scenario == "S1" || o.scenario == "s1") {
      cfg.sim.sigma_p = 1.5;
      cfg.sim.sigma_gamma = deg2rad(1.5);
    } else if (o.scenario == "S2" || o.scenario == "s2") {
      cfg.sim.sigma_p = 0.15;
      cfg.sim.sigma_gamma = deg2rad(0.15);
    } else {
      throw Error(ErrorKind::kConfig, "unknown scenario '" + o.scenario + "' (S1 | S2)");
    }
  }
  for (const auto& s : o.sets) apply_override(cfg, s);
  if (!o.preset.empty()) apply_override(cfg, "trajectory.preset=" + o.preset);
  if (!o.trajectory_file.empty()) cfg.trajectory_file = o.trajectory_file;
  if (o.seed) cfg.sim.seed = *o.seed;
  if (!o.mode.empty()) cfg.sim.mode = parse_mode(o.mode);
  if (!o.fusion_mode.empty()) cfg.sim.fusion_mode = parse_fusion_mode(o.fusion_mode);
  if (o.fixed_beam_deg) cfg.sim.fixed_beam = deg2rad(*o.fixed_beam_deg);
  if (o.latency_ms) cfg.sim.latency_tau = *o.latency_ms / 1000.0;
  if (o.f_data_hz) cfg.sim.f_data = *o.f_data_hz;
  if (o.sigma_p_m) cfg.sim.sigma_p = *o.sigma_p_m;
  if (o.sigma_gamma_deg) cfg.sim.sigma_gamma = deg2rad(*o.sigma_gamma_deg);
  if (o.k) cfg.sim.k = *o.k;
  if (o.max_duration_s) cfg.sim.max_duration = *o.max_duration_s;
  validate(cfg.sim);
  return cfg;
}

std::string out_dir_of(const CommonOptions& o) { return o.out_dir.empty() ? default_out_dir() : o.out_dir; }

// All files are rendered first so a failure leaves nothing behind.
void write_outputs(const std::string& dir, const std::map<std::string, std::string>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& [name, body] : files) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int cmd_run(const CommonOptions& o, std::ostream& out) {
  const AppConfig cfg = resolve(o);
  const Trajectory traj = build_trajectory(cfg);
  const RunResult r = run(cfg.sim, traj);

  std::ostringstream results, summary, cdf;
  write_results_csv(results, r.records);
  write_summary(summary, r.summary, cfg.sim);
  write_cdf_csv(cdf, r.summary);
  const std::string dir = out_dir_of(o);
  write_outputs(dir, {{"results.csv", results.str()},
                      {"summary.txt", summary.str()},
                      {"cdf.csv", cdf.str()},
                      {"config.ini", serialize_config(cfg)}});
  out << summary.str();
  out << "wrote " << dir << "/{results.csv,summary.txt,cdf.csv,config.ini}\n";
  return kExitOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    char* end = nullptr;
    const double x = std::strtod(item.c_str() + b, &end);
    if (end == item.c_str() + b || !std::isfinite(x))
      throw Error(ErrorKind::kConfig, "bad sweep value '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw Error(ErrorKind::kConfig, "sweep needs at least one value");
  return v;
}

void set_axis(SimConfig& s, const std::string& axis, double value) {
  if (axis == "tau") s.latency_tau = value / 1000.0;
  else if (axis == "f_data") s.f_data = value;
  else if (axis == "sigma_p") s.sigma_p = value;
  else if (axis == "sigma_gamma") s.sigma_gamma = deg2rad(value);
  else if (axis == "k") s.k = value;
  else throw Error(ErrorKind::kConfig, "unknown sweep axis '" + axis + "'");
}

int cmd_sweep(const CommonOptions& o, const std::string& axis, const std::string& values_text,
              std::ostream& out) {
  const std::vector<double> values = parse_values(values_text);
  const AppConfig base = resolve(o);
  const Trajectory traj = build_trajectory(base);

  std::vector<Summary> summaries;
  for (double v : values) {
    SimConfig s = base.sim;
    set_axis(s, axis, v);
    validate(s);
    summaries.push_back(run(s, traj).summary);
    out << axis << " = " << fmt(v) << ": outage " << fmt(summaries.back().outage_rate)
        << ", median ptx " << fmt(summaries.back().ptx_median_dbm) << " dBm\n";
  }

  std::ostringstream table;
  table << "axis,value,steps,outage_rate,outage_steps,ptx_mean_dbm,ptx_median_dbm,"
           "beam_min_deg,beam_max_deg,beam_mean_deg,sigma_p_m,sigma_gamma_deg,"
           "eirp_clipped_steps,infeasible_steps\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Summary& s = summaries[i];
    table << axis << ',' << fmt(values[i]) << ',' << s.steps << ',' << fmt(s.outage_rate) << ','
          << s.outage_steps << ',' << fmt(s.ptx_mean_dbm) << ',' << fmt(s.ptx_median_dbm) << ','
          << fmt(rad2deg(s.beam_min)) << ',' << fmt(rad2deg(s.beam_max)) << ','
          << fmt(rad2deg(s.beam_mean)) << ',' << fmt(s.sigma_p) << ','
          << fmt(rad2deg(s.sigma_gamma)) << ',' << s.eirp_clipped_steps << ','
          << s.infeasible_steps << '\n';
  }

  // Union of the per-run 0.1 dB grids; each column is 0 below and 1 above its own range.
  long lo = 0, hi = 0;
  bool first = true;
  for (const Summary& s : summaries) {
    if (s.cdf_snr_db.empty()) continue;
    const long a = std::lround(s.cdf_snr_db.front() * 10.0);
    const long b = std::lround(s.cdf_snr_db.back() * 10.0);
    lo = first ? a : std::min(lo, a);
    hi = first ? b : std::max(hi, b);
    first = false;
  }
  std::ostringstream cdf;
  cdf << "snr_db";
  for (double v : values) cdf << ',' << axis << '=' << fmt(v);
  cdf << '\n';
  if (!first) {
    for (long g = lo; g <= hi; ++g) {
      cdf << fmt(static_cast<double>(g) / 10.0);
      for (const Summary& s : summaries) {
        double c = 0.0;
        if (!s.cdf_snr_db.empty()) {
          const long a = std::lround(s.cdf_snr_db.front() * 10.0);
          const long idx = g - a;
          if (idx >= static_cast<long>(s.cdf.size())) c = 1.0;
          else if (idx >= 0) c = s.cdf[static_cast<std::size_t>(idx)];
        }
        cdf << ',' << fmt(c);
      }
      cdf << '\n';
    }
  }

  const std::string dir = out_dir_of(o);
  write_outputs(dir, {{"sweep.csv", table.str()},
                      {"sweep_cdf.csv", cdf.str()},
                      {"config.ini", serialize_config(base)}});
  out << "wrote " << dir << "/{sweep.csv,sweep_cdf.csv,config.ini}\n";
  return kExitOk;
}

// Tx power that puts a boresight link with equal beams at `snr_db`.
double anchor_ptx(double beam_deg, double d, double snr, const LinkConfig& link) {
  const Beamwidth w{deg2rad(beam_deg), deg2rad(beam_deg)};
  return snr - 2.0 * max_gain_db(w, link) + path_loss_db(d, link.f0_hz) + link.noise_power_dbm;
}

int cmd_calibrate(const std::string& config_path, const std::string& out_dir,
                  const std::string& output, std::ostream& out, std::ostream& err) {
  LinkConfig link = config_path.empty() ? default_link_config() : load_config(config_path).sim.link;
  const CalibrationAnchor anchor;
  link.gain_constant = calibrate_gain_constant(anchor, link);

  constexpr double kSecondBeamDeg = 10.0;
  constexpr double kSecondPtx = -12.2;
  constexpr double kTolerance = 0.3;
  const double p1 = anchor_ptx(anchor.beamwidth_deg, anchor.distance_m, anchor.snr_db, link);
  const double p2 = anchor_ptx(kSecondBeamDeg, anchor.distance_m, anchor.snr_db, link);
  const double r1 = p1 - anchor.ptx_dbm;
  const double r2 = p2 - kSecondPtx;

  char buf[256];
  std::snprintf(buf, sizeof buf, "K_g = %.12g (%.6f dB)\n", link.gain_constant,
                10.0 * std::log10(link.gain_constant));
  out << buf;
  std::snprintf(buf, sizeof buf, "anchor 1: %g deg, %g m, %g dB -> ptx %.4f dBm (target %.1f, residual %+.4f dB)\n",
                anchor.beamwidth_deg, anchor.distance_m, anchor.snr_db, p1, anchor.ptx_dbm, r1);
  out << buf;
  std::snprintf(buf, sizeof buf, "anchor 2: %g deg, %g m, %g dB -> ptx %.4f dBm (target %.1f, residual %+.4f dB)\n",
                kSecondBeamDeg, anchor.distance_m, anchor.snr_db, p2, kSecondPtx, r2);
  out << buf;
  if (std::abs(r2) > kTolerance) {
    err << "calibration check failed: second anchor off by " << r2 << " dB\n";
    return kExitNumerical;
  }

  std::ostringstream file;
  std::snprintf(buf, sizeof buf, "%.17g", link.gain_constant);
  file << "[calibration]\n"
       << "gain_constant = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", r1);
  file << "anchor1_residual_db = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", r2);
  file << "anchor2_residual_db = " << buf << "\n";

  const fs::path target = output.empty() ? fs::path(out_dir) / "calibration.ini" : fs::path(output);
  const fs::path parent = target.parent_path();
  write_outputs(parent.empty() ? "." : parent.string(), {{target.filename().string(), file.str()}});
  out << "wrote " << target.string() << "\n";
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
    case ErrorKind::kIo:
    case ErrorKind::kInvalidArgument:
      return kExitInput;
    case ErrorKind::kNumericalFailure:
    case ErrorKind::kDegenerateGeometry:
    case ErrorKind::kInvalidOrientation:
      return kExitNumerical;
  }
  return kExitNumerical;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Beamwidth and power control simulator for V2V mmWave links", "v2vbpc"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
  add_common(run_cmd, run_opts);

  CommonOptions sweep_opts;
  std::string axis;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per value of a parameter");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", axis, "tau (ms) | f_data (Hz) | sigma_p (m) | sigma_gamma (deg) | k")
      ->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();

  std::string cal_config;
  std::string cal_out_dir;
  std::string cal_output;
  auto* cal_cmd = app.add_subcommand("calibrate", "solve the antenna gain constant");
  cal_cmd->add_option("--config", cal_config, "INI configuration file for the link parameters");
  cal_cmd->add_option("--out-dir", cal_out_dir, "output directory");
  cal_cmd->add_option("--output", cal_output, "calibration file path (default <out-dir>/calibration.ini)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, out);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, axis, values, out);
    if (*cal_cmd)
      return cmd_calibrate(cal_config, cal_out_dir.empty() ? default_out_dir() : cal_out_dir,
                           cal_output, out, err);
  } catch (const Error& e) {
    err << "v2vbpc: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "v2vbpc: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace v2vbpc
