// SPDX-License-Identifier: Apache-2.0
//
// INI configuration with sections [sim], [link], [noise], [trajectory].
// Angles are in degrees and latency in milliseconds at this boundary.
#pragma once

#include <iosfwd>
#include <string>

#include "v2vbpc/sim.hpp"
#include "v2vbpc/trajectory.hpp"

namespace v2vbpc {

struct AppConfig {
  SimConfig sim;
  std::string preset = "milan_like";
  TrajectorySpec trajectory = trajectory_preset("milan_like");
  std::string trajectory_file;  // CSV; overrides the generator when set
};

/// Unknown sections or keys and malformed values throw kConfig.
AppConfig parse_config(std::istream& is, const std::string& origin = "<config>");
AppConfig load_config(const std::string& path);
std::string serialize_config(const AppConfig& cfg);

/// "section.key=value" with the same keys and units as the file.
void apply_override(AppConfig& cfg, const std::string& assignment);

Trajectory build_trajectory(const AppConfig& cfg);

/// Calibration file: [calibration] gain_constant plus anchor diagnostics.
double load_calibration(const std::string& path);

}  // namespace v2vbpc
