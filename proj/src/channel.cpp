// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "v2vbpc/errors.hpp"

namespace v2vbpc {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

void require_valid(const Beamwidth& w) {
  auto ok = [](double x) { return std::isfinite(x) && x > 0.0 && x <= std::numbers::pi; };
  if (!ok(w.az) || !ok(w.el)) {
    throw Error(ErrorKind::kInvalidArgument,
                "beamwidth (" + std::to_string(w.az) + ", " + std::to_string(w.el) +
                    ") rad outside (0, pi]");
  }
}

double pattern_gain(const PointingError& e, const Beamwidth& w) {
  require_valid(w);
  const double u = 2.0 * e.d_az / w.az;
  const double v = 2.0 * e.d_el / w.el;
  return std::exp(-std::numbers::ln2 * (u * u + v * v));
}

double pattern_gain_db(const PointingError& e, const Beamwidth& w) {
  require_valid(w);
  const double u = 2.0 * e.d_az / w.az;
  const double v = 2.0 * e.d_el / w.el;
  return -10.0 * std::numbers::log10e * std::numbers::ln2 * (u * u + v * v);
}

double max_gain(const Beamwidth& w, const LinkConfig& cfg) {
  require_valid(w);
  return cfg.gain_constant / (w.az * w.el);
}

double max_gain_db(const Beamwidth& w, const LinkConfig& cfg) {
  return 10.0 * std::log10(max_gain(w, cfg));
}

PathLoss path_loss(double d_m, double f0_hz) {
  if (!std::isfinite(d_m) || !(f0_hz > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "path loss needs finite distance and f0 > 0");
  }
  PathLoss out;
  if (d_m < 1.0) {
    d_m = 1.0;
    out.near_field_clamped = true;
  }
  out.db = 20.0 * std::log10(4.0 * std::numbers::pi * d_m * f0_hz / kSpeedOfLight);
  return out;
}

double snr_db(double ptx_dbm, double g1, double g2, double d_m, const LinkConfig& cfg) {
  return ptx_dbm + 10.0 * std::log10(g1) + 10.0 * std::log10(g2) -
         path_loss_db(d_m, cfg.f0_hz) - cfg.noise_power_dbm;
}

namespace {

// Upper tail of the standard normal.
double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  // Bracket then bisect; Q is strictly decreasing.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double snr_min_from_ber(double ber_target) {
  if (!(ber_target > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "BER target must be positive");
  }
  if (ber_target >= 0.5) return kSnrFloorDb;
  const double x = q_inverse(ber_target);
  return 10.0 * std::log10(0.5 * x * x);
}

double calibrate_gain_constant(const CalibrationAnchor& anchor, const LinkConfig& cfg) {
  const double w = deg2rad(anchor.beamwidth_deg);
  // snr = ptx + 2 * 10log10(K / w^2) - eta - Pn
  const double gain_db =
      0.5 * (anchor.snr_db - anchor.ptx_dbm + path_loss_db(anchor.distance_m, cfg.f0_hz) +
             cfg.noise_power_dbm);
  return std::pow(10.0, gain_db / 10.0) * w * w;
}

LinkConfig default_link_config() {
  LinkConfig cfg;
  cfg.gain_constant = calibrate_gain_constant(CalibrationAnchor{}, cfg);
  cfg.snr_min_db = snr_min_from_ber(1.3e-2);
  return cfg;
}

double eirp_dbm(double ptx_dbm, const Beamwidth& w, const LinkConfig& cfg) {
  return ptx_dbm + max_gain_db(w, cfg);
}

}  // namespace v2vbpc
