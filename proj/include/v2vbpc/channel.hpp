// SPDX-License-Identifier: Apache-2.0
//
// Beam-based LOS link budget. All power quantities are in dB/dBm; linear
// gains only appear inside pattern_gain and max_gain.
#pragma once

namespace v2vbpc {

inline constexpr double kSpeedOfLight = 299792458.0;
/// 10 log10(16): worst-case pointing loss, -3 dB on both axes at both ends.
inline constexpr double kWorstCasePointingLossDb = 12.041199826559248;

/// Full -3 dB beamwidths in radians.
struct Beamwidth {
  double az = 0.0;
  double el = 0.0;
};

struct PointingError {
  double d_az = 0.0;
  double d_el = 0.0;
};

/// Anchor used to calibrate the gain constant: Tx power that yields the
/// given boresight SNR over a symmetric link.
struct CalibrationAnchor {
  double beamwidth_deg = 20.0;
  double distance_m = 100.0;
  double snr_db = 10.0;
  double ptx_dbm = 0.0;
};

struct LinkConfig {
  double f0_hz = 28e9;
  double bandwidth_hz = 400e6;
  double noise_power_dbm = -81.0;
  double eirp_max_dbm = 43.0;
  double gain_constant = 0.0;  // filled with the calibrated value by default_link_config()
  double snr_min_db = 0.0;     // filled from the BPSK/FEC target by default_link_config()
  double power_margin_db = 0.0;
};

/// Table defaults with the gain constant calibrated on the default anchor.
LinkConfig default_link_config();

/// Throws kInvalidArgument unless 0 < az, el <= pi and both finite.
void require_valid(const Beamwidth& w);

/// Normalized Gaussian pattern: 1/2 at half the beamwidth on one axis.
double pattern_gain(const PointingError& e, const Beamwidth& w);
/// 10 log10(pattern_gain), evaluated without underflow.
double pattern_gain_db(const PointingError& e, const Beamwidth& w);
/// K_g / (az * el), linear.
double max_gain(const Beamwidth& w, const LinkConfig& cfg);
double max_gain_db(const Beamwidth& w, const LinkConfig& cfg);

struct PathLoss {
  double db = 0.0;
  bool near_field_clamped = false;
};

/// Free-space path loss; distances below 1 m are clamped and flagged.
PathLoss path_loss(double d_m, double f0_hz);
inline double path_loss_db(double d_m, double f0_hz) { return path_loss(d_m, f0_hz).db; }

/// SNR in dB from Tx power (dBm) and the two linear gains.
double snr_db(double ptx_dbm, double g1, double g2, double d_m, const LinkConfig& cfg);

/// Sentinel returned for BER targets at or above 0.5.
inline constexpr double kSnrFloorDb = -300.0;
/// BPSK threshold SNR, BER = Q(sqrt(2 SNR)).
double snr_min_from_ber(double ber_target);

/// Gain constant that makes `anchor` hold exactly on a boresight link.
double calibrate_gain_constant(const CalibrationAnchor& anchor, const LinkConfig& cfg);

/// EIRP = ptx + G_max(w) in dBm.
double eirp_dbm(double ptx_dbm, const Beamwidth& w, const LinkConfig& cfg);

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace v2vbpc
