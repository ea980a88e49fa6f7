// SPDX-License-Identifier: Apache-2.0
#include "v2vbpc/bpc.hpp"

#include <algorithm>
#include <cmath>

#include "v2vbpc/errors.hpp"
#include "v2vbpc/fusion.hpp"

namespace v2vbpc {

namespace {

const Mat4& conj_matrix() {
  static const Mat4 d = Vec4(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return d;
}

double snap_up(double x, const std::vector<double>& codebook) {
  double best = -1.0;
  double largest = 0.0;
  for (double c : codebook) {
    largest = std::max(largest, c);
    if (c >= x && (best < 0.0 || c < best)) best = c;
  }
  return best < 0.0 ? largest : best;
}

}  // namespace

BpcGradients bpc_gradients(const PeerEstimate& self, const PeerEstimate& peer) {
  require_unit(self.q_hat);
  const Vec3 dp_n = peer.p_hat - self.p_hat;
  BpcGradients g;
  g.dp_local = relative_position(self.p_hat, peer.p_hat, self.q_hat);
  if (!(g.dp_local.norm() > kMinDistance)) {
    throw Error(ErrorKind::kDegenerateGeometry, "peer estimate coincides with own position");
  }
  g.B_q1 = rotation_gradient(self.q_hat.conjugate(), dp_n);
  g.B_dp = rotation_matrix_unchecked(self.q_hat).transpose();
  g.b_alpha = azimuth_gradient(g.dp_local);
  g.b_beta = elevation_gradient(g.dp_local);
  return g;
}

PointingStatistics pointing_statistics(const PeerEstimate& self, const PeerEstimate& peer) {
  require_psd(self.C_p, 1e-9, "own position covariance");
  require_psd(peer.C_p, 1e-9, "peer position covariance");
  require_psd(self.C_q, 1e-9, "own orientation covariance");
  const BpcGradients g = bpc_gradients(self, peer);
  const Mat4 C_conj = conj_matrix() * self.C_q * conj_matrix();
  PointingStatistics s;
  s.C_dp = g.B_q1 * C_conj * g.B_q1.transpose() + g.B_dp * (self.C_p + peer.C_p) * g.B_dp.transpose();
  s.C_dp = 0.5 * (s.C_dp + s.C_dp.transpose());
  s.los = los_angles(g.dp_local);
  s.distance = g.dp_local.norm();
  s.sigma_alpha = std::sqrt(std::max(0.0, double(g.b_alpha * s.C_dp * g.b_alpha.transpose())));
  s.sigma_beta = std::sqrt(std::max(0.0, double(g.b_beta * s.C_dp * g.b_beta.transpose())));
  return s;
}

Beamwidth select_beamwidth(double sigma_alpha, double sigma_beta, double k,
                           const BeamLimits& limits, const std::vector<double>& codebook) {
  if (!(k > 0.0)) throw Error(ErrorKind::kInvalidArgument, "confidence factor k must be positive");
  if (!(limits.min_rad > 0.0) || !(limits.max_rad >= limits.min_rad)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid beamwidth limits");
  }
  Beamwidth w{std::clamp(2.0 * k * sigma_alpha, limits.min_rad, limits.max_rad),
              std::clamp(2.0 * k * sigma_beta, limits.min_rad, limits.max_rad)};
  if (!codebook.empty()) {
    w.az = snap_up(w.az, codebook);
    w.el = snap_up(w.el, codebook);
  }
  return w;
}

PowerDecision power_control(const Beamwidth& w1, const Beamwidth& w2, double d_hat,
                            const LinkConfig& cfg) {
  const double g1 = max_gain_db(w1, cfg);
  const double g2 = max_gain_db(w2, cfg);
  PowerDecision out;
  out.ptx_dbm = cfg.snr_min_db + path_loss_db(d_hat, cfg.f0_hz) + cfg.noise_power_dbm -
                (g1 + g2) + kWorstCasePointingLossDb + cfg.power_margin_db;
  if (out.ptx_dbm + g1 > cfg.eirp_max_dbm) {
    out.ptx_dbm = cfg.eirp_max_dbm - g1;
    out.clipped = true;
  }
  return out;
}

PowerDecision fixed_power_control(const Beamwidth& w, double d_hat, const LinkConfig& cfg) {
  return power_control(w, w, d_hat, cfg);
}

BpcDecision bpc_step(const PeerEstimate& self, const PeerEstimate& peer, const LinkConfig& cfg,
                     const BpcConfig& bpc) {
  const PointingStatistics tx = pointing_statistics(self, peer);
  const PointingStatistics rx = pointing_statistics(peer, self);
  BpcDecision d;
  d.beamwidth = select_beamwidth(tx.sigma_alpha, tx.sigma_beta, bpc.k, bpc.limits, bpc.codebook);
  d.rx_beamwidth = select_beamwidth(rx.sigma_alpha, rx.sigma_beta, bpc.k, bpc.limits, bpc.codebook);
  d.pointing = tx.los;
  d.rx_pointing = rx.los;
  d.sigma_alpha = tx.sigma_alpha;
  d.sigma_beta = tx.sigma_beta;
  d.distance_hat = tx.distance;
  const PowerDecision p = power_control(d.beamwidth, d.rx_beamwidth, tx.distance, cfg);
  d.ptx_dbm = p.ptx_dbm;
  d.eirp_clipped = p.clipped;
  return d;
}

}  // namespace v2vbpc
