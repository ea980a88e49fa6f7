#include <cmath>
#include <numbers>

#include <doctest.h>

#include "support.hpp"
#include "v2vbpc/channel.hpp"
#include "v2vbpc/errors.hpp"

using namespace v2vbpc;
using namespace testing;

namespace {
const Beamwidth k20{deg2rad(20.0), deg2rad(20.0)};
}

TEST_CASE("pattern_gain examples") {
  const Beamwidth w{0.3, 0.2};
  CHECK(pattern_gain({0, 0}, w) == 1.0);
  CHECK(pattern_gain({w.az / 2, 0}, w) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pattern_gain({0, -w.el / 2}, w) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pattern_gain({w.az / 2, w.el / 2}, w) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(pattern_gain_db({w.az / 2, w.el / 2}, w) == doctest::Approx(-10 * std::log10(4.0)));
  // far off boresight the dB form stays finite
  CHECK(pattern_gain_db({3.0, 0}, {0.01, 0.01}) < -1e5);
  CHECK(std::isfinite(pattern_gain_db({3.0, 0}, {0.01, 0.01})));
}

TEST_CASE("pattern_gain is monotone in the pointing error") {
  for (int i = 0; i < 1000; ++i) {
    const Beamwidth w{uniform(0.01, 2.0), uniform(0.01, 2.0)};
    const double a = uniform(-1, 1), b = uniform(-1, 1);
    const double g = pattern_gain({a, b}, w);
    CHECK(g <= 1.0);
    CHECK(g >= 0.0);
    CHECK(std::isfinite(pattern_gain_db({a, b}, w)));
    CHECK(pattern_gain({a * 1.1, b}, w) <= g);
    CHECK(pattern_gain({a, b * 1.1}, w) <= g);
  }
}

TEST_CASE("beamwidth validation") {
  CHECK_THROWS_AS(require_valid({0.0, 0.1}), Error);
  CHECK_THROWS_AS(require_valid({0.1, 4.0}), Error);
  CHECK_THROWS_AS(require_valid({NAN, 0.1}), Error);
  CHECK_NOTHROW(require_valid({std::numbers::pi, 0.1}));
}

TEST_CASE("max_gain scales inversely with the solid angle") {
  const LinkConfig cfg = default_link_config();
  const Beamwidth w{0.2, 0.1};
  CHECK(max_gain({0.4, 0.2}, cfg) == doctest::Approx(max_gain(w, cfg) / 4).epsilon(1e-14));
  CHECK(max_gain_db(w, cfg) - max_gain_db({0.4, 0.2}, cfg) ==
        doctest::Approx(20 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("path loss") {
  const double f0 = 28e9;
  const double oracle100 = 20 * std::log10(4 * std::numbers::pi * 100 * f0 / 299792458.0);
  CHECK(path_loss_db(100, f0) == doctest::Approx(oracle100).epsilon(1e-14));
  CHECK(std::abs(path_loss_db(100, f0) - 101.4) < 0.05);
  CHECK(std::abs(path_loss_db(1, f0) - 61.4) < 0.05);
  CHECK(path_loss_db(200, f0) - path_loss_db(100, f0) ==
        doctest::Approx(20 * std::log10(2.0)).epsilon(1e-12));
  const PathLoss near = path_loss(0.2, f0);
  CHECK(near.near_field_clamped);
  CHECK(near.db == path_loss_db(1.0, f0));
  CHECK_FALSE(path_loss(1.0, f0).near_field_clamped);
}

TEST_CASE("snr examples and properties") {
  const LinkConfig cfg = default_link_config();
  const double g = max_gain(k20, cfg);
  CHECK(std::abs(snr_db(0.0, g, g, 100, cfg) - 10.0) < 0.3);
  CHECK(snr_db(0.0, g, g, 50, cfg) - snr_db(0.0, g, g, 100, cfg) ==
        doctest::Approx(20 * std::log10(2.0)).epsilon(1e-12));
  CHECK(snr_db(0.0, g / 4, g, 100, cfg) - snr_db(0.0, g, g, 100, cfg) ==
        doctest::Approx(-10 * std::log10(4.0)).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    const double p = uniform(-40, 30), d = uniform(1, 300), delta = uniform(-10, 10);
    const double g1 = uniform(1, 1e4), g2 = uniform(1, 1e4);
    CHECK(snr_db(p + delta, g1, g2, d, cfg) - snr_db(p, g1, g2, d, cfg) ==
          doctest::Approx(delta).epsilon(1e-12));
    CHECK(std::abs(snr_db(p, g1, g2, d, cfg) - snr_db(p, g2, g1, d, cfg)) < 1e-12);
  }
}

TEST_CASE("BPSK threshold") {
  // Q(x) = 1/2 erfc(x/sqrt2), BER = Q(sqrt(2 snr))
  for (double ber : {1.3e-2, 1e-3, 1e-6}) {
    const double snr = std::pow(10.0, snr_min_from_ber(ber) / 10.0);
    CHECK(0.5 * std::erfc(std::sqrt(snr)) == doctest::Approx(ber).epsilon(1e-9));
  }
  CHECK(std::abs(snr_min_from_ber(1.3e-2) - 3.9) < 0.1);
  CHECK(std::abs(snr_min_from_ber(1e-6) - 10.5) < 0.1);
  CHECK(snr_min_from_ber(0.5) == kSnrFloorDb);
  CHECK(snr_min_from_ber(0.7) == kSnrFloorDb);
  CHECK_THROWS_AS(snr_min_from_ber(0.0), Error);
}

TEST_CASE("gain constant calibration") {
  LinkConfig cfg = default_link_config();
  const CalibrationAnchor anchor;
  const double kg = calibrate_gain_constant(anchor, cfg);
  CHECK(kg == cfg.gain_constant);
  // boresight link through the anchor, solved independently
  const double g_db = (anchor.snr_db - anchor.ptx_dbm + path_loss_db(100, cfg.f0_hz) +
                       cfg.noise_power_dbm) / 2.0;
  CHECK(10 * std::log10(max_gain(k20, cfg)) == doctest::Approx(g_db).epsilon(1e-12));
  CHECK(std::abs(g_db - 15.2) < 0.1);
  CHECK(snr_db(0.0, max_gain(k20, cfg), max_gain(k20, cfg), 100, cfg) ==
        doctest::Approx(10.0).epsilon(1e-12));
  // recalibration is idempotent
  CHECK(calibrate_gain_constant(anchor, cfg) == kg);
}

TEST_CASE("EIRP") {
  const LinkConfig cfg = default_link_config();
  CHECK(eirp_dbm(5.0, k20, cfg) == doctest::Approx(5.0 + max_gain_db(k20, cfg)).epsilon(1e-15));
}
