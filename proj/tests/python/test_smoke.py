import math
import os

import numpy as np
import pytest

if os.environ.get("V2VBPC_REQUIRE_MODULE", "1") == "1":
    import v2vbpc
else:
    v2vbpc = pytest.importorskip("v2vbpc")


def test_pattern_half_power():
    w = v2vbpc.Beamwidth(0.3, 0.2)
    assert v2vbpc.pattern_gain(0.0, 0.0, w) == 1.0
    assert v2vbpc.pattern_gain(0.15, 0.0, w) == pytest.approx(0.5, rel=1e-14)
    assert v2vbpc.pattern_gain(0.15, 0.1, w) == pytest.approx(0.25, rel=1e-14)


def test_path_loss_matches_friis():
    f0 = 28e9
    expect = 20 * math.log10(4 * math.pi * 100 * f0 / 299792458.0)
    assert v2vbpc.path_loss_db(100.0, f0) == pytest.approx(expect, rel=1e-14)


def test_bpsk_threshold_inverts_ber():
    snr = 10 ** (v2vbpc.snr_min_from_ber(1e-3) / 10)
    assert 0.5 * math.erfc(math.sqrt(snr)) == pytest.approx(1e-3, rel=1e-9)


def test_per_side_target_composes():
    t = v2vbpc.per_side_target(6e-4)
    assert v2vbpc.p_mis_total(t, t) == pytest.approx(6e-4, rel=1e-12)


def test_isotropic_coverage_is_rayleigh():
    d, s2 = 50.0, 0.4
    w = v2vbpc.Beamwidth(0.05, 0.05)
    r = d * math.tan(0.025)
    cover = v2vbpc.p_beam_cover(w, np.eye(2) * s2, d)
    assert cover == pytest.approx(1 - math.exp(-r * r / (2 * s2)), abs=1e-9)


def test_optimize_side_hits_target():
    C = np.array([[0.3, 0.05], [0.05, 0.1]])
    sol = v2vbpc.optimize_side(C, 40.0, 1e-3)
    assert sol.attainable
    assert sol.p_mis == pytest.approx(1e-3, abs=1e-6)
    assert 1 - v2vbpc.p_beam_cover(sol.w, C, 40.0) == pytest.approx(sol.p_mis, abs=1e-12)


def test_simulate_short_run():
    out = v2vbpc.simulate("[sim]\nmode = fixed\n", ["sim.seed=3", "sim.max_duration_s=5"])
    rec, summ = out["records"], out["summary"]
    n = summ["steps"]
    assert n > 0
    assert rec["t"].shape == (n,)
    assert np.allclose(rec["omega1_az"], v2vbpc.deg2rad(13.0))
    assert summ["outage_rate"] == pytest.approx(rec["outage"].mean())
    again = v2vbpc.simulate(out["config"])
    assert np.array_equal(again["records"]["snr_db"], rec["snr_db"])


def test_errors_carry_kind():
    with pytest.raises(v2vbpc.Error) as e:
        v2vbpc.simulate("[sim]\nbogus = 1\n")
    assert e.value.kind == "config error"
    with pytest.raises(v2vbpc.Error):
        v2vbpc.per_side_target(0.0)
