"""Beamwidth and power control for mmWave V2V links."""

from ._core import (
    BeamLimits,
    Beamwidth,
    Error,
    LinkConfig,
    SideSolution,
    deg2rad,
    max_gain_db,
    optimize_side,
    p_beam_cover,
    p_mis_total,
    path_loss_db,
    pattern_gain,
    per_side_target,
    rad2deg,
    required_ptx_worstcase,
    simulate,
    snr_min_from_ber,
)

__all__ = [
    "BeamLimits",
    "Beamwidth",
    "Error",
    "LinkConfig",
    "SideSolution",
    "deg2rad",
    "max_gain_db",
    "optimize_side",
    "p_beam_cover",
    "p_mis_total",
    "path_loss_db",
    "pattern_gain",
    "per_side_target",
    "rad2deg",
    "required_ptx_worstcase",
    "simulate",
    "snr_min_from_ber",
]
