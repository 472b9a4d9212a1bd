"""
Pulse shaping for Phononet.

Rabi-frequency envelopes with raised-sine (Hann) edges. The envelope rises as
sin²(πt / 2rT) over the first fraction r of the pulse, stays at 1, and falls
symmetrically over the last fraction r.
"""

import numpy as np

from domain.validators import validate_ramp_fraction


def pulse_envelope(t, duration: float, ramp_fraction: float):
    """
    Normalized amplitude envelope at time(s) t.

    Zero outside [0, duration]; ramp_fraction = 0 gives a square pulse.

    Example:
        >>> pulse_envelope(0.5, 1.0, 0.1)
        1.0
    """
    validate_ramp_fraction(ramp_fraction)
    times = np.asarray(t, dtype=float)
    env = np.where((times >= 0.0) & (times <= duration), 1.0, 0.0)
    if ramp_fraction > 0.0:
        ramp = ramp_fraction * duration
        rising = times < ramp
        falling = times > duration - ramp
        env = np.where(rising & (times >= 0.0), np.sin(np.pi * times / (2.0 * ramp)) ** 2, env)
        env = np.where(falling & (times <= duration), np.sin(np.pi * (duration - times) / (2.0 * ramp)) ** 2, env)
    if np.ndim(env) == 0:
        return float(env)
    return env


def pulse_area_factor(ramp_fraction: float, power: int = 2) -> float:
    """
    ∫ envelope^power dt / duration.

    power=1 gives 1 - r (amplitude area); power=2 gives 1 - 1.25·r, the
    area that enters Ω²-proportional quantities.
    """
    validate_ramp_fraction(ramp_fraction)
    if power == 1:
        return 1.0 - ramp_fraction
    if power == 2:
        return 1.0 - 1.25 * ramp_fraction
    raise ValueError(f"Unsupported envelope power: {power}")


def ramp_fraction_for_area(area_factor: float, power: int = 2) -> float:
    """
    Inverse of pulse_area_factor: the ramp fraction giving area_factor.

    Raises:
        ValidationError: If no ramp fraction in [0, 0.5] reaches area_factor
    """
    if power == 1:
        return validate_ramp_fraction(1.0 - area_factor)
    if power == 2:
        return validate_ramp_fraction((1.0 - area_factor) / 1.25)
    raise ValueError(f"Unsupported envelope power: {power}")
