"""
Thermometry Operations for Phononet.

Thermal occupation distributions, blue-sideband (BSB) flopping signals and
heating-rate fits from n̄ measured after variable wait times.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from config.constants import NBAR_SIGMA_FLOOR, THERMAL_TAIL_TOL
from domain.exceptions import FitError, TruncationError, ValidationError
from domain.models import HeatingFit

logger = logging.getLogger(__name__)

NBAR_MAX = 50.0
_NBAR_GRID = np.concatenate([np.linspace(0.0, 5.0, 101), np.linspace(5.5, NBAR_MAX, 90)])


# ==================== Thermal states ====================


def _auto_cutoff(nbar: float, tail_tol: float) -> int:
    if nbar == 0:
        return 0
    ratio = nbar / (nbar + 1.0)
    return max(int(math.ceil(math.log(tail_tol) / math.log(ratio))) - 1, 0)


def thermal_populations(nbar: float, cutoff: Optional[int] = None, check_tail: bool = True) -> np.ndarray:
    """
    p_n = n̄ⁿ / (n̄ + 1)^{n+1} for n = 0..cutoff, renormalized.

    Without a cutoff the smallest one leaving a negligible tail is chosen.

    Raises:
        ValidationError: If n̄ < 0
        TruncationError: If the mass above a given cutoff exceeds 1e-8
    """
    if nbar < 0 or not math.isfinite(nbar):
        raise ValidationError("Mean phonon number must be non-negative", details={"nbar": nbar})
    if cutoff is None:
        cutoff = _auto_cutoff(nbar, THERMAL_TAIL_TOL * 1e-3)
    ratio = nbar / (nbar + 1.0)
    tail = ratio ** (cutoff + 1)
    if check_tail and tail > THERMAL_TAIL_TOL:
        raise TruncationError("Thermal tail above cutoff is too large", details={"nbar": nbar, "cutoff": cutoff, "tail": tail})
    n = np.arange(cutoff + 1)
    p = ratio**n / (nbar + 1.0)
    return p / p.sum()


def thermal_state(nbar: float, cutoff: Optional[int] = None) -> np.ndarray:
    """
    Single-mode thermal density matrix on levels 0..cutoff.

    Example:
        >>> thermal_state(0.0)
        array([[1.+0.j]])
    """
    return np.diag(thermal_populations(nbar, cutoff)).astype(complex)


def thermal_mean(p: Sequence[float]) -> float:
    values = np.asarray(p, dtype=float)
    return float(np.arange(values.size) @ values)


# ==================== BSB signal ====================


def bsb_signal(
    nbar: float,
    rabi_hz: float,
    times: Sequence[float],
    decay_rate: float = 0.0,
    cutoff: Optional[int] = None,
) -> np.ndarray:
    """
    Spin-up probability after a BSB pulse of length t on a thermal mode.

    P(t) = ½ (1 - e^{-γt} Σ_n p_n cos(√(n+1) Ω t)), Ω = 2π·rabi_hz.
    """
    t = np.asarray(times, dtype=float)
    p = thermal_populations(nbar, cutoff)
    omega = 2.0 * math.pi * rabi_hz * np.sqrt(np.arange(p.size) + 1.0)
    coherence = p @ np.cos(np.outer(omega, t))
    return 0.5 * (1.0 - np.exp(-decay_rate * t) * coherence)


def fit_nbar(
    times: Sequence[float],
    signal: Sequence[float],
    rabi_hz: float,
    decay_rate: float = 0.0,
) -> Tuple[float, float]:
    """
    Least-squares n̄ of one BSB trace, seeded by a coarse grid search.

    Returns:
        (n̄, standard error)

    Raises:
        FitError: Flat or mismatched trace
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    if t.size != y.size or t.size < 3:
        raise FitError("BSB trace needs matching times and at least three samples", details={"n_times": t.size, "n_signal": y.size})
    if np.ptp(y) < 1e-9:
        raise FitError("BSB trace is flat", details={"value": float(y[0])})

    def residual(params: np.ndarray) -> np.ndarray:
        return bsb_signal(params[0], rabi_hz, t, decay_rate) - y

    costs = [float(np.sum(residual(np.array([nb])) ** 2)) for nb in _NBAR_GRID]
    start = float(_NBAR_GRID[int(np.argmin(costs))])
    result = least_squares(residual, x0=[start], bounds=([0.0], [NBAR_MAX]), xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not result.success:
        raise FitError("Thermal-state fit did not converge", details={"message": result.message})

    dof = max(t.size - 1, 1)
    jtj = float(result.jac[:, 0] @ result.jac[:, 0])
    variance = (2.0 * result.cost / dof) / jtj if jtj > 0 else math.inf
    return float(result.x[0]), math.sqrt(variance)


# ==================== Heating rate ====================


def heating_rate_from_points(
    wait_times: Sequence[float],
    nbars: Sequence[float],
    nbar_errors: Optional[Sequence[float]] = None,
    sigma_floor: float = NBAR_SIGMA_FLOOR,
) -> HeatingFit:
    """
    Weighted line n̄(t) = offset + rate·t with per-point uncertainties.

    Uncertainties below sigma_floor are raised to it, and the rate error is
    taken from the given uncertainties without rescaling by the residuals.

    Example:
        >>> fit = heating_rate_from_points([0, 6.667e-3], [0, 0.2], [0, 0.3])
        >>> round(fit.rate), round(fit.rate_stderr)
        (30, 45)

    Raises:
        FitError: Fewer than two points or a single wait time
    """
    t = np.asarray(wait_times, dtype=float)
    n = np.asarray(nbars, dtype=float)
    if t.size != n.size or t.size < 2:
        raise FitError("Heating fit needs at least two (wait, n̄) points", details={"n_waits": t.size, "n_nbars": n.size})
    if np.ptp(t) == 0:
        raise FitError("Heating fit needs distinct wait times")
    errors = np.zeros_like(n) if nbar_errors is None else np.asarray(nbar_errors, dtype=float)
    sigma = np.maximum(errors, sigma_floor)

    coeffs, cov = np.polyfit(t, n, 1, w=1.0 / sigma, cov="unscaled")
    rate, offset = float(coeffs[0]), float(coeffs[1])
    stderr = float(math.sqrt(cov[0, 0]))
    logger.info(f"Heating rate {rate:.3g} ± {stderr:.2g} quanta/s from {t.size} waits")
    return HeatingFit(wait_times=t, nbars=n, nbar_errors=sigma, rate=rate, rate_stderr=stderr, offset=offset)


def fit_heating(
    series: Sequence[Tuple[float, Sequence[float], Sequence[float]]],
    rabi_hz: float,
    decay_rate: float = 0.0,
) -> HeatingFit:
    """
    Heating rate from BSB traces taken after increasing wait times.

    Args:
        series: (wait_time, pulse_times, signal) per wait
        rabi_hz: BSB Rabi frequency of the |0⟩ -> |1⟩ transition
        decay_rate: Optional contrast decay γ (1/s)

    Raises:
        FitError: Fewer than two waits or a flat trace
    """
    if len(series) < 2:
        raise FitError("Heating fit needs at least two wait times", details={"n_waits": len(series)})
    waits, nbars, errors = [], [], []
    for wait, times, signal in series:
        nbar, err = fit_nbar(times, signal, rabi_hz, decay_rate)
        logger.debug(f"wait {wait * 1e3:.3f} ms: n̄ = {nbar:.4f} ± {err:.2g}")
        waits.append(float(wait))
        nbars.append(nbar)
        errors.append(err)
    return heating_rate_from_points(waits, nbars, errors)


def synthetic_heating_series(
    rate: float,
    wait_times: Sequence[float],
    pulse_times: Sequence[float],
    rabi_hz: float,
    nbar0: float = 0.0,
    decay_rate: float = 0.0,
    noise_sigma: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """BSB traces for n̄(t) = nbar0 + rate·t, with optional Gaussian noise."""
    if noise_sigma > 0 and rng is None:
        rng = np.random.default_rng()
    times = np.asarray(pulse_times, dtype=float)
    series = []
    for wait in wait_times:
        signal = bsb_signal(nbar0 + rate * float(wait), rabi_hz, times, decay_rate)
        if noise_sigma > 0:
            signal = signal + rng.normal(0.0, noise_sigma, size=signal.shape)
        series.append((float(wait), times, signal))
    return series
