"""
Ion Chain Operations for Phononet.

Equilibrium positions of a linear Coulomb chain, transverse normal modes,
ion/mode assignment and the large-N scaling studies.
Pure functions - no file access, no side effects.

Units: positions in metres, frequencies in Hz (ordinary). Dimensionless
helpers measure lengths in l = (k_e / (m ω_z²))^(1/3).
"""

import dataclasses
import logging
import math
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import hadamard
from scipy.optimize import least_squares
from scipy.special import zeta

from config.constants import (
    COULOMB_CONSTANT,
    FIVE_ION_SPECTRUM_HZ,
    HBAR,
    NEWTON_MAX_ITERATIONS,
    YB171_MASS,
    DEFAULT_RAMAN_WAVEVECTOR,
)
from domain.exceptions import InstabilityError, SearchError, SolverError, ValidationError
from domain.models import AxialFit, ConnectivityStats, ModeTable, TrapParams
from domain.rules import select_best_ion
from domain.validators import validate_mode_pair

logger = logging.getLogger(__name__)

SPACING_MODES = ("harmonic", "equal")


# ==================== Equilibrium ====================


def _axial_force(u: np.ndarray) -> np.ndarray:
    """Net dimensionless force u_i - Σ_j sign(u_i - u_j)/(u_i - u_j)²."""
    diff = u[:, np.newaxis] - u[np.newaxis, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def _axial_jacobian(u: np.ndarray) -> np.ndarray:
    diff = np.abs(u[:, np.newaxis] - u[np.newaxis, :])
    np.fill_diagonal(diff, np.inf)
    inv_cube = 1.0 / diff**3
    jac = -2.0 * inv_cube
    np.fill_diagonal(jac, 1.0 + 2.0 * inv_cube.sum(axis=1))
    return jac


@lru_cache(maxsize=256)
def _dimensionless_equilibrium(n_ions: int) -> Tuple[float, ...]:
    if n_ions == 1:
        return (0.0,)

    # Empirical starting point, accurate to a few percent up to ~100 ions
    k = np.arange(1, n_ions + 1)
    u = 3.94 * n_ions**0.387 * np.sin(np.arcsin(1.75 * n_ions**-0.982 * (k - (n_ions + 1) / 2.0)) / 3.0)

    for iteration in range(NEWTON_MAX_ITERATIONS):
        force = _axial_force(u)
        if np.max(np.abs(force)) < 1e-13:
            break
        u = u - np.linalg.solve(_axial_jacobian(u), force)
    else:
        raise SolverError(
            "Equilibrium Newton solve did not converge",
            details={"n_ions": n_ions, "iterations": NEWTON_MAX_ITERATIONS, "residual": float(np.max(np.abs(force)))},
        )

    u = np.sort(u)
    u = 0.5 * (u - u[::-1])
    logger.debug(f"Equilibrium for {n_ions} ions converged after {iteration} Newton steps")
    return tuple(float(x) for x in u)


def dimensionless_positions(n_ions: int) -> np.ndarray:
    """
    Equilibrium positions of a harmonic chain in units of l.

    Example:
        >>> dimensionless_positions(2)  # ±(1/4)^(1/3)
        array([-0.62996052,  0.62996052])
    """
    if n_ions < 1:
        raise ValidationError("n_ions must be >= 1", details={"n_ions": n_ions})
    return np.array(_dimensionless_equilibrium(int(n_ions)))


def length_scale(params: TrapParams) -> float:
    """l = (k_e / (m ω_z²))^(1/3) in metres."""
    omega_z = 2.0 * math.pi * params.nu_axial
    return (COULOMB_CONSTANT / (params.ion_mass * omega_z**2)) ** (1.0 / 3.0)


def equilibrium_positions(params: TrapParams) -> np.ndarray:
    """
    Axial equilibrium positions of the chain.

    Equal-spacing chains are placed directly; harmonic chains are solved by
    Newton iteration on the force balance and symmetrized about 0.

    Args:
        params: Trap parameters

    Returns:
        Sorted positions in metres

    Raises:
        SolverError: If the Newton solve does not converge
    """
    n = params.n_ions
    if params.fixed_spacing is not None:
        return (np.arange(n) - (n - 1) / 2.0) * params.fixed_spacing
    return dimensionless_positions(n) * length_scale(params)


# ==================== Transverse modes ====================


def _coulomb_curvature(positions: np.ndarray) -> np.ndarray:
    """Matrix D - K with K_ij = 1/|z_i - z_j|³ and D_ii = Σ_j K_ij."""
    z = np.asarray(positions, dtype=float)
    diff = np.abs(z[:, np.newaxis] - z[np.newaxis, :])
    np.fill_diagonal(diff, np.inf)
    coupling = 1.0 / diff**3
    return np.diag(coupling.sum(axis=1)) - coupling


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of every column positive."""
    fixed = vectors.copy()
    for m in range(fixed.shape[1]):
        column = fixed[:, m]
        lead = np.flatnonzero(np.abs(column) > 1e-8)
        if lead.size and column[lead[0]] < 0:
            fixed[:, m] = -column
    return fixed


def lamb_dicke_scale(params: TrapParams, frequencies: np.ndarray) -> np.ndarray:
    """η_m = k √(ħ / (2 m ω_m)) for each mode frequency (Hz)."""
    omega = 2.0 * math.pi * np.asarray(frequencies, dtype=float)
    return params.raman_wavevector * np.sqrt(HBAR / (2.0 * params.ion_mass * omega))


def transverse_modes(params: TrapParams, positions: Optional[np.ndarray] = None) -> ModeTable:
    """
    Transverse normal modes of the chain.

    The mass-weighted Hessian is ω_x² I - (k_e/m)(D - K); its eigenvectors
    are the mode vectors, the COM mode is the uniform vector at ν_x.

    Args:
        params: Trap parameters
        positions: Equilibrium positions in metres (computed if omitted)

    Returns:
        ModeTable sorted by ascending frequency

    Raises:
        InstabilityError: If any mode has a negative squared frequency
    """
    if positions is None:
        positions = equilibrium_positions(params)
    positions = np.asarray(positions, dtype=float)

    omega_x = 2.0 * math.pi * params.nu_com_transverse
    hessian = omega_x**2 * np.eye(positions.size) - (COULOMB_CONSTANT / params.ion_mass) * _coulomb_curvature(positions)
    omega_sq, vectors = np.linalg.eigh(hessian)

    unstable = np.flatnonzero(omega_sq <= 0.0)
    if unstable.size:
        raise InstabilityError(
            "Linear chain is unstable (zig-zag transition)",
            details={"mode": int(unstable[0]), "omega_squared": float(omega_sq[unstable[0]]), "n_ions": params.n_ions},
        )

    frequencies = np.sqrt(omega_sq) / (2.0 * math.pi)
    vectors = _fix_signs(vectors)
    logger.debug(
        f"Transverse modes for {params.n_ions} ions: "
        f"{frequencies[0] / 1e6:.4f}..{frequencies[-1] / 1e6:.4f} MHz"
    )
    return ModeTable(
        frequencies=frequencies,
        mode_vectors=vectors,
        eta_scale=lamb_dicke_scale(params, frequencies),
        positions=positions,
        nu_axial=None if params.is_equal_spacing else params.nu_axial,
    )


def build_chain(params: TrapParams) -> ModeTable:
    """Positions and modes in one call."""
    return transverse_modes(params, equilibrium_positions(params))


def transverse_eigenvalues(n_ions: int) -> np.ndarray:
    """
    Eigenvalues λ of the dimensionless D - K for a harmonic chain, descending.

    ω_m² = ω_x² - ω_z² λ_m, so descending λ gives ascending frequencies.
    """
    lam = np.linalg.eigvalsh(_coulomb_curvature(dimensionless_positions(n_ions)))
    return np.clip(lam[::-1], 0.0, None)


def fit_axial_frequency(measured_freqs: Sequence[float], params: TrapParams) -> AxialFit:
    """
    Fit the axial frequency of a harmonic trap to a measured transverse spectrum.

    The COM frequency is the largest measured value, or params.nu_com_transverse
    when only N-1 frequencies are given (COM excluded). A logarithmic grid
    brackets the optimum; least squares refines it.

    Args:
        measured_freqs: Measured frequencies in Hz (any order)
        params: Trap parameters (n_ions, mass; nu_axial is only a placeholder)

    Returns:
        AxialFit with nu_axial, COM frequency and RMS residual in Hz

    Raises:
        SearchError: If the grid has no interior optimum or n_ions == 1

    Example:
        >>> params = TrapParams(n_ions=5, nu_com_transverse=2.153e6, nu_axial=0.3e6)
        >>> fit = fit_axial_frequency(FIVE_ION_SPECTRUM_HZ, params)
        >>> round(fit.nu_axial / 1e6, 2)
    """
    measured = np.sort(np.asarray(measured_freqs, dtype=float))
    n = params.n_ions
    if n < 2:
        raise SearchError("A single ion carries no axial information", details={"n_ions": n})
    if measured.size not in (n, n - 1):
        raise ValidationError(
            "Measured spectrum must list n_ions or n_ions - 1 frequencies",
            details={"n_ions": n, "n_measured": int(measured.size)},
        )

    nu_x = float(measured.max()) if measured.size == n else params.nu_com_transverse
    lam = transverse_eigenvalues(n)[: measured.size]
    target = measured / nu_x

    def residual(x: np.ndarray) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - x[0] ** 2 * lam, 0.0, None)) - target

    ratio_max = (1.0 - 1e-9) / math.sqrt(transverse_eigenvalues(n).max())
    grid = np.geomspace(1e-3 * ratio_max, ratio_max, 600)
    rms = np.array([np.sqrt(np.mean(residual(np.array([x])) ** 2)) for x in grid])
    best = int(np.argmin(rms))
    if best == 0 or best == grid.size - 1:
        raise SearchError(
            "No bracketing interval for the axial frequency",
            details={"best_ratio": float(grid[best]), "edge": "lower" if best == 0 else "upper"},
        )

    result = least_squares(
        residual,
        x0=[grid[best]],
        bounds=([grid[best - 1]], [grid[best + 1]]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        method="trf",
    )
    ratio = float(result.x[0])
    model = nu_x * (residual(result.x) + target)
    rms_hz = float(np.sqrt(np.mean((model - measured) ** 2)))

    logger.info(
        f"Axial fit: nu_axial = {ratio * nu_x / 1e6:.6f} MHz, "
        f"nu_com = {nu_x / 1e6:.4f} MHz, RMS residual = {rms_hz / 1e3:.3f} kHz"
    )
    return AxialFit(
        nu_axial=ratio * nu_x,
        nu_com_transverse=nu_x,
        rms_residual=rms_hz,
        model_frequencies=tuple(float(f) for f in model),
    )


@lru_cache(maxsize=4)
def fitted_five_ion_chain(
    ion_mass: float = YB171_MASS,
    raman_wavevector: float = DEFAULT_RAMAN_WAVEVECTOR,
) -> ModeTable:
    """Mode table of the five-ion chain whose axial frequency is fitted to the measured spectrum."""
    placeholder = TrapParams(
        n_ions=5,
        nu_com_transverse=max(FIVE_ION_SPECTRUM_HZ),
        nu_axial=0.3e6,
        ion_mass=ion_mass,
        raman_wavevector=raman_wavevector,
    )
    fit = fit_axial_frequency(FIVE_ION_SPECTRUM_HZ, placeholder)
    params = dataclasses.replace(placeholder, nu_axial=fit.nu_axial, nu_com_transverse=fit.nu_com_transverse)
    return build_chain(params)


# ==================== Assignment ====================


def assign_ion_for_mode(modes: ModeTable, m: int) -> int:
    """
    Ion with the largest |η_{j,m}|; ties go to the lowest index.

    Example:
        >>> assign_ion_for_mode(fitted_five_ion_chain(), 0)  # middle ion
        2
    """
    if not 0 <= m < modes.n_modes:
        raise ValidationError("Mode index out of range", details={"mode": m, "n_modes": modes.n_modes})
    return select_best_ion(np.abs(modes.lamb_dicke[:, m]))


def assign_ion_for_pair(modes: ModeTable, m: int, n: int) -> int:
    """
    Ion with the largest |η_{j,m} η_{j,n}|; ties go to the lowest index.

    Raises:
        InvalidPairError: If m == n or an index is out of range
    """
    validate_mode_pair(m, n, modes.n_modes)
    eta = modes.lamb_dicke
    return select_best_ion(np.abs(eta[:, m] * eta[:, n]))


# ==================== Scaling studies ====================


def chain_mode_vectors(n_ions: int, spacing_mode: str = "equal") -> np.ndarray:
    """
    Transverse mode vectors from geometry alone, ordered by ascending frequency.

    The vectors depend only on the relative ion positions, so no trap
    frequencies are needed.
    """
    if spacing_mode not in SPACING_MODES:
        raise ValidationError(f"Unknown spacing mode: {spacing_mode}", details={"allowed": SPACING_MODES})
    if spacing_mode == "equal":
        positions = np.arange(n_ions, dtype=float)
    else:
        positions = dimensionless_positions(n_ions)
    lam, vectors = np.linalg.eigh(_coulomb_curvature(positions))
    return _fix_signs(vectors[:, ::-1])


def connectivity_stats(
    n_ions: int,
    spacing_mode: str = "equal",
    params: Optional[TrapParams] = None,
) -> ConnectivityStats:
    """
    Best single-ion coupling product over all mode pairs.

    For every pair (m, n) the best product is max_j |b_{j,m} b_{j,n}|; the
    threshold is 1/N, the squared COM amplitude.

    Args:
        n_ions: Number of ions (>= 2)
        spacing_mode: "harmonic" or "equal"
        params: Optional trap parameters; when given the full mode solve runs
            and instabilities propagate

    Returns:
        ConnectivityStats with fraction, mean and std of the best products
    """
    if n_ions < 2:
        raise ValidationError("Connectivity needs at least two ions", details={"n_ions": n_ions})

    if params is not None:
        chain_params = dataclasses.replace(params, n_ions=n_ions)
        if spacing_mode == "harmonic":
            chain_params = dataclasses.replace(chain_params, fixed_spacing=None)
        elif chain_params.fixed_spacing is None:
            raise ValidationError("Equal spacing needs params.fixed_spacing", details={"spacing_mode": spacing_mode})
        vectors = build_chain(chain_params).mode_vectors
    else:
        vectors = chain_mode_vectors(n_ions, spacing_mode)

    amp = np.abs(vectors)
    best = np.einsum("jm,jn->jmn", amp, amp).max(axis=0)
    upper = best[np.triu_indices(n_ions, k=1)]
    threshold = 1.0 / n_ions

    stats = ConnectivityStats(
        n_ions=n_ions,
        fraction_above_threshold=float(np.mean(upper > threshold)),
        mean_best_product=float(upper.mean()),
        std_best_product=float(upper.std()),
        n_pairs=int(upper.size),
    )
    logger.info(
        f"Connectivity N={n_ions} ({spacing_mode}): fraction={stats.fraction_above_threshold:.4f}, "
        f"mean·N={stats.mean_best_product * n_ions:.3f}, std·N={stats.std_best_product * n_ions:.3f}"
    )
    return stats


def estimate_mode_spacing(nu_com: float, nu_min: float, n_ions: int) -> float:
    """
    Average transverse-mode separation (ν_COM - ν_min) / N.

    Example:
        >>> estimate_mode_spacing(5e6, 1e6, 100)
        40000.0
    """
    if n_ions < 2:
        raise ValidationError("Mode spacing is undefined for a single mode", details={"n_ions": n_ions})
    if nu_min > nu_com:
        raise ValidationError("nu_min exceeds nu_com", details={"nu_min": nu_min, "nu_com": nu_com})
    return (nu_com - nu_min) / n_ions


def nearest_spacing(params: TrapParams) -> float:
    """Smallest ion spacing of the chain (metres)."""
    if params.fixed_spacing is not None:
        return params.fixed_spacing
    positions = equilibrium_positions(params)
    if positions.size < 2:
        raise ValidationError("Spacing is undefined for a single ion")
    return float(np.min(np.diff(positions)))


def infinite_chain_min_frequency(params: TrapParams, spacing: Optional[float] = None) -> float:
    """
    Lowest transverse frequency of an infinite equally spaced chain.

    The zig-zag mode has ω_min² = ω_x² - (7/2) ζ(3) k_e / (m d³).

    Raises:
        InstabilityError: If the chain would buckle
    """
    d = nearest_spacing(params) if spacing is None else spacing
    omega_x = 2.0 * math.pi * params.nu_com_transverse
    omega_sq = omega_x**2 - 3.5 * zeta(3) * COULOMB_CONSTANT / (params.ion_mass * d**3)
    if omega_sq <= 0:
        raise InstabilityError(
            "Infinite chain is unstable at this spacing",
            details={"spacing_m": d, "nu_com": params.nu_com_transverse},
        )
    return math.sqrt(omega_sq) / (2.0 * math.pi)


def spacing_for_min_frequency(nu_com: float, nu_min: float, ion_mass: float = YB171_MASS) -> float:
    """
    Ion spacing (metres) at which an infinite equally spaced chain has its
    lowest transverse mode at nu_min; inverse of infinite_chain_min_frequency.
    """
    if not 0 <= nu_min < nu_com:
        raise ValidationError("nu_min must lie in [0, nu_com)", details={"nu_min": nu_min, "nu_com": nu_com})
    gap = (2.0 * math.pi) ** 2 * (nu_com**2 - nu_min**2)
    return (3.5 * zeta(3) * COULOMB_CONSTANT / (ion_mass * gap)) ** (1.0 / 3.0)


def _exact_spacing(params: TrapParams) -> float:
    modes = build_chain(params)
    return float(modes.frequencies[-1] - modes.frequencies[0]) / params.n_ions


def mode_spacing_scaling(n_range: Iterable[int], params: TrapParams) -> pd.DataFrame:
    """
    Average mode spacing vs ion number.

    Both the analytic estimate (from the infinite-chain minimum) and the
    exact (max - min)/N of the finite chain are reported.

    Returns:
        DataFrame with columns n_ions, spacing_estimate_hz, spacing_exact_hz
    """
    rows: List[Dict[str, float]] = []
    for n in n_range:
        if n < 2:
            raise ValidationError("Mode spacing is undefined for a single ion", details={"n_ions": n})
        chain_params = dataclasses.replace(params, n_ions=int(n))
        nu_min = infinite_chain_min_frequency(chain_params)
        rows.append(
            {
                "n_ions": int(n),
                "spacing_estimate_hz": estimate_mode_spacing(chain_params.nu_com_transverse, nu_min, int(n)),
                "spacing_exact_hz": _exact_spacing(chain_params),
            }
        )
    logger.info(f"Mode spacing scaling computed for {len(rows)} chain sizes")
    return pd.DataFrame(rows, columns=["n_ions", "spacing_estimate_hz", "spacing_exact_hz"])


def bs_duration_for_spacing(spacing_hz: float, r1: float, r2: float, ramp_fraction: float = 0.0) -> float:
    """
    50:50 duration at fixed R1 = Δ/√(c_m c_n) and R2 = δν/Δ.

    With Δ = δν/R2 the rotation θ = 2π c_m c_n T(1-r)/(4Δ) reaches π/4 at
    T = R1² / (2Δ(1 - r)).
    """
    if spacing_hz <= 0 or r1 <= 0 or r2 <= 0:
        raise ValidationError("Spacing, R1 and R2 must be positive", details={"spacing_hz": spacing_hz, "r1": r1, "r2": r2})
    if not 0.0 <= ramp_fraction < 1.0:
        raise ValidationError("ramp_fraction must lie in [0, 1)", details={"ramp_fraction": ramp_fraction})
    detuning = spacing_hz / r2
    return r1**2 / (2.0 * detuning * (1.0 - ramp_fraction))


def bs_duration_scaling(
    n_range: Iterable[int],
    params: TrapParams,
    r1: float,
    r2: float,
    ramp_fraction: float = 0.0,
) -> pd.DataFrame:
    """
    Beam-splitter duration vs ion number at fixed R1/R2.

    Returns:
        DataFrame with columns n_ions, spacing_hz, bs_duration_s
    """
    rows = []
    for n in n_range:
        chain_params = dataclasses.replace(params, n_ions=int(n))
        spacing = _exact_spacing(chain_params)
        rows.append(
            {
                "n_ions": int(n),
                "spacing_hz": spacing,
                "bs_duration_s": bs_duration_for_spacing(spacing, r1, r2, ramp_fraction),
            }
        )
    return pd.DataFrame(rows, columns=["n_ions", "spacing_hz", "bs_duration_s"])


# ==================== Synthetic tables and serialization ====================


def synthetic_mode_table(frequencies: Sequence[float], eta: float) -> ModeTable:
    """
    Mode table with Hadamard mode vectors and one Lamb-Dicke scale.

    Every ion couples to every mode with |η_{j,m}| = eta/√N, which isolates
    the spectral structure in dynamics studies. The uniform column is placed
    on the highest frequency.

    Args:
        frequencies: Ascending mode frequencies in Hz; length must be a power of 2
        eta: Lamb-Dicke scale shared by all modes
    """
    freqs = np.asarray(frequencies, dtype=float)
    n = freqs.size
    if n < 1 or n & (n - 1):
        raise ValidationError("Synthetic tables need a power-of-two mode count", details={"n_modes": n})
    h = hadamard(n).astype(float) / math.sqrt(n)
    vectors = np.concatenate([h[:, 1:], h[:, :1]], axis=1)
    return ModeTable(frequencies=freqs, mode_vectors=vectors, eta_scale=np.full(n, float(eta)))


def mode_table_to_dict(modes: ModeTable, params: Optional[TrapParams] = None) -> dict:
    """JSON document {n_ions, nu_axial_hz, nu_com_hz, positions_m, modes:[{freq_hz, vector, eta}]}."""
    eta = modes.lamb_dicke
    return {
        "n_ions": modes.n_ions,
        "nu_axial_hz": modes.nu_axial if params is None else params.nu_axial,
        "nu_com_hz": float(modes.frequencies[-1]) if params is None else params.nu_com_transverse,
        "positions_m": [] if modes.positions is None else [float(z) for z in modes.positions],
        "modes": [
            {
                "freq_hz": float(modes.frequencies[m]),
                "vector": [float(b) for b in modes.mode_vectors[:, m]],
                "eta": [float(e) for e in eta[:, m]],
            }
            for m in range(modes.n_modes)
        ],
    }


def mode_table_from_dict(data: dict) -> ModeTable:
    """Inverse of mode_table_to_dict; η_m is recovered as Σ_j η_{j,m} b_{j,m}."""
    try:
        entries = data["modes"]
        frequencies = np.array([e["freq_hz"] for e in entries], dtype=float)
        vectors = np.array([e["vector"] for e in entries], dtype=float).T
        eta = np.array([e["eta"] for e in entries], dtype=float).T
    except (KeyError, TypeError) as e:
        raise ValidationError(f"Malformed mode table document: {e}") from e
    positions = data.get("positions_m") or None
    return ModeTable(
        frequencies=frequencies,
        mode_vectors=vectors,
        eta_scale=np.sum(eta * vectors, axis=0),
        positions=None if positions is None else np.asarray(positions, dtype=float),
        nu_axial=data.get("nu_axial_hz"),
    )
