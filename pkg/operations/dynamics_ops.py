"""
Dynamics Operations for Phononet.

Time-domain simulation of the bichromatic Raman drive on one assisting ion
and its transverse modes, without adiabatic elimination of the spin.

The Hilbert space is a spin (optional) times truncated mode ladders. Basis
states are (spin, occupation) with spin 0 = ↓ and 1 = ↑; spin is the outer
index and occupations run in descending order inside each spin block.

In the interaction picture of the qubit and the modes, with tones at
f_q - f_0 = qubit + δ_q,

    H(t)/ħ = env(t) Σ_q [ π Ω_q e^{iφ_q} σ+ e^{-i 2π (f_q - f_0 - qubit) t}
                        + Σ_k i π Ω_q η_{j,k} e^{iφ_q} σ+ a_k e^{-i 2π (f_q - f_0 - qubit + ν_k) t} ]
             + h.c.

in rad/s. The first term is the carrier and is dropped when the drive
excludes it.
"""

import dataclasses
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from config.constants import (
    LANDSCAPE_MODE_SPACING_HZ,
    LEAKAGE_TOL,
    ODE_ATOL,
    ODE_RTOL,
    YB171_QUBIT_FREQUENCY_HZ,
)
from domain.exceptions import (
    FitError,
    IncompleteSpecError,
    SearchError,
    StiffnessError,
    TruncationError,
    ValidationError,
)
from domain.models import (
    BeamSplitterSpec,
    DriveSpec,
    FidelityDecayFit,
    ModeTable,
    Occupation,
    Trajectory,
    TruncatedHilbert,
)
from domain.validators import validate_ion_index, validate_probability_vector
from .ionchain_ops import synthetic_mode_table
from .network_ops import ac_stark_shifts, spin_eigenvalue, tone_rabi_frequencies
from .pulse_ops import pulse_area_factor, pulse_envelope

logger = logging.getLogger(__name__)

BasisState = Tuple[int, Occupation]

NORM_DRIFT_WARNING = 1e-9


# ==================== Hilbert space ====================


def hilbert_basis(hilbert: TruncatedHilbert) -> Tuple[BasisState, ...]:
    """
    Ordered basis of the truncated space.

    Example:
        >>> hilbert_basis(TruncatedHilbert(modes=(0, 1), cutoff=1, excitation_sector=1))
        ((0, (1, 0)), (0, (0, 1)), (1, (0, 0)))
    """
    spins = (0, 1) if hilbert.include_spin else (0,)
    levels = range(hilbert.cutoff, -1, -1)
    basis: List[BasisState] = []
    for spin in spins:
        for occ in itertools.product(levels, repeat=hilbert.n_modes):
            if hilbert.excitation_sector is not None and sum(occ) + spin != hilbert.excitation_sector:
                continue
            basis.append((spin, tuple(occ)))
    if not basis:
        raise ValidationError("Truncated Hilbert space is empty", details={"hilbert": hilbert})
    return tuple(basis)


def _basis_index(basis: Sequence[BasisState]) -> Dict[BasisState, int]:
    return {state: i for i, state in enumerate(basis)}


def _operator(
    basis: Sequence[BasisState],
    action: Callable[[int, Occupation], Optional[Tuple[float, int, Occupation]]],
) -> np.ndarray:
    """Matrix of a map |s, ν⟩ -> coef |s', ν'⟩; targets outside the basis are dropped."""
    index = _basis_index(basis)
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, (spin, occ) in enumerate(basis):
        result = action(spin, occ)
        if result is None:
            continue
        coef, new_spin, new_occ = result
        row = index.get((new_spin, new_occ))
        if row is not None:
            matrix[row, col] += coef
    return matrix


def lowering_operator(basis: Sequence[BasisState], position: int) -> np.ndarray:
    """a_k for the mode at position in the Hilbert mode list."""

    def action(spin, occ):
        if occ[position] == 0:
            return None
        lowered = occ[:position] + (occ[position] - 1,) + occ[position + 1 :]
        return math.sqrt(occ[position]), spin, lowered

    return _operator(basis, action)


def number_operator(basis: Sequence[BasisState], position: int) -> np.ndarray:
    return np.diag([float(occ[position]) for _, occ in basis]).astype(complex)


def sigma_plus(basis: Sequence[BasisState]) -> np.ndarray:
    return _operator(basis, lambda spin, occ: (1.0, 1, occ) if spin == 0 else None)


def sigma_z(basis: Sequence[BasisState]) -> np.ndarray:
    return np.diag([1.0 if spin else -1.0 for spin, _ in basis]).astype(complex)


def sideband_operator(basis: Sequence[BasisState], position: int) -> np.ndarray:
    """σ+ a_k: absorb a phonon of mode k while flipping the spin up."""

    def action(spin, occ):
        if spin != 0 or occ[position] == 0:
            return None
        lowered = occ[:position] + (occ[position] - 1,) + occ[position + 1 :]
        return math.sqrt(occ[position]), 1, lowered

    return _operator(basis, action)


def hilbert_state(hilbert: TruncatedHilbert, amplitudes: Mapping[BasisState, complex]) -> np.ndarray:
    """
    Normalized state vector from {(spin, occupation): amplitude}.

    Raises:
        ValidationError: Unknown basis state or zero norm
    """
    basis = hilbert_basis(hilbert)
    index = _basis_index(basis)
    psi = np.zeros(len(basis), dtype=complex)
    for (spin, occ), amp in amplitudes.items():
        key = (int(spin), tuple(int(n) for n in occ))
        if key not in index:
            raise ValidationError("State outside the truncated space", details={"state": key})
        psi[index[key]] += amp
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValidationError("State has zero norm")
    return psi / norm


def state_mode_populations(states: np.ndarray, basis: Sequence[BasisState]) -> np.ndarray:
    """⟨n_k⟩ per Hilbert mode for one state or a stack of states (last axis = basis)."""
    occupations = np.array([occ for _, occ in basis], dtype=float)
    return (np.abs(states) ** 2) @ occupations


def occupation_distribution(probabilities: np.ndarray, basis: Sequence[BasisState]) -> Dict[Occupation, float]:
    """Basis probabilities marginalized over the spin."""
    distribution: Dict[Occupation, float] = {}
    for (_, occ), p in zip(basis, probabilities):
        distribution[occ] = distribution.get(occ, 0.0) + float(p)
    return distribution


# ==================== Hamiltonian ====================


def _check_drive(drive: DriveSpec, chain: ModeTable, hilbert: TruncatedHilbert) -> None:
    validate_ion_index(drive.ion_j, chain.n_ions)
    for mode in hilbert.modes:
        if not 0 <= mode < chain.n_modes:
            raise ValidationError("Hilbert mode outside the chain", details={"mode": mode, "n_modes": chain.n_modes})
    if not hilbert.include_spin:
        raise ValidationError("Time-domain drive needs the spin in the Hilbert space")
    if hilbert.excitation_sector is not None and drive.include_carrier:
        raise ValidationError("Carrier terms break excitation-number conservation; drop excitation_sector")


def build_full_hamiltonian(
    drive: DriveSpec,
    chain: ModeTable,
    hilbert: TruncatedHilbert,
) -> Callable[[float], np.ndarray]:
    """
    Time-dependent interaction Hamiltonian H(t) in rad/s.

    Args:
        drive: Tones, Rabi frequencies, phases and envelope
        chain: Mode table supplying ν_k and η_{j,k}
        hilbert: Truncated space with the spin included

    Returns:
        Callable t -> Hermitian dim×dim matrix

    Raises:
        ValidationError: Inconsistent drive/space, or carrier terms in an
            excitation-conserving space
    """
    _check_drive(drive, chain, hilbert)
    basis = hilbert_basis(hilbert)
    eta = chain.lamb_dicke[drive.ion_j]

    operators: List[np.ndarray] = []
    amplitudes: List[complex] = []
    angular: List[float] = []
    sp = sigma_plus(basis)
    sidebands = [sideband_operator(basis, pos) for pos in range(hilbert.n_modes)]

    for tone, rabi, phase in zip(drive.tone_frequencies, drive.rabi_frequencies, drive.phases):
        if rabi == 0.0:
            continue
        half_rabi = math.pi * rabi
        offset = tone - drive.qubit_frequency
        if drive.include_carrier:
            operators.append(sp)
            amplitudes.append(half_rabi * np.exp(1j * phase))
            angular.append(2.0 * math.pi * offset)
        for pos, mode in enumerate(hilbert.modes):
            if eta[mode] == 0.0:
                continue
            operators.append(sidebands[pos])
            amplitudes.append(1j * half_rabi * eta[mode] * np.exp(1j * phase))
            angular.append(2.0 * math.pi * (offset + chain.frequencies[mode]))

    dim = len(basis)
    if not operators:
        zero = np.zeros((dim, dim), dtype=complex)
        return lambda t: zero

    stack = np.array(operators)
    amps = np.array(amplitudes)
    omegas = np.array(angular)

    def hamiltonian(t: float) -> np.ndarray:
        env = pulse_envelope(t, drive.duration, drive.ramp_fraction)
        if env == 0.0:
            return np.zeros((dim, dim), dtype=complex)
        coeff = env * amps * np.exp(-1j * omegas * t)
        h = np.tensordot(coeff, stack, axes=1)
        return h + h.conj().T

    logger.debug(f"Hamiltonian: {len(operators)} terms on dim {dim}")
    return hamiltonian


def build_drive(
    spec: BeamSplitterSpec,
    chain: ModeTable,
    include_carrier: bool = True,
    compensate_stark: bool = True,
    qubit_frequency: float = YB171_QUBIT_FREQUENCY_HZ,
    iterations: int = 3,
) -> DriveSpec:
    """
    Two-tone drive realizing a beam splitter.

    Tone q sits at qubit + Δ - ν_q. With compensation the tone of mode m is
    moved by x = σ_z (ω'_m - ω'_n), iterated since the shifts depend on x.
    Phases are (0, φ_bs).

    Raises:
        IncompleteSpecError: If the splitter lacks physical parameters
    """
    if not spec.has_physical:
        raise IncompleteSpecError("Drive needs delta_bs, couplings and duration", details={"modes": spec.modes})
    validate_ion_index(spec.ion_j, chain.n_ions)
    rabi_m, rabi_n = tone_rabi_frequencies(spec, chain)
    nu_m = chain.frequencies[spec.mode_m]
    nu_n = chain.frequencies[spec.mode_n]

    offset = 0.0
    if compensate_stark:
        sigma = spin_eigenvalue(spec)
        for _ in range(iterations):
            shifts = ac_stark_shifts(spec, chain, offset_m=offset)
            offset = sigma * (shifts[spec.mode_m] - shifts[spec.mode_n])
        logger.debug(f"Stark frequency compensation on mode {spec.mode_m}: {offset:+.3f} Hz")

    return DriveSpec(
        ion_j=spec.ion_j,
        target_modes=spec.modes,
        tone_frequencies=(
            qubit_frequency + spec.delta_bs - nu_m + offset,
            qubit_frequency + spec.delta_bs - nu_n,
        ),
        rabi_frequencies=(rabi_m, rabi_n),
        phases=(0.0, spec.phi_bs),
        duration=spec.duration,
        ramp_fraction=spec.ramp_fraction,
        qubit_frequency=qubit_frequency,
        include_carrier=include_carrier,
    )


# ==================== Integration ====================


def _initial_vector(initial_state, hilbert: TruncatedHilbert, dim: int) -> np.ndarray:
    if isinstance(initial_state, Mapping):
        return hilbert_state(hilbert, initial_state)
    psi = np.asarray(initial_state, dtype=complex)
    if psi.shape != (dim,):
        raise ValidationError("Initial state has the wrong dimension", details={"shape": psi.shape, "dim": dim})
    return psi / np.linalg.norm(psi)


def _check_cutoff(psi: np.ndarray, basis: Sequence[BasisState], hilbert: TruncatedHilbert) -> None:
    populated = [sum(occ) for (_, occ), amp in zip(basis, psi) if abs(amp) > 0]
    n_phonons = max(populated) if populated else 0
    if hilbert.cutoff < n_phonons + 1:
        raise ValidationError(
            "Cutoff must exceed the initial phonon number",
            details={"cutoff": hilbert.cutoff, "n_phonons": n_phonons},
        )


def _top_level_mask(basis: Sequence[BasisState], cutoff: int) -> np.ndarray:
    return np.array([any(n == cutoff for n in occ) for _, occ in basis])


def simulate_bs_full(
    drive: DriveSpec,
    chain: ModeTable,
    hilbert: TruncatedHilbert,
    initial_state,
    times: Optional[Sequence[float]] = None,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
) -> Trajectory:
    """
    Integrate the Schrödinger equation under the full drive.

    Args:
        drive: Drive to apply over [0, duration]
        chain: Mode table
        hilbert: Truncated space (spin included)
        initial_state: State vector or {(spin, occupation): amplitude}
        times: Sample times (default: 201 points over the pulse)
        rtol, atol: DOP853 tolerances

    Returns:
        Trajectory with θ(t) = atan2(√⟨n_n⟩, √⟨n_m⟩) for the first two
        target modes

    Raises:
        ValidationError: Cutoff below N + 1 or inconsistent inputs
        StiffnessError: If the integrator fails
        TruncationError: If the top level of any mode exceeds 1e-6 population
    """
    hamiltonian = build_full_hamiltonian(drive, chain, hilbert)
    basis = hilbert_basis(hilbert)
    psi0 = _initial_vector(initial_state, hilbert, len(basis))
    _check_cutoff(psi0, basis, hilbert)

    t_eval = np.linspace(0.0, drive.duration, 201) if times is None else np.asarray(times, dtype=float)
    t_end = max(drive.duration, float(t_eval[-1]))

    def rhs(t, y):
        return -1j * (hamiltonian(t) @ y)

    solution = solve_ivp(rhs, (0.0, t_end), psi0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not solution.success:
        raise StiffnessError("Time-domain integration failed", details={"message": solution.message})
    states = solution.y.T

    norms = np.linalg.norm(states, axis=1)
    norm_drift = float(np.max(np.abs(norms - 1.0)))
    if norm_drift > NORM_DRIFT_WARNING:
        logger.warning(f"Norm drift {norm_drift:.2e} during drive on modes {drive.target_modes}")

    top = _top_level_mask(basis, hilbert.cutoff)
    leakage = float(np.max(np.sum(np.abs(states[:, top]) ** 2, axis=1))) if top.any() else 0.0
    if leakage > LEAKAGE_TOL:
        raise TruncationError(
            "Population reached the truncation level",
            details={"max_leakage": leakage, "cutoff": hilbert.cutoff},
        )

    populations = state_mode_populations(states, basis)
    if len(drive.target_modes) >= 2 and all(m in hilbert.modes for m in drive.target_modes[:2]):
        pos_m = hilbert.position_of(drive.target_modes[0])
        pos_n = hilbert.position_of(drive.target_modes[1])
        theta = np.arctan2(np.sqrt(populations[:, pos_n]), np.sqrt(populations[:, pos_m]))
    else:
        theta = np.full(len(t_eval), np.nan)

    return Trajectory(
        times=solution.t,
        states=states,
        theta=theta,
        norm_drift=norm_drift,
        max_leakage=leakage,
        basis=basis,
    )


def single_phonon_hilbert(modes: Sequence[int], spin_ion: Optional[int] = None) -> TruncatedHilbert:
    """Spin plus modes restricted to one excitation; cutoff 2."""
    return TruncatedHilbert.for_phonons(modes, 1, guard=1, include_spin=True, conserve_excitations=True, spin_ion=spin_ion)


def simulated_bs_angle(
    spec: BeamSplitterSpec,
    chain: ModeTable,
    hilbert: Optional[TruncatedHilbert] = None,
    include_carrier: bool = False,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
) -> Tuple[float, Trajectory]:
    """
    Final mixing angle for one phonon starting in mode m with the spin down.
    """
    hilbert = hilbert or single_phonon_hilbert(spec.modes, spin_ion=spec.ion_j)
    drive = build_drive(spec, chain, include_carrier=include_carrier)
    start = tuple(1 if mode == spec.mode_m else 0 for mode in hilbert.modes)
    trajectory = simulate_bs_full(drive, chain, hilbert, {(0, start): 1.0}, times=[0.0, spec.duration], rtol=rtol, atol=atol)
    return float(trajectory.theta[-1]), trajectory


# ==================== Analytic references ====================


def adiabatic_bs_angle(spec: BeamSplitterSpec) -> float:
    """
    Mixing angle from adiabatic following of the three-level system
    {|↓,1_m⟩, |↓,1_n⟩, |↑,0⟩}, valid beyond the perturbative regime.

    With g = π|c| (rad/s), G = √(g_m² + g_n²) and D = 2π|Δ|, the bright
    state acquires the phase χ = ∫ (√(D² + 4G²env²) - D)/2 dt relative to
    the dark state, and θ = asin(2 g_m g_n/G² · |sin(χ/2)|).
    """
    if not spec.has_physical:
        raise IncompleteSpecError("Adiabatic angle needs physical parameters", details={"modes": spec.modes})
    g_m = math.pi * abs(spec.coupling_m)
    g_n = math.pi * abs(spec.coupling_n)
    g_total = math.hypot(g_m, g_n)
    if g_total == 0.0:
        return 0.0
    d = 2.0 * math.pi * abs(spec.delta_bs)

    def bright_shift(t: float) -> float:
        g = g_total * pulse_envelope(t, spec.duration, spec.ramp_fraction)
        return 0.5 * (math.sqrt(d * d + 4.0 * g * g) - d)

    ramp = spec.ramp_fraction * spec.duration
    breaks = [ramp, spec.duration - ramp] if ramp > 0 else None
    chi, _ = quad(bright_shift, 0.0, spec.duration, points=breaks, limit=200)
    amplitude = 2.0 * g_m * g_n / g_total**2 * abs(math.sin(0.5 * chi))
    return math.asin(min(amplitude, 1.0))


def duration_for_angle(
    coupling_m: float,
    coupling_n: float,
    delta: float,
    theta: float = math.pi / 4,
    ramp_fraction: float = 0.0,
) -> float:
    """
    Pulse duration giving mixing angle theta in the perturbative limit,
    using the Ω² pulse area 1 - 1.25·r.
    """
    rate = 2.0 * math.pi * abs(coupling_m * coupling_n) / (4.0 * abs(delta))
    return theta / (rate * pulse_area_factor(ramp_fraction, power=2))


# ==================== Calibration ====================


def calibrate_ramp_fraction(
    spec: BeamSplitterSpec,
    chain: ModeTable,
    target: float = math.pi / 4,
    hilbert: Optional[TruncatedHilbert] = None,
    include_carrier: bool = False,
    bracket: Tuple[float, float] = (0.0, 0.5),
    xtol: float = 1e-4,
) -> float:
    """
    Ramp fraction at which the simulated mixing angle equals target, with
    duration and couplings fixed.

    Raises:
        SearchError: If the angle does not cross target inside the bracket
    """

    def mismatch(r: float) -> float:
        angle, _ = simulated_bs_angle(
            dataclasses.replace(spec, ramp_fraction=float(r)),
            chain,
            hilbert=hilbert,
            include_carrier=include_carrier,
        )
        return angle - target

    low, high = bracket
    f_low, f_high = mismatch(low), mismatch(high)
    if f_low * f_high > 0:
        raise SearchError(
            "Mixing angle does not cross the target over the ramp bracket",
            details={"bracket": bracket, "mismatch": (f_low, f_high)},
        )
    root = brentq(mismatch, low, high, xtol=xtol)
    logger.info(f"Calibrated ramp fraction {root:.4f} for splitter {spec.modes}")
    return float(root)


def calibrate_duration(
    spec: BeamSplitterSpec,
    chain: ModeTable,
    target: float = math.pi / 4,
    hilbert: Optional[TruncatedHilbert] = None,
    include_carrier: bool = False,
    scale_bracket: Tuple[float, float] = (0.6, 2.0),
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
) -> float:
    """
    Duration at which the simulated mixing angle equals target.

    The bracket is relative to the perturbative duration for the spec's
    couplings and ramp fraction.

    Raises:
        SearchError: If the angle does not cross target inside the bracket
    """
    base = duration_for_angle(spec.coupling_m, spec.coupling_n, spec.delta_bs, target, spec.ramp_fraction)

    def mismatch(duration: float) -> float:
        trial = dataclasses.replace(spec, duration=float(duration))
        angle, _ = simulated_bs_angle(trial, chain, hilbert=hilbert, include_carrier=include_carrier, rtol=rtol, atol=atol)
        return angle - target

    low, high = scale_bracket[0] * base, scale_bracket[1] * base
    f_low, f_high = mismatch(low), mismatch(high)
    if f_low * f_high > 0:
        raise SearchError(
            "Mixing angle does not cross the target over the duration bracket",
            details={"bracket_s": (low, high), "mismatch": (f_low, f_high)},
        )
    return float(brentq(mismatch, low, high, xtol=1e-4 * base))


# ==================== Fidelity landscape ====================


def landscape_chain(n_modes: int = 4, spacing: float = LANDSCAPE_MODE_SPACING_HZ, eta: float = 0.05) -> ModeTable:
    """Equally spaced synthetic modes with equal coupling on ion 0."""
    frequencies = 2.0e6 + spacing * np.arange(n_modes)
    return synthetic_mode_table(frequencies, eta)


def landscape_point(
    r1: float,
    r2: float,
    chain: Optional[ModeTable] = None,
    driven: Tuple[int, int] = (1, 2),
    spacing: float = LANDSCAPE_MODE_SPACING_HZ,
    ramp_fraction: float = 0.5,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> Dict[str, float]:
    """
    Fidelity of a calibrated 50:50 splitter at coupling ratio R1 = |Δ|/c
    and detuning ratio R2 = spacing/|Δ|.

    The phonon starts in the first driven mode; fidelity is the population
    left in |↓, 1⟩ of the two driven modes.
    """
    chain = chain or landscape_chain(spacing=spacing)
    delta = -spacing / r2
    coupling = abs(delta) / r1
    duration = duration_for_angle(coupling, coupling, delta, ramp_fraction=ramp_fraction)
    spec = BeamSplitterSpec(
        driven[0], driven[1], 0, math.pi / 4,
        delta_bs=delta, coupling_m=coupling, coupling_n=coupling,
        duration=duration, ramp_fraction=ramp_fraction,
    )
    hilbert = single_phonon_hilbert(tuple(range(chain.n_modes)), spin_ion=0)
    calibrated = calibrate_duration(spec, chain, hilbert=hilbert, rtol=rtol, atol=atol)
    _, trajectory = simulated_bs_angle(
        dataclasses.replace(spec, duration=calibrated),
        chain, hilbert=hilbert, rtol=rtol, atol=atol,
    )
    probabilities = np.abs(trajectory.final_state) ** 2
    fidelity = 0.0
    for (spin, occ), p in zip(trajectory.basis, probabilities):
        if spin == 0 and sum(occ) == 1 and any(occ[hilbert.position_of(m)] == 1 for m in driven):
            fidelity += float(p)
    return {"R1": float(r1), "R2": float(r2), "fidelity": fidelity, "duration_s": calibrated}


def _landscape_worker(args: Tuple[float, float]) -> Dict[str, float]:
    return landscape_point(*args)


def fidelity_landscape(
    r1_values: Sequence[float],
    r2_values: Sequence[float],
    max_workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Calibrated beam-splitter fidelity over a grid of (R1, R2).

    Four equally spaced modes are simulated with the drive on the middle
    two; every grid point gets its own duration calibration.

    Returns:
        DataFrame with columns R1, R2, fidelity, duration_s (R1 outer)
    """
    grid = [(float(a), float(b)) for a in r1_values for b in r2_values]
    if not grid:
        raise ValidationError("Empty landscape grid")
    logger.info(f"Fidelity landscape over {len(grid)} points")
    if max_workers == 1:
        rows = [_landscape_worker(point) for point in grid]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_landscape_worker, grid))
    return pd.DataFrame(rows, columns=["R1", "R2", "fidelity", "duration_s"])


# ==================== Fidelity measures ====================


def population_fidelity(p: Sequence[float], q: Sequence[float]) -> float:
    """
    Classical fidelity (Σ √(p_i q_i))² of two population vectors.

    Example:
        >>> population_fidelity([0.5, 0.5], [0.5, 0.5])
        1.0
    """
    p_arr = validate_probability_vector(p, name="p")
    q_arr = validate_probability_vector(q, name="q")
    if p_arr.shape != q_arr.shape:
        raise ValidationError("Population vectors differ in length", details={"p": p_arr.size, "q": q_arr.size})
    return float(np.sum(np.sqrt(p_arr * q_arr)) ** 2)


def fit_fidelity_decay(
    times: Sequence[float],
    fidelities: Sequence[float],
    t_bs: Optional[float] = None,
) -> FidelityDecayFit:
    """
    Least-squares line F(t) = f_ini + ε·t through fidelities vs pulse time.

    Raises:
        FitError: Fewer than three points or no spread in t
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(fidelities, dtype=float)
    if t.size != f.size or t.size < 3:
        raise FitError("Fidelity decay needs at least three (t, F) points", details={"n_times": t.size, "n_fidelities": f.size})
    if np.ptp(t) == 0:
        raise FitError("Fidelity decay needs distinct times")
    slope, intercept = np.polyfit(t, f, 1)
    at_bs = float(intercept + slope * t_bs) if t_bs is not None else None
    return FidelityDecayFit(f_ini=float(intercept), epsilon=float(slope), f_at_t_bs=at_bs)
