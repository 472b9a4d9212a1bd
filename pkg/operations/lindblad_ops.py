"""
Lindblad Operations for Phononet.

Master-equation propagation of the driven spin-mode system and the noise
budget of a single beam splitter.

Collapse operators, with n_k = a_k† a_k:
    heating            √α_k n_k               (one per mode)
    standard heating   √α_k a_k†, √α_k a_k    (instead of the above)
    motional dephasing Σ_k √κ_k n_k           (collective) or √κ_k n_k per mode
    spin dephasing     √κ_i σ_z               (assisting ion only)
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from config.constants import (
    DEFAULT_R2,
    DEFAULT_RAMP_FRACTION,
    LANDSCAPE_MODE_SPACING_HZ,
    MEASURED_HEATING_RATE,
    MOTIONAL_COHERENCE_TIME,
    SPIN_COHERENCE_TIME,
)
from domain.exceptions import SolverError, StiffnessError, ValidationError
from domain.models import BeamSplitterSpec, DensityTrajectory, ModeTable, NoiseModel, TruncatedHilbert
from domain.validators import validate_density_matrix
from .dynamics_ops import (
    build_drive,
    build_full_hamiltonian,
    hilbert_basis,
    hilbert_state,
    lowering_operator,
    number_operator,
    occupation_distribution,
    sigma_z,
)
from .ionchain_ops import synthetic_mode_table
from .thermometry_ops import thermal_populations

logger = logging.getLogger(__name__)

Hamiltonian = Union[np.ndarray, Callable[[float], np.ndarray]]

ERROR_BUDGET_KINDS = ("heating", "standard-heating", "motional", "spin")
BUDGET_DURATION_S = 250e-6
LINDBLAD_RTOL = 1e-9
LINDBLAD_ATOL = 1e-11
POSITIVITY_TOL = 1e-8
TRACE_WARNING = 1e-8


# ==================== Collapse operators ====================


def collapse_operators(noise: NoiseModel, hilbert: TruncatedHilbert) -> List[np.ndarray]:
    """
    Lindblad operators for the rates that touch the modes and ion in hilbert.

    Raises:
        ValidationError: Standard heating on an excitation-restricted space,
            or spin dephasing without a spin
    """
    basis = hilbert_basis(hilbert)
    operators: List[np.ndarray] = []

    for pos, mode in enumerate(hilbert.modes):
        alpha = noise.heating_rates.get(mode, 0.0)
        if alpha <= 0:
            continue
        if noise.standard_heating:
            if hilbert.excitation_sector is not None:
                raise ValidationError("Standard heating changes the phonon number; drop excitation_sector")
            lower = lowering_operator(basis, pos)
            operators.append(math.sqrt(alpha) * lower.conj().T)
            operators.append(math.sqrt(alpha) * lower)
        else:
            operators.append(math.sqrt(alpha) * number_operator(basis, pos))

    dephasing = [
        (pos, noise.motional_dephasing.get(mode, 0.0))
        for pos, mode in enumerate(hilbert.modes)
        if noise.motional_dephasing.get(mode, 0.0) > 0
    ]
    if dephasing:
        if noise.collective_dephasing:
            operators.append(sum(math.sqrt(kappa) * number_operator(basis, pos) for pos, kappa in dephasing))
        else:
            operators.extend(math.sqrt(kappa) * number_operator(basis, pos) for pos, kappa in dephasing)

    if hilbert.spin_ion is not None:
        kappa_spin = noise.spin_dephasing.get(hilbert.spin_ion, 0.0)
        if kappa_spin > 0:
            if not hilbert.include_spin:
                raise ValidationError("Spin dephasing needs the spin in the Hilbert space")
            operators.append(math.sqrt(kappa_spin) * sigma_z(basis))

    logger.debug(f"{len(operators)} collapse operators on dim {len(basis)}")
    return operators


# ==================== Propagation ====================


def simulate_lindblad(
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    hilbert: TruncatedHilbert,
    rho0: np.ndarray,
    duration: float,
    times: Optional[Sequence[float]] = None,
    rtol: float = LINDBLAD_RTOL,
    atol: float = LINDBLAD_ATOL,
) -> DensityTrajectory:
    """
    Integrate dρ/dt = -i[H, ρ] + Σ (L ρ L† - ½{L†L, ρ}).

    Args:
        hamiltonian: Static matrix or callable H(t), in rad/s
        noise: Rates; an empty model reproduces unitary propagation
        hilbert: Space the operators live on
        rho0: Initial density matrix
        duration: Final time (s)
        times: Output times (default: 101 points over [0, duration])

    Returns:
        DensityTrajectory with the largest trace error and smallest
        eigenvalue seen at the output times

    Raises:
        ValidationError: If rho0 is not a density matrix on hilbert
        StiffnessError: If the integrator fails
        SolverError: If positivity is lost beyond 1e-8
    """
    basis = hilbert_basis(hilbert)
    dim = len(basis)
    rho = validate_density_matrix(rho0)
    if rho.shape != (dim, dim):
        raise ValidationError("Initial density matrix has the wrong dimension", details={"shape": rho.shape, "dim": dim})

    h_of_t = hamiltonian if callable(hamiltonian) else (lambda t, h=np.asarray(hamiltonian, dtype=complex): h)
    jumps = collapse_operators(noise, hilbert)
    damping = sum((op.conj().T @ op for op in jumps), np.zeros((dim, dim), dtype=complex))
    adjoints = [op.conj().T for op in jumps]

    def rhs(t, y):
        r = y.reshape(dim, dim)
        effective = h_of_t(t) - 0.5j * damping
        drho = -1j * (effective @ r - r @ effective.conj().T)
        for op, op_dag in zip(jumps, adjoints):
            drho += op @ r @ op_dag
        return drho.ravel()

    t_eval = np.linspace(0.0, duration, 101) if times is None else np.asarray(times, dtype=float)
    solution = solve_ivp(rhs, (0.0, float(t_eval[-1])), rho.ravel(), method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not solution.success:
        raise StiffnessError("Master-equation integration failed", details={"message": solution.message})

    rhos = solution.y.T.reshape(-1, dim, dim)
    traces = np.real(np.trace(rhos, axis1=1, axis2=2))
    trace_error = float(np.max(np.abs(traces - 1.0)))
    hermitian = 0.5 * (rhos + np.conj(np.transpose(rhos, (0, 2, 1))))
    min_eigenvalue = float(min(np.linalg.eigvalsh(h).min() for h in hermitian))

    if trace_error > TRACE_WARNING:
        logger.warning(f"Trace drift {trace_error:.2e} in master-equation run")
    if min_eigenvalue < -POSITIVITY_TOL:
        raise SolverError("Density matrix lost positivity", details={"min_eigenvalue": min_eigenvalue})

    return DensityTrajectory(
        times=solution.t,
        rhos=rhos,
        trace_error=trace_error,
        min_eigenvalue=min_eigenvalue,
        basis=basis,
    )


def thermal_initial_state(hilbert: TruncatedHilbert, noise: NoiseModel) -> np.ndarray:
    """
    Spin down with each mode in its truncated thermal state (n̄ from noise).

    Raises:
        ValidationError: If hilbert restricts the excitation number
    """
    if hilbert.excitation_sector is not None:
        raise ValidationError("Thermal states mix phonon numbers; drop excitation_sector")
    basis = hilbert_basis(hilbert)
    per_mode = [
        thermal_populations(noise.thermal_nbar.get(mode, 0.0), hilbert.cutoff, check_tail=False)
        for mode in hilbert.modes
    ]
    weights = np.array(
        [0.0 if spin else math.prod(per_mode[pos][n] for pos, n in enumerate(occ)) for spin, occ in basis]
    )
    return np.diag(weights / weights.sum()).astype(complex)


# ==================== Error budget ====================


def budget_splitter(
    duration: float = BUDGET_DURATION_S,
    spacing: float = LANDSCAPE_MODE_SPACING_HZ,
    r2: float = DEFAULT_R2,
    ramp_fraction: float = DEFAULT_RAMP_FRACTION,
) -> Tuple[ModeTable, BeamSplitterSpec]:
    """
    Two equally coupled modes and a 50:50 splitter of the given duration.

    Δ = -spacing/R2; c² = |Δ| / (2T(1 - 1.25r)).
    """
    chain = synthetic_mode_table([2.0e6, 2.0e6 + spacing], 0.05)
    delta = -spacing / r2
    coupling = math.sqrt(abs(delta) / (2.0 * duration * (1.0 - 1.25 * ramp_fraction)))
    spec = BeamSplitterSpec(
        0, 1, 0, math.pi / 4,
        delta_bs=delta, coupling_m=coupling, coupling_n=coupling,
        duration=duration, ramp_fraction=ramp_fraction,
    )
    return chain, spec


def _budget_hilbert(noise: NoiseModel) -> TruncatedHilbert:
    return TruncatedHilbert.for_phonons(
        (0, 1), 1, guard=1, include_spin=True,
        conserve_excitations=not noise.standard_heating, spin_ion=0,
    )


def _driven_distribution(trajectory: DensityTrajectory) -> dict:
    return occupation_distribution(np.real(np.diag(trajectory.final)), trajectory.basis)


def noisy_bs_error(
    noise: NoiseModel,
    duration: float = BUDGET_DURATION_S,
    spacing: float = LANDSCAPE_MODE_SPACING_HZ,
    r2: float = DEFAULT_R2,
    ramp_fraction: float = DEFAULT_RAMP_FRACTION,
) -> float:
    """
    Population error added by noise to one 50:50 splitter.

    The phonon starts in mode 0 with the spin down; the error is the total
    variation distance between the noisy and noiseless mode distributions.
    """
    chain, spec = budget_splitter(duration, spacing, r2, ramp_fraction)
    hilbert = _budget_hilbert(noise)
    drive = build_drive(spec, chain, include_carrier=False)
    hamiltonian = build_full_hamiltonian(drive, chain, hilbert)
    psi0 = hilbert_state(hilbert, {(0, (1, 0)): 1.0})
    rho0 = np.outer(psi0, psi0.conj())

    ideal = simulate_lindblad(hamiltonian, NoiseModel(), hilbert, rho0, duration, times=[0.0, duration])
    noisy = simulate_lindblad(hamiltonian, noise, hilbert, rho0, duration, times=[0.0, duration])
    p, q = _driven_distribution(ideal), _driven_distribution(noisy)
    return 0.5 * float(sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q)))


def noise_for_kind(kind: str, rate: float, collective: bool = False) -> NoiseModel:
    """NoiseModel with one channel switched on at rate on both modes (or the ion)."""
    if kind == "heating":
        return NoiseModel(heating_rates={0: rate, 1: rate})
    if kind == "standard-heating":
        return NoiseModel(heating_rates={0: rate, 1: rate}, standard_heating=True)
    if kind == "motional":
        return NoiseModel(motional_dephasing={0: rate, 1: rate}, collective_dephasing=collective)
    if kind == "spin":
        return NoiseModel(spin_dephasing={0: rate})
    raise ValidationError("Unknown error-budget kind", details={"kind": kind, "allowed": ERROR_BUDGET_KINDS})


def measured_noise_model() -> NoiseModel:
    """Heating 30 quanta/s, 10 ms motional and 100 ms spin coherence."""
    return NoiseModel(
        heating_rates={0: MEASURED_HEATING_RATE, 1: MEASURED_HEATING_RATE},
        motional_dephasing={0: 1.0 / MOTIONAL_COHERENCE_TIME, 1: 1.0 / MOTIONAL_COHERENCE_TIME},
        spin_dephasing={0: 1.0 / SPIN_COHERENCE_TIME},
        collective_dephasing=False,
    )


def _budget_worker(args: Tuple[str, float, bool, float]) -> float:
    kind, rate, collective, duration = args
    return noisy_bs_error(noise_for_kind(kind, rate, collective), duration=duration)


def error_budget(
    kind: str,
    rates: Sequence[float],
    collective: bool = False,
    duration: float = BUDGET_DURATION_S,
    max_workers: Optional[int] = 1,
) -> pd.DataFrame:
    """
    Beam-splitter population error vs the rate of one noise channel.

    Motional dephasing uses independent per-mode operators unless collective
    is set; the collective operator barely acts in the one-phonon sector.

    Returns:
        DataFrame with columns rate, error
    """
    if kind not in ERROR_BUDGET_KINDS:
        raise ValidationError("Unknown error-budget kind", details={"kind": kind, "allowed": ERROR_BUDGET_KINDS})
    jobs = [(kind, float(rate), collective, duration) for rate in rates]
    if max_workers == 1:
        errors = [_budget_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            errors = list(pool.map(_budget_worker, jobs))
    logger.info(f"Error budget '{kind}': {len(jobs)} rates, max error {max(errors, default=0.0):.2e}")
    return pd.DataFrame({"rate": [job[1] for job in jobs], "error": errors}, columns=["rate", "error"])
