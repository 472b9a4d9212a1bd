"""
Network Operations for Phononet.

Beam splitters from physical parameters, interferometer composition,
ac-Stark shifts and their phase compensation, plus the scans used to
characterize single splitters and small interferometers.

The 2×2 block on modes (m, n) is
    [[cos θ,            i s e^{+iφ} sin θ],
     [i s e^{-iφ} sin θ, cos θ           ]]
with s the spin sign; it equals exp(i θ s [[0, e^{iφ}], [e^{-iφ}, 0]]).
"""

import dataclasses
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config.constants import (
    CALIBRATED_BEAM_SPLITTERS,
    CALIBRATED_DETUNING_HZ,
    TOMOGRAPHY_SETTING,
)
from domain.exceptions import IncompleteSpecError, ResonanceError, ValidationError
from domain.models import BeamSplitterSpec, DensityMatrix, FockSector, FockState, InterferometerConfig, ModeTable
from domain.rules import mode_pair_key
from domain.validators import validate_ion_index
from .fock_ops import density_from_state, enumerate_basis, fock_state, lift_unitary, output_probabilities
from .pulse_ops import pulse_area_factor, ramp_fraction_for_area

logger = logging.getLogger(__name__)


# ==================== Beam splitters ====================


def _require_physical(spec: BeamSplitterSpec) -> None:
    if not spec.has_physical:
        missing = [
            name
            for name in ("delta_bs", "coupling_m", "coupling_n", "duration")
            if getattr(spec, name) is None
        ]
        raise IncompleteSpecError(
            "Beam splitter lacks physical parameters",
            details={"modes": spec.modes, "missing": missing},
        )


def square_pulse_angle(spec: BeamSplitterSpec) -> float:
    """Mixing angle the drive would reach with square edges (ramp_fraction = 0)."""
    _require_physical(spec)
    if spec.delta_bs == 0:
        raise ResonanceError("Beam-splitter detuning is zero", details={"modes": spec.modes})
    return 2.0 * math.pi * abs(spec.coupling_m * spec.coupling_n) * spec.duration / (4.0 * abs(spec.delta_bs))


def bs_angle_from_params(spec: BeamSplitterSpec) -> float:
    """
    Mixing angle from drive parameters.

    θ = 2π |c_m c_n| T_eff / (4 |Δ|), with couplings c = ηΩ/2π and Δ in
    Hz; the 2π converts once to angular units. The coupling is quadratic in
    the Rabi envelope, so T_eff = T·(1 - 1.25 r) is the area of the squared
    raised-sine envelope, the same area the time-domain model integrates.
    Coupling signs are absorbed into the phase.

    Raises:
        IncompleteSpecError: If physical parameters are missing
        ResonanceError: If delta_bs == 0

    Example:
        >>> spec = reference_beam_splitter((1, 2))
        >>> bs_angle_from_params(spec)  # ≈ π/4
    """
    return square_pulse_angle(spec) * pulse_area_factor(spec.ramp_fraction, power=2)


def check_angle_consistency(spec: BeamSplitterSpec, rel_tol: float = 1e-6) -> Optional[float]:
    """
    Relative mismatch between theta_bs and the angle implied by the drive.

    Returns None for specs without physical parameters; logs a warning when
    the mismatch exceeds rel_tol.
    """
    if not spec.has_physical:
        return None
    implied = bs_angle_from_params(spec)
    scale = max(abs(spec.theta_bs), 1e-300)
    mismatch = abs(abs(spec.theta_bs) - implied) / scale
    if mismatch > rel_tol:
        logger.warning(
            f"Beam splitter {spec.modes}: theta_bs={spec.theta_bs:.6f} but drive implies {implied:.6f} "
            f"(relative mismatch {mismatch:.2e})"
        )
    return mismatch


def bs_mode_unitary(spec: BeamSplitterSpec, n_modes: int) -> np.ndarray:
    """M×M unitary: identity except the (m, n) block."""
    if max(spec.mode_m, spec.mode_n) >= n_modes:
        raise ValidationError("Beam splitter mode out of range", details={"modes": spec.modes, "n_modes": n_modes})
    u = np.eye(n_modes, dtype=complex)
    m, n = spec.mode_m, spec.mode_n
    c, s = math.cos(spec.theta_bs), math.sin(spec.theta_bs)
    u[m, m] = c
    u[n, n] = c
    u[m, n] = 1j * spec.spin_sign * np.exp(1j * spec.phi_bs) * s
    u[n, m] = 1j * spec.spin_sign * np.exp(-1j * spec.phi_bs) * s
    return u


def compose_interferometer(config: InterferometerConfig) -> np.ndarray:
    """
    Ordered product of beam-splitter unitaries; the first listed acts first.

    Example:
        >>> compose_interferometer(InterferometerConfig(n_modes=2))
        array([[1.+0.j, 0.+0.j],
               [0.+0.j, 1.+0.j]])
    """
    u = np.eye(config.n_modes, dtype=complex)
    for spec in config.splitters:
        u = bs_mode_unitary(spec, config.n_modes) @ u
    return u


def interferometer_fock_operator(config: InterferometerConfig, sector: FockSector) -> np.ndarray:
    """
    U_IFO on a sector, the adjoint of the lifted forward propagator.

    Probabilities follow as diag(U_IFO† ρ' U_IFO).
    """
    if sector.n_modes != config.n_modes:
        raise ValidationError("Sector and interferometer mode counts differ", details={"sector": sector.n_modes, "config": config.n_modes})
    return lift_unitary(compose_interferometer(config), sector).conj().T


def network_probabilities(
    config: InterferometerConfig,
    state: Union[FockState, DensityMatrix],
    convention: str = "adjoint",
) -> np.ndarray:
    """
    Output probabilities of a state sent through an interferometer.

    "adjoint" uses U_IFO with diag(U† ρ U); "forward" uses the forward
    propagator with diag(U ρ U†). Both describe the same physical process.
    """
    rho = density_from_state(state) if isinstance(state, FockState) else state
    if convention == "forward":
        return output_probabilities(rho, lift_unitary(compose_interferometer(config), rho.sector), convention="forward")
    return output_probabilities(rho, interferometer_fock_operator(config, rho.sector), convention=convention)


# ==================== ac Stark shifts ====================


def tone_rabi_frequencies(spec: BeamSplitterSpec, modes: ModeTable) -> Tuple[float, float]:
    """Carrier Rabi frequencies Ω/2π (Hz) of the two tones, from c = ηΩ/2π."""
    eta = modes.lamb_dicke[spec.ion_j]
    rabi = []
    for mode, coupling in ((spec.mode_m, spec.coupling_m), (spec.mode_n, spec.coupling_n)):
        if abs(eta[mode]) < 1e-15:
            raise ValidationError("Assisting ion does not couple to a driven mode", details={"ion": spec.ion_j, "mode": mode})
        rabi.append(abs(coupling) / abs(eta[mode]))
    return rabi[0], rabi[1]


def tone_detuning(spec: BeamSplitterSpec, modes: ModeTable, k: int, driven: int, offset: float = 0.0) -> float:
    """
    δ_{k,q} = Δ + ν_k - ν_q (+ offset): detuning of the tone aimed at mode q
    from the red sideband of mode k (Hz).
    """
    return spec.delta_bs + offset + modes.frequencies[k] - modes.frequencies[driven]


def ac_stark_shifts(spec: BeamSplitterSpec, modes: ModeTable, offset_m: float = 0.0) -> np.ndarray:
    """
    Per-mode ac-Stark shifts (Hz) induced by one beam splitter.

    Driven modes k ∈ {m, n}: ω'_k = Σ_q (η_{j,k} Ω_q)² / (4 δ_{k,q}).
    Every other mode k: Σ_q (η_{j,k} Ω_q)² / (2 δ_{k,q}).
    Values are the coefficients of a_k a_k† σ_z. offset_m shifts the tone of
    mode m (frequency compensation).

    Raises:
        IncompleteSpecError: If physical parameters are missing
        ResonanceError: If any detuning vanishes
    """
    _require_physical(spec)
    validate_ion_index(spec.ion_j, modes.n_ions)
    rabi_m, rabi_n = tone_rabi_frequencies(spec, modes)
    eta = modes.lamb_dicke[spec.ion_j]

    shifts = np.zeros(modes.n_modes)
    for k in range(modes.n_modes):
        denominator = 4.0 if k in spec.modes else 2.0
        total = 0.0
        for driven, rabi in ((spec.mode_m, rabi_m), (spec.mode_n, rabi_n)):
            coupling_sq = (eta[k] * rabi) ** 2
            if coupling_sq == 0.0:
                continue
            delta = tone_detuning(spec, modes, k, driven, offset_m if driven == spec.mode_m else 0.0)
            if abs(delta) < 1e-9:
                raise ResonanceError("Drive tone is resonant with a sideband", details={"mode": k, "tone_mode": driven})
            total += coupling_sq / (denominator * delta)
        shifts[k] = total
    return shifts


def spin_eigenvalue(spec: BeamSplitterSpec) -> int:
    """σ_z of the assisting ion implied by the spin sign and the sign of Δ."""
    _require_physical(spec)
    return spec.spin_sign * (1 if spec.delta_bs > 0 else -1)


def stark_phase_increments(spec: BeamSplitterSpec, modes: ModeTable) -> np.ndarray:
    """
    Mode phases (rad) accumulated during one splitter.

    The tone of mode m is frequency-compensated, so both driven modes
    rotate at ω'_n; spectators rotate at their own shift.
    """
    shifts = ac_stark_shifts(spec, modes)
    shifts[spec.mode_m] = shifts[spec.mode_n]
    area = spec.duration * pulse_area_factor(spec.ramp_fraction, power=2)
    return 2.0 * math.pi * spin_eigenvalue(spec) * shifts * area


def compensate_phases(config: InterferometerConfig, modes: ModeTable) -> InterferometerConfig:
    """
    Offset each splitter's phase by the Stark phases of all earlier splitters.

    With Φ_k the accumulated phase of mode k, φ becomes φ - (Φ_m - Φ_n).
    Only φ fields change. A config already marked "analytic" is returned
    unchanged.

    Raises:
        IncompleteSpecError: If any splitter lacks physical parameters
    """
    if config.compensation == "analytic":
        logger.debug("Interferometer already compensated; skipping")
        return config
    if config.n_modes > modes.n_modes:
        raise ValidationError("Interferometer has more modes than the chain", details={"config": config.n_modes, "chain": modes.n_modes})
    for spec in config.splitters:
        _require_physical(spec)

    accumulated = np.zeros(modes.n_modes)
    adjusted: List[BeamSplitterSpec] = []
    for index, spec in enumerate(config.splitters):
        offset = accumulated[spec.mode_m] - accumulated[spec.mode_n]
        adjusted.append(dataclasses.replace(spec, phi_bs=spec.phi_bs - offset))
        if offset:
            logger.info(f"Splitter {index} {spec.modes}: phase offset {offset:+.4f} rad from earlier Stark shifts")
        accumulated += stark_phase_increments(spec, modes)

    return InterferometerConfig(n_modes=config.n_modes, splitters=tuple(adjusted), compensation="analytic")


# ==================== Reference configurations ====================


def _calibration_row(pair: Tuple[int, int]) -> Dict[str, float]:
    key = mode_pair_key(*pair)
    if key not in CALIBRATED_BEAM_SPLITTERS:
        raise ValidationError("No calibrated splitter for pair", details={"pair": pair, "available": sorted(CALIBRATED_BEAM_SPLITTERS)})
    return CALIBRATED_BEAM_SPLITTERS[key]


def calibrated_ramp_fraction(pair: Tuple[int, int]) -> float:
    """
    Edge fraction that makes a calibrated row a 50:50 splitter.

    The row fixes couplings, detuning and duration; the ramp is the one
    remaining drive parameter, solved so that bs_angle_from_params gives π/4.

    Raises:
        ValidationError: If the pair is not calibrated or no ramp in [0, 0.5] fits
    """
    square = square_pulse_angle(reference_beam_splitter(pair, ramp_fraction=0.0))
    return ramp_fraction_for_area((math.pi / 4.0) / square, power=2)


def reference_beam_splitter(
    pair: Tuple[int, int],
    rotation_pi: float = 0.5,
    phase_pi: float = 0.0,
    ramp_fraction: Optional[float] = None,
    with_physical: bool = True,
) -> BeamSplitterSpec:
    """
    Calibrated splitter between 1-based modes pair; ion and drive from the table.

    Durations scale with rotation_pi from the 50:50 calibration. The ramp
    defaults to the row's calibrated fraction, which keeps theta_bs and the
    drive consistent; the mode order of pair is kept.
    """
    row = _calibration_row(pair)
    physical = {}
    if with_physical:
        low, high = row["coupling_m_hz"], row["coupling_n_hz"]
        coupling_m, coupling_n = (low, high) if pair[0] < pair[1] else (high, low)
        physical = {
            "delta_bs": CALIBRATED_DETUNING_HZ,
            "coupling_m": coupling_m,
            "coupling_n": coupling_n,
            "duration": row["duration_s"] * rotation_pi / 0.5,
            "ramp_fraction": calibrated_ramp_fraction(pair) if ramp_fraction is None else ramp_fraction,
        }
    return BeamSplitterSpec.from_rotation(pair[0] - 1, pair[1] - 1, row["ion"] - 1, rotation_pi, phase_pi, **physical)


def reference_tomography_config(with_physical: bool = True, ramp_fraction: Optional[float] = None) -> InterferometerConfig:
    """Four-splitter setting for two input modes plus two vacuum ancillas."""
    splitters = tuple(
        reference_beam_splitter(pair, rotation, phase, ramp_fraction=ramp_fraction, with_physical=with_physical)
        for pair, rotation, phase in TOMOGRAPHY_SETTING
    )
    return InterferometerConfig(n_modes=4, splitters=splitters)


# ==================== Scans ====================


def hom_scan(thetas: Sequence[float]) -> pd.DataFrame:
    """
    Two-phonon interference |1,1⟩ through one splitter vs mixing angle.

    Returns:
        DataFrame with columns theta_rad, p_11, p_20, p_02, p_11_distinguishable
    """
    sector = enumerate_basis(2, 2)
    rho = density_from_state(fock_state(sector, {(1, 1): 1.0}))
    rows = []
    for theta in thetas:
        config = InterferometerConfig(n_modes=2, splitters=(BeamSplitterSpec(0, 1, 0, float(theta)),))
        p = network_probabilities(config, rho)
        c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
        rows.append(
            {
                "theta_rad": float(theta),
                "p_11": float(p[sector.index_of((1, 1))]),
                "p_20": float(p[sector.index_of((2, 0))]),
                "p_02": float(p[sector.index_of((0, 2))]),
                "p_11_distinguishable": c2**2 + s2**2,
            }
        )
    return pd.DataFrame(rows, columns=["theta_rad", "p_11", "p_20", "p_02", "p_11_distinguishable"])


def hom_visibility(scan: pd.DataFrame) -> float:
    """1 - P(1,1)/P_distinguishable(1,1) at the scan's dip."""
    if scan.empty:
        raise ValidationError("Empty HOM scan")
    dip = scan.loc[scan["p_11"].idxmin()]
    return float(1.0 - dip["p_11"] / dip["p_11_distinguishable"])


def phase_scan(
    config: InterferometerConfig,
    state: Union[FockState, DensityMatrix],
    phis: Sequence[float],
    bs_index: int = -1,
    convention: str = "adjoint",
) -> pd.DataFrame:
    """
    Output populations vs the phase of one splitter.

    Returns:
        DataFrame with phi_rad and one p_<occupation> column per basis state
    """
    if not config.splitters:
        raise ValidationError("Phase scan needs at least one splitter")
    index = bs_index % len(config.splitters)
    rho = density_from_state(state) if isinstance(state, FockState) else state
    labels = [f"p_{label}" for label in rho.sector.labels()]

    rows = []
    for phi in phis:
        splitters = list(config.splitters)
        splitters[index] = dataclasses.replace(splitters[index], phi_bs=float(phi))
        scanned = dataclasses.replace(config, splitters=tuple(splitters))
        p = network_probabilities(scanned, rho, convention=convention)
        rows.append({"phi_rad": float(phi), **dict(zip(labels, (float(v) for v in p)))})
    logger.info(f"Phase scan of splitter {index}: {len(rows)} points")
    return pd.DataFrame(rows, columns=["phi_rad", *labels])


def bs_population_scan(spec: BeamSplitterSpec, times: Sequence[float]) -> pd.DataFrame:
    """
    Single-phonon transfer |1⟩_m -> |1⟩_n vs pulse duration, effective model.

    Returns:
        DataFrame with columns time_s, theta_rad, p_m, p_n
    """
    _require_physical(spec)
    rows = []
    for t in times:
        theta = bs_angle_from_params(dataclasses.replace(spec, duration=float(t)))
        rows.append({"time_s": float(t), "theta_rad": theta, "p_m": math.cos(theta) ** 2, "p_n": math.sin(theta) ** 2})
    return pd.DataFrame(rows, columns=["time_s", "theta_rad", "p_m", "p_n"])
