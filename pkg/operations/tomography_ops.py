"""
Tomography Operations for Phononet.

Boson-sampling tomography of fixed-N states: the superoperator L that maps
vec(ρ) to the output probabilities of every interferometer setting,
pseudo-inverse reconstruction, projection onto physical states, and the
search for settings that maximize det(L†L).

vec(ρ) is row-major over the input sector basis: column α·d + β holds ρ_αβ.
With A = U_F (the forward propagator on the output sector) restricted to
the embedded input states, L[(g, ν), (α, β)] = A_να conj(A_νβ).
"""

import dataclasses
import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from config.constants import MAX_CONDITION_NUMBER, OPTIMIZER_STARTS, PINV_RCOND
from domain.exceptions import DegenerateTemplateError, IllConditionedError, ValidationError
from domain.models import (
    BeamSplitterSpec,
    ConfigTemplate,
    DensityMatrix,
    DetectionModel,
    FockSector,
    FockState,
    FreeParameter,
    InterferometerConfig,
    MeasurementResult,
    OptimizationResult,
    ReconstructionResult,
    SuperOperator,
    TomographySetup,
)
from domain.validators import validate_density_matrix, validate_hermitian
from .detection_ops import (
    apply_confusion,
    binary_pattern_distribution,
    correct_readout,
    fock_distribution_from_patterns,
    sample_patterns,
)
from .fock_ops import density_from_state, embed_with_ancillas, embedding_matrix, enumerate_basis, lift_unitary
from .network_ops import compose_interferometer, network_probabilities, reference_tomography_config

logger = logging.getLogger(__name__)

BLOCK_NORMALIZATION_TOL = 0.05
SINGULAR_OBJECTIVE = 1e12


# ==================== Setups ====================


def build_setup(
    input_modes: int,
    n_phonons: int,
    n_ancillas: int,
    configs: Sequence[InterferometerConfig],
) -> TomographySetup:
    """
    Tomography setup for an N-phonon state on input_modes modes.

    Example:
        >>> setup = build_setup(2, 1, 2, [reference_tomography_config(with_physical=False)])
        >>> setup.output_sector.dim
        4
    """
    input_sector = enumerate_basis(input_modes, n_phonons)
    output_sector = enumerate_basis(input_modes + n_ancillas, n_phonons)
    return TomographySetup(input_sector=input_sector, n_ancillas=n_ancillas, configs=tuple(configs), output_sector=output_sector)


def reference_setup(n_phonons: int = 1) -> TomographySetup:
    """Two input modes, two vacuum ancillas, the calibrated four-splitter setting."""
    return build_setup(2, n_phonons, 2, [reference_tomography_config(with_physical=False)])


def single_splitter_setup(rotation_pi: float = 0.304, phases: Sequence[float] = (0.0, 2 * math.pi / 3, 4 * math.pi / 3)) -> TomographySetup:
    """One splitter on two modes, one setting per phase; N = 1, no ancillas."""
    configs = [
        InterferometerConfig(n_modes=2, splitters=(BeamSplitterSpec(0, 1, 0, rotation_pi * math.pi / 2, phi_bs=float(phi)),))
        for phi in phases
    ]
    return build_setup(2, 1, 0, configs)


# ==================== Superoperator ====================


def _input_columns(setup: TomographySetup) -> np.ndarray:
    embed = embedding_matrix(setup.input_sector, setup.output_sector)
    return np.argmax(embed, axis=0)


def build_superoperator(setup: TomographySetup) -> SuperOperator:
    """
    Assemble L for all settings of a setup.

    Returns:
        SuperOperator with shape (n_settings·d_out, d_in²)
    """
    columns = _input_columns(setup)
    d_in = setup.input_sector.dim
    d_out = setup.output_sector.dim
    blocks = []
    for config in setup.configs:
        forward = lift_unitary(compose_interferometer(config), setup.output_sector)
        a = forward[:, columns]
        blocks.append(np.einsum("na,nb->nab", a, a.conj()).reshape(d_out, d_in * d_in))
    matrix = np.vstack(blocks)
    logger.debug(f"Superoperator {matrix.shape} for {setup.n_settings} settings")
    return SuperOperator(matrix=matrix, input_sector=setup.input_sector, output_sector=setup.output_sector, n_settings=setup.n_settings)


def gram_log_det(superop: Union[SuperOperator, np.ndarray]) -> float:
    """log det(L†L), or -inf when L†L is singular."""
    matrix = superop.matrix if isinstance(superop, SuperOperator) else np.asarray(superop)
    sign, logdet = np.linalg.slogdet(matrix.conj().T @ matrix)
    if np.real(sign) <= 0 or not np.isfinite(logdet):
        return -math.inf
    return float(logdet)


def gram_condition_number(superop: SuperOperator) -> float:
    """Condition number of L†L, (σ_max/σ_min)²."""
    singular = np.linalg.svd(superop.matrix, compute_uv=False)
    n_cols = superop.matrix.shape[1]
    if singular.size < n_cols or singular[-1] == 0:
        return math.inf
    return float((singular[0] / singular[-1]) ** 2)


# ==================== Reconstruction ====================


def ml_project(rho_raw: np.ndarray) -> np.ndarray:
    """
    Nearest unit-trace PSD matrix in Frobenius norm.

    Eigenvalues of the Hermitian part are projected onto the probability
    simplex; eigenvectors are kept.

    Example:
        >>> ml_project(np.diag([1.2, -0.2])).real
        array([[1., 0.],
               [0., 0.]])
    """
    rho = np.asarray(rho_raw, dtype=complex)
    rho = 0.5 * (rho + rho.conj().T)
    eigenvalues, vectors = np.linalg.eigh(rho)

    ordered = np.sort(eigenvalues)[::-1]
    cumulative = np.cumsum(ordered)
    ranks = np.arange(1, ordered.size + 1)
    support = np.nonzero(ordered - (cumulative - 1.0) / ranks > 0)[0][-1]
    shift = (cumulative[support] - 1.0) / (support + 1)
    clipped = np.maximum(eigenvalues - shift, 0.0)

    return (vectors * clipped) @ vectors.conj().T


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    eigenvalues, vectors = np.linalg.eigh(rho)
    return (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.conj().T


def _as_density(state: Union[np.ndarray, FockState, DensityMatrix]) -> np.ndarray:
    if isinstance(state, FockState):
        return density_from_state(state).matrix
    if isinstance(state, DensityMatrix):
        return state.matrix
    return np.asarray(state, dtype=complex)


def state_fidelity(
    rho: Union[np.ndarray, FockState, DensityMatrix],
    sigma: Union[np.ndarray, FockState, DensityMatrix],
    validate: bool = True,
) -> float:
    """
    Uhlmann fidelity (Tr √(√ρ σ √ρ))².

    validate=False skips the density-matrix checks, for reported matrices
    that are rounded or not exactly normalized.

    Raises:
        ValidationError: Non-PSD or non-normalized input when validating
    """
    a = _as_density(rho)
    b = _as_density(sigma)
    if a.shape != b.shape:
        raise ValidationError("Density matrices differ in dimension", details={"rho": a.shape, "sigma": b.shape})
    if validate:
        a = validate_density_matrix(a, trace_tol=1e-6, eig_tol=1e-6)
        b = validate_density_matrix(b, trace_tol=1e-6, eig_tol=1e-6)
    else:
        a = 0.5 * (a + a.conj().T)
        b = 0.5 * (b + b.conj().T)
    root = _psd_sqrt(a)
    inner = root @ b @ root
    inner = 0.5 * (inner + inner.conj().T)
    eigenvalues = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(min(np.sum(np.sqrt(eigenvalues)) ** 2, 1.0))


def _stacked(p: Union[MeasurementResult, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(p, MeasurementResult):
        return p.stacked()
    return np.asarray(p, dtype=float).ravel()


def reconstruct(
    p: Union[MeasurementResult, Sequence[float], np.ndarray],
    superop: SuperOperator,
    target: Optional[Union[np.ndarray, FockState, DensityMatrix]] = None,
    block_tol: float = BLOCK_NORMALIZATION_TOL,
) -> ReconstructionResult:
    """
    Linear-inversion estimate ρ = L⁺ p, then projection onto physical states.

    Args:
        p: Output probabilities stacked setting by setting
        superop: L for the same setup
        target: Optional reference state on the input sector
        block_tol: Allowed deviation of each setting's probabilities from 1

    Raises:
        ValidationError: Wrong length or a setting block far from normalized
        IllConditionedError: If cond(L†L) exceeds 1e12
    """
    vector = _stacked(p)
    d_out = superop.output_sector.dim
    d_in = superop.input_sector.dim
    if vector.size != superop.n_settings * d_out:
        raise ValidationError(
            "Probability vector does not match the superoperator",
            details={"len": vector.size, "expected": superop.n_settings * d_out},
        )
    for g, block in enumerate(vector.reshape(superop.n_settings, d_out)):
        if abs(block.sum() - 1.0) > block_tol:
            raise ValidationError("Setting probabilities are not normalized", details={"setting": g, "sum": float(block.sum())})

    condition = gram_condition_number(superop)
    if condition > MAX_CONDITION_NUMBER:
        raise IllConditionedError(
            "L†L is ill-conditioned; add settings or ancillas",
            details={"condition_number": condition, "limit": MAX_CONDITION_NUMBER},
        )

    singular = np.linalg.svd(superop.matrix, compute_uv=False)
    dropped = int(np.sum(singular < PINV_RCOND * singular[0]))
    rho_raw = (np.linalg.pinv(superop.matrix, rcond=PINV_RCOND) @ vector).reshape(d_in, d_in)
    rho_raw = 0.5 * (rho_raw + rho_raw.conj().T)
    rho_ml = ml_project(rho_raw)

    raw_eigenvalues = np.linalg.eigvalsh(rho_raw)
    clipped = float(-raw_eigenvalues[raw_eigenvalues < 0].sum())
    fidelity = state_fidelity(rho_ml, target) if target is not None else None
    purity = float(np.real(np.trace(rho_ml @ rho_ml)))

    if fidelity is not None:
        logger.info(f"Reconstruction: fidelity {fidelity:.4f}, purity {purity:.4f}, cond {condition:.3g}")
    return ReconstructionResult(
        rho_raw=rho_raw,
        rho_ml=rho_ml,
        fidelity_to_target=fidelity,
        purity=purity,
        condition_number=condition,
        clipped_eigenmass=clipped,
        dropped_singular_values=dropped,
    )


# ==================== Measurements ====================


def random_pure_state(sector: FockSector, rng: np.random.Generator) -> FockState:
    """Haar-random pure state on a sector."""
    amplitudes = rng.normal(size=sector.dim) + 1j * rng.normal(size=sector.dim)
    return FockState(sector=sector, amplitudes=amplitudes / np.linalg.norm(amplitudes))


def _input_density(state: Union[np.ndarray, FockState, DensityMatrix], setup: TomographySetup) -> DensityMatrix:
    if isinstance(state, FockState):
        rho = density_from_state(state)
    elif isinstance(state, DensityMatrix):
        rho = state
    else:
        rho = DensityMatrix(sector=setup.input_sector, matrix=validate_hermitian(np.asarray(state, dtype=complex)))
    if rho.sector.basis != setup.input_sector.basis:
        raise ValidationError("State is not on the setup's input sector", details={"dim": rho.sector.dim})
    return rho


def _binary_probabilities(
    p: np.ndarray,
    sector: FockSector,
    shots: int,
    rng: np.random.Generator,
    detection: DetectionModel,
    correct: bool,
) -> np.ndarray:
    truth = binary_pattern_distribution(p, sector)
    if shots > 0:
        observed: Mapping = sample_patterns(truth, shots, rng, detection)
    else:
        observed = apply_confusion(truth, detection)
    if correct:
        distribution = correct_readout(observed, detection).probabilities
    else:
        total = float(sum(observed.values()))
        distribution = {k: v / total for k, v in observed.items()}
    fock, _ = fock_distribution_from_patterns(distribution, sector)
    return fock


def simulate_measurement(
    rho_input: Union[np.ndarray, FockState, DensityMatrix],
    setup: TomographySetup,
    shots: int = 0,
    seed: Optional[int] = None,
    detection: Optional[DetectionModel] = None,
    correct: bool = True,
) -> MeasurementResult:
    """
    Output probabilities for every setting, exact or estimated from shots.

    Args:
        rho_input: State on the input sector; ancillas are appended in vacuum
        setup: Tomography setup
        shots: 0 for exact probabilities, else multinomial samples per setting
        seed: Seed of the sampling generator
        detection: Optional binary-detection model; patterns are sampled,
            optionally readout-corrected and mapped back to Fock states
        correct: Invert the detection confusion before inference
    """
    if shots < 0:
        raise ValidationError("shots must be >= 0", details={"shots": shots})
    rng = np.random.default_rng(seed)
    rho_out = embed_with_ancillas(_input_density(rho_input, setup), setup.n_ancillas)

    probabilities: List[np.ndarray] = []
    counts: List[np.ndarray] = []
    for config in setup.configs:
        p = np.clip(network_probabilities(config, rho_out), 0.0, None)
        p = p / p.sum()
        if detection is not None:
            probabilities.append(_binary_probabilities(p, setup.output_sector, shots, rng, detection, correct))
        elif shots > 0:
            sample = rng.multinomial(shots, p)
            counts.append(sample)
            probabilities.append(sample / shots)
        else:
            probabilities.append(p)
    return MeasurementResult(probabilities=tuple(probabilities), shots=shots, counts=tuple(counts) if counts else None)


def measurement_from_counts(
    setup: TomographySetup,
    counts: Sequence[Mapping[Tuple[int, ...], float]],
    binary: bool = False,
    detection: Optional[DetectionModel] = None,
) -> MeasurementResult:
    """
    Per-setting probabilities from recorded counts.

    Keys are occupations, or bright/dark patterns when binary is set; binary
    counts are readout-corrected with detection (if given) and mapped to
    Fock states by number-conserving inference.

    Raises:
        ValidationError: Count list length differs from the setting count,
            or a setting has no counts
    """
    if len(counts) != setup.n_settings:
        raise ValidationError("One count table per setting expected", details={"tables": len(counts), "settings": setup.n_settings})
    sector = setup.output_sector
    probabilities: List[np.ndarray] = []
    arrays: List[np.ndarray] = []
    total_shots = 0
    for g, table in enumerate(counts):
        total = float(sum(table.values()))
        if total <= 0:
            raise ValidationError("Setting has no counts", details={"setting": g})
        total_shots = max(total_shots, int(round(total)))
        if binary:
            if detection is not None:
                distribution: Dict = correct_readout(table, detection).probabilities
            else:
                distribution = {tuple(k): v / total for k, v in table.items()}
            p, _ = fock_distribution_from_patterns(distribution, sector)
        else:
            raw = np.zeros(sector.dim)
            for occupation, n in table.items():
                raw[sector.index_of(occupation)] += n
            arrays.append(raw)
            p = raw / total
        probabilities.append(p)
    return MeasurementResult(probabilities=tuple(probabilities), shots=total_shots, counts=tuple(arrays) if arrays else None)


# ==================== Setting optimization ====================


def setting_template(
    base: TomographySetup,
    rotation_groups: Sequence[Sequence[Tuple[int, int]]] = (),
    phase_slots: Sequence[Tuple[int, int]] = (),
) -> ConfigTemplate:
    """
    Free parameters over a base setup.

    Each rotation group becomes one rotation angle in [0, π] shared by its
    (setting, splitter) slots; each phase slot gets its own phase in [0, 2π).
    """
    parameters = [
        FreeParameter(name=f"rotation_{i}", slots=tuple((g, k, "rotation") for g, k in group), lower=0.0, upper=math.pi)
        for i, group in enumerate(rotation_groups)
    ]
    parameters += [
        FreeParameter(name=f"phase_{g}_{k}", slots=((g, k, "phase"),), lower=0.0, upper=2.0 * math.pi)
        for g, k in phase_slots
    ]
    return ConfigTemplate(base=base, parameters=tuple(parameters))


def single_splitter_template(n_settings: int = 3, rotation_pi: Optional[float] = None) -> ConfigTemplate:
    """
    One splitter per setting with a shared rotation and free phases.

    The phase of setting 0 stays at 0 as the reference; with rotation_pi
    given the rotation is fixed instead of optimized.
    """
    base = single_splitter_setup(0.5 if rotation_pi is None else rotation_pi, phases=[0.0] * n_settings)
    rotations = [] if rotation_pi is not None else [[(g, 0) for g in range(n_settings)]]
    return setting_template(base, rotations, [(g, 0) for g in range(1, n_settings)])


def four_splitter_template(n_phonons: int = 1) -> ConfigTemplate:
    """Calibrated four-splitter layout with every rotation and phase free."""
    base = reference_setup(n_phonons)
    n_splitters = len(base.configs[0].splitters)
    return setting_template(base, [[(0, k)] for k in range(n_splitters)], [(0, k) for k in range(n_splitters)])


def apply_parameters(template: ConfigTemplate, values: Sequence[float]) -> TomographySetup:
    """Setup with the template's free parameters set to values."""
    if len(values) != len(template.parameters):
        raise ValidationError("Parameter vector length mismatch", details={"len": len(values), "expected": len(template.parameters)})
    splitters = [list(config.splitters) for config in template.base.configs]
    for parameter, value in zip(template.parameters, values):
        for g, k, kind in parameter.slots:
            if kind == "rotation":
                splitters[g][k] = dataclasses.replace(splitters[g][k], theta_bs=0.5 * float(value))
            else:
                splitters[g][k] = dataclasses.replace(splitters[g][k], phi_bs=float(value))
    configs = tuple(
        dataclasses.replace(config, splitters=tuple(specs)) for config, specs in zip(template.base.configs, splitters)
    )
    return dataclasses.replace(template.base, configs=configs)


def random_parameters(template: ConfigTemplate, rng: np.random.Generator) -> np.ndarray:
    bounds = np.array(template.bounds, dtype=float).reshape(-1, 2)
    return rng.uniform(bounds[:, 0], bounds[:, 1])


def template_log_det(template: ConfigTemplate, values: Sequence[float]) -> float:
    return gram_log_det(build_superoperator(apply_parameters(template, values)))


def optimize_configuration(
    template: ConfigTemplate,
    n_starts: int = OPTIMIZER_STARTS,
    seed: int = 2024,
) -> OptimizationResult:
    """
    Maximize log det(L†L) by bounded Powell searches from random starts.

    The best local optimum found is returned; it is not certified global.

    Raises:
        DegenerateTemplateError: If L†L is singular at every start
    """
    if n_starts < 1:
        raise ValidationError("n_starts must be >= 1", details={"n_starts": n_starts})
    rng = np.random.default_rng(seed)
    bounds = template.bounds

    if not template.parameters:
        value = gram_log_det(build_superoperator(template.base))
        if not math.isfinite(value):
            raise DegenerateTemplateError("Fixed template gives a singular L†L")
        return OptimizationResult(setup=template.base, parameters=np.zeros(0), log_det=value, n_starts=0)

    def objective(x: np.ndarray) -> float:
        value = template_log_det(template, x)
        return -value if math.isfinite(value) else SINGULAR_OBJECTIVE

    best_x: Optional[np.ndarray] = None
    best_value = -math.inf
    for start in range(n_starts):
        x0 = random_parameters(template, rng)
        result = minimize(objective, x0, method="Powell", bounds=bounds, options={"xtol": 1e-8, "ftol": 1e-12, "maxiter": 20000})
        value = -float(result.fun)
        if result.fun < SINGULAR_OBJECTIVE and value > best_value:
            best_value, best_x = value, np.asarray(result.x, dtype=float)
            logger.debug(f"start {start}: log det {value:.6f}")

    if best_x is None:
        raise DegenerateTemplateError("L†L is singular at every start", details={"n_starts": n_starts})
    logger.info(f"Best log det(L†L) = {best_value:.6f} over {n_starts} starts")
    return OptimizationResult(setup=apply_parameters(template, best_x), parameters=best_x, log_det=best_value, n_starts=n_starts)
