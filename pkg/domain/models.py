"""
Domain models for Phononet.

These dataclasses represent the physical objects of the network: ion chains
and their modes, Fock sectors and states, beam splitters and interferometers,
detection, drives, noise and tomography records.
They carry no numerics beyond what is needed to validate themselves;
the computations live in the operations layer.

Frequencies are ordinary frequencies in Hz; angles are radians; indices are
0-based (the I/O layer converts 1-based ion and mode numbers).
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.constants import (
    DEFAULT_RAMAN_WAVEVECTOR,
    DEFAULT_RAMP_FRACTION,
    HERMITIAN_TOL,
    ORTHONORMAL_TOL,
    YB171_MASS,
    YB171_QUBIT_FREQUENCY_HZ,
)
from .exceptions import InvalidPairError, ValidationError

Occupation = Tuple[int, ...]
Pattern = Tuple[int, ...]


# ==================== Ion chain ====================


@dataclass(frozen=True)
class TrapParams:
    """
    Trap and species parameters of a linear chain.

    nu_axial is ignored when fixed_spacing is set (equal-spacing chains),
    but still has to satisfy the stability ordering.
    """

    n_ions: int
    nu_com_transverse: float
    nu_axial: float
    fixed_spacing: Optional[float] = None
    ion_mass: float = YB171_MASS
    raman_wavevector: float = DEFAULT_RAMAN_WAVEVECTOR

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValidationError("n_ions must be >= 1", details={"n_ions": self.n_ions})
        for name in ("nu_com_transverse", "nu_axial", "ion_mass", "raman_wavevector"):
            value = getattr(self, name)
            if not value > 0:
                raise ValidationError(f"{name} must be positive", details={name: value})
        if self.nu_com_transverse <= self.nu_axial:
            raise ValidationError(
                "nu_com_transverse must exceed nu_axial for a linear chain",
                details={"nu_com_transverse": self.nu_com_transverse, "nu_axial": self.nu_axial},
            )
        if self.fixed_spacing is not None and not self.fixed_spacing > 0:
            raise ValidationError("fixed_spacing must be positive", details={"fixed_spacing": self.fixed_spacing})

    @property
    def is_equal_spacing(self) -> bool:
        return self.fixed_spacing is not None


@dataclass(frozen=True, eq=False)
class ModeTable:
    """
    Transverse normal modes of a chain.

    mode_vectors[j, m] is the amplitude b_{j,m} of ion j in mode m.
    Frequencies are sorted ascending, so the COM mode of a harmonic chain is last.
    lamb_dicke[j, m] = eta_scale[m] * b_{j,m}.
    """

    frequencies: np.ndarray
    mode_vectors: np.ndarray
    eta_scale: np.ndarray
    positions: Optional[np.ndarray] = None
    nu_axial: Optional[float] = None

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        vectors = np.asarray(self.mode_vectors, dtype=float)
        eta = np.asarray(self.eta_scale, dtype=float)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "mode_vectors", vectors)
        object.__setattr__(self, "eta_scale", eta)

        if vectors.ndim != 2 or vectors.shape[1] != freqs.size or eta.size != freqs.size:
            raise ValidationError(
                "Mode table shapes are inconsistent",
                details={"frequencies": freqs.shape, "mode_vectors": vectors.shape, "eta_scale": eta.shape},
            )
        if np.any(np.diff(freqs) < 0):
            raise ValidationError("Mode frequencies must be sorted ascending")
        if np.any(freqs <= 0):
            raise ValidationError("Mode frequencies must be positive")
        deviation = np.max(np.abs(vectors.T @ vectors - np.eye(freqs.size)))
        if deviation > ORTHONORMAL_TOL:
            raise ValidationError("Mode vectors are not orthonormal", details={"max_deviation": deviation})

    @property
    def n_modes(self) -> int:
        return int(self.frequencies.size)

    @property
    def n_ions(self) -> int:
        return int(self.mode_vectors.shape[0])

    @property
    def lamb_dicke(self) -> np.ndarray:
        """η_{j,m} matrix (ions × modes)."""
        return self.mode_vectors * self.eta_scale[np.newaxis, :]

    def com_index(self) -> int:
        return self.n_modes - 1


@dataclass(frozen=True)
class ConnectivityStats:
    """Statistics of the best single-ion coupling product over all mode pairs."""

    n_ions: int
    fraction_above_threshold: float
    mean_best_product: float
    std_best_product: float
    n_pairs: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction_above_threshold <= 1.0:
            raise ValidationError("fraction must lie in [0, 1]")
        if self.mean_best_product < 0 or self.std_best_product < 0:
            raise ValidationError("mean and std must be non-negative")


@dataclass(frozen=True)
class AxialFit:
    """Result of fitting the axial frequency to a measured transverse spectrum."""

    nu_axial: float
    nu_com_transverse: float
    rms_residual: float
    model_frequencies: Tuple[float, ...] = ()


# ==================== Fock space ====================


@dataclass(frozen=True, eq=False)
class FockSector:
    """
    Fixed-N Fock sector over M modes.

    The basis is ordered lexicographically descending, so for M=2, N=1 it
    reads [(1, 0), (0, 1)].
    """

    n_modes: int
    total_phonons: int
    basis: Tuple[Occupation, ...]
    _index: Dict[Occupation, int] = field(init=False, repr=False)

    def __post_init__(self):
        index = {}
        for i, occupation in enumerate(self.basis):
            if len(occupation) != self.n_modes or sum(occupation) != self.total_phonons:
                raise ValidationError("Occupation does not belong to sector", details={"occupation": occupation})
            if occupation in index:
                raise ValidationError("Duplicate occupation in basis", details={"occupation": occupation})
            index[occupation] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index_of(self, occupation: Sequence[int]) -> int:
        key = tuple(int(n) for n in occupation)
        try:
            return self._index[key]
        except KeyError:
            raise ValidationError(
                "Occupation not in sector",
                details={"occupation": key, "n_modes": self.n_modes, "total_phonons": self.total_phonons},
            ) from None

    def contains(self, occupation: Sequence[int]) -> bool:
        return tuple(int(n) for n in occupation) in self._index

    def labels(self) -> List[str]:
        """Compact labels like "1000"; comma-separated once any occupation exceeds 9."""
        wide = any(n > 9 for occ in self.basis for n in occ)
        sep = "," if wide else ""
        return [sep.join(str(n) for n in occ) for occ in self.basis]


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state on a Fock sector."""

    sector: FockSector
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.sector.dim,):
            raise ValidationError("Amplitude vector has wrong length", details={"expected": self.sector.dim, "got": amps.shape})
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError("State is not normalized", details={"norm": norm})


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix on a Fock sector (Hermitian, unit trace)."""

    sector: FockSector
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", rho)
        if rho.shape != (self.sector.dim, self.sector.dim):
            raise ValidationError("Density matrix has wrong shape", details={"expected": self.sector.dim, "got": rho.shape})
        asym = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
        if asym > HERMITIAN_TOL:
            raise ValidationError("Density matrix is not Hermitian", details={"max_asymmetry": asym})
        trace = float(np.real(np.trace(rho)))
        if abs(trace - 1.0) > 1e-10:
            raise ValidationError("Density matrix trace is not 1", details={"trace": trace})

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.matrix)))

    def is_physical(self, tol: float = 1e-8) -> bool:
        return self.min_eigenvalue() >= -tol

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


# ==================== Network ====================


COMPENSATION_MODES = ("none", "analytic")


@dataclass(frozen=True)
class BeamSplitterSpec:
    """
    One phononic beam splitter between modes m and n, assisted by ion j.

    theta_bs is the mixing angle of the mode unitary (π/4 is 50:50).
    Physical parameters are optional; when present, coupling_m/coupling_n are
    the products η_{j,m}Ω_{j,m}/2π and η_{j,n}Ω_{j,n}/2π in Hz.
    """

    mode_m: int
    mode_n: int
    ion_j: int
    theta_bs: float
    phi_bs: float = 0.0
    spin_sign: int = 1
    delta_bs: Optional[float] = None
    coupling_m: Optional[float] = None
    coupling_n: Optional[float] = None
    duration: Optional[float] = None
    ramp_fraction: float = 0.0

    def __post_init__(self):
        if self.mode_m == self.mode_n:
            raise InvalidPairError("Beam splitter needs two distinct modes", details={"mode_m": self.mode_m, "mode_n": self.mode_n})
        if min(self.mode_m, self.mode_n, self.ion_j) < 0:
            raise ValidationError("Indices must be non-negative", details={"mode_m": self.mode_m, "mode_n": self.mode_n, "ion_j": self.ion_j})
        if not math.isfinite(self.theta_bs) or not math.isfinite(self.phi_bs):
            raise ValidationError("theta_bs and phi_bs must be finite", details={"theta_bs": self.theta_bs, "phi_bs": self.phi_bs})
        if self.spin_sign not in (1, -1):
            raise ValidationError("spin_sign must be +1 or -1", details={"spin_sign": self.spin_sign})
        if not 0.0 <= self.ramp_fraction <= 0.5:
            raise ValidationError("ramp_fraction must lie in [0, 0.5]", details={"ramp_fraction": self.ramp_fraction})
        if self.duration is not None and self.duration < 0:
            raise ValidationError("duration must be non-negative", details={"duration": self.duration})

    @classmethod
    def from_rotation(
        cls,
        mode_m: int,
        mode_n: int,
        ion_j: int,
        rotation_pi: float,
        phase_pi: float = 0.0,
        **physical,
    ) -> "BeamSplitterSpec":
        """
        Build a spec from table notation.

        Args:
            rotation_pi: Rotation angle in units of π (0.5 is 50:50, 1.0 a full swap)
            phase_pi: Phase in units of π

        Example:
            >>> BeamSplitterSpec.from_rotation(0, 1, 1, 0.5, 1.0).theta_bs  # π/4
        """
        return cls(
            mode_m=mode_m,
            mode_n=mode_n,
            ion_j=ion_j,
            theta_bs=rotation_pi * math.pi / 2.0,
            phi_bs=phase_pi * math.pi,
            **physical,
        )

    @property
    def rotation_pi(self) -> float:
        """Rotation angle in units of π (2·θ_bs/π)."""
        return 2.0 * self.theta_bs / math.pi

    @property
    def has_physical(self) -> bool:
        return None not in (self.delta_bs, self.coupling_m, self.coupling_n, self.duration)

    @property
    def modes(self) -> Tuple[int, int]:
        return (self.mode_m, self.mode_n)


@dataclass(frozen=True)
class InterferometerConfig:
    """Ordered beam-splitter sequence; the first listed is applied first."""

    n_modes: int
    splitters: Tuple[BeamSplitterSpec, ...] = ()
    compensation: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "splitters", tuple(self.splitters))
        if self.n_modes < 1:
            raise ValidationError("n_modes must be >= 1", details={"n_modes": self.n_modes})
        if self.compensation not in COMPENSATION_MODES:
            raise ValidationError("Unknown compensation mode", details={"compensation": self.compensation})
        for k, spec in enumerate(self.splitters):
            if max(spec.mode_m, spec.mode_n) >= self.n_modes:
                raise ValidationError(
                    "Beam splitter mode index out of range",
                    details={"splitter": k, "mode_m": spec.mode_m, "mode_n": spec.mode_n, "n_modes": self.n_modes},
                )

    def __len__(self) -> int:
        return len(self.splitters)

    def inverse(self) -> "InterferometerConfig":
        """Reversed order with negated angles; composes with self to identity."""
        undone = tuple(
            BeamSplitterSpec(
                mode_m=s.mode_m,
                mode_n=s.mode_n,
                ion_j=s.ion_j,
                theta_bs=-s.theta_bs,
                phi_bs=s.phi_bs,
                spin_sign=s.spin_sign,
            )
            for s in reversed(self.splitters)
        )
        return InterferometerConfig(n_modes=self.n_modes, splitters=undone)


@dataclass(frozen=True)
class DetectionModel:
    """
    Binary fluorescence detection.

    mode_ions[m] is the ion read out for mode m. Per-ion flip probabilities:
    bright_given_dark[j] = p(bright|dark), dark_given_bright[j] = p(dark|bright).
    """

    mode_ions: Tuple[int, ...]
    bright_given_dark: Dict[int, float] = field(default_factory=dict)
    dark_given_bright: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mode_ions", tuple(self.mode_ions))
        for name in ("bright_given_dark", "dark_given_bright"):
            for ion, p in getattr(self, name).items():
                if not 0.0 <= p <= 1.0:
                    raise ValidationError(f"{name} must lie in [0, 1]", details={"ion": ion, name: p})

    @classmethod
    def ideal(cls, n_modes: int) -> "DetectionModel":
        return cls(mode_ions=tuple(range(n_modes)))

    @classmethod
    def from_error_rates(
        cls,
        mode_ions: Sequence[int],
        p_bright_given_dark: float,
        p_dark_given_bright: float,
    ) -> "DetectionModel":
        """Same flip probabilities on every readout ion."""
        ions = set(mode_ions)
        return cls(
            mode_ions=tuple(mode_ions),
            bright_given_dark={j: p_bright_given_dark for j in ions},
            dark_given_bright={j: p_dark_given_bright for j in ions},
        )

    @property
    def n_modes(self) -> int:
        return len(self.mode_ions)

    def confusion_matrix(self, mode: int) -> np.ndarray:
        """
        2×2 matrix C[observed, true] with index 0 = dark, 1 = bright.
        """
        ion = self.mode_ions[mode]
        p_bd = self.bright_given_dark.get(ion, 0.0)
        p_db = self.dark_given_bright.get(ion, 0.0)
        return np.array([[1.0 - p_bd, p_db], [p_bd, 1.0 - p_db]])


@dataclass(frozen=True)
class CorrectedReadout:
    """Readout-corrected pattern distribution."""

    probabilities: Dict[Pattern, float]
    clipped_mass: float
    raw: Dict[Pattern, float] = field(default_factory=dict)


# ==================== Dynamics ====================


@dataclass(frozen=True)
class DriveSpec:
    """
    Bichromatic Raman drive on ion j.

    One tone per targeted mode. tone_frequencies are f_{j,m} - f_0 in Hz,
    rabi_frequencies the peak carrier Rabi frequencies Ω_{j,m}/2π in Hz.
    """

    ion_j: int
    target_modes: Tuple[int, ...]
    tone_frequencies: Tuple[float, ...]
    rabi_frequencies: Tuple[float, ...]
    phases: Tuple[float, ...]
    duration: float
    ramp_fraction: float = DEFAULT_RAMP_FRACTION
    qubit_frequency: float = YB171_QUBIT_FREQUENCY_HZ
    include_carrier: bool = True

    def __post_init__(self):
        for name in ("target_modes", "tone_frequencies", "rabi_frequencies", "phases"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.target_modes)
        if not (len(self.tone_frequencies) == len(self.rabi_frequencies) == len(self.phases) == n):
            raise ValidationError("Drive tone lists must have equal length", details={"n_tones": n})
        if not self.duration > 0:
            raise ValidationError("duration must be positive", details={"duration": self.duration})
        if not 0.0 <= self.ramp_fraction <= 0.5:
            raise ValidationError("ramp_fraction must lie in [0, 0.5]", details={"ramp_fraction": self.ramp_fraction})
        if any(r < 0 for r in self.rabi_frequencies):
            raise ValidationError("Rabi frequencies must be non-negative")

    @property
    def n_tones(self) -> int:
        return len(self.target_modes)


@dataclass(frozen=True)
class NoiseModel:
    """
    Decoherence rates for master-equation runs.

    Keys of the per-mode dicts are mode indices of the ModeTable; keys of
    spin_dephasing are ion indices. collective_dephasing=True builds the
    motional dephasing as one operator Σ√κ_m a†_m a_m; standard_heating adds
    the a†/a pair channel at rate α_m.
    """

    heating_rates: Dict[int, float] = field(default_factory=dict)
    motional_dephasing: Dict[int, float] = field(default_factory=dict)
    spin_dephasing: Dict[int, float] = field(default_factory=dict)
    thermal_nbar: Dict[int, float] = field(default_factory=dict)
    collective_dephasing: bool = True
    standard_heating: bool = False

    def __post_init__(self):
        for name in ("heating_rates", "motional_dephasing", "spin_dephasing", "thermal_nbar"):
            for key, value in getattr(self, name).items():
                if value < 0:
                    raise ValidationError(f"{name} must be non-negative", details={"key": key, "value": value})

    @property
    def is_noiseless(self) -> bool:
        return not any(
            any(v > 0 for v in getattr(self, name).values())
            for name in ("heating_rates", "motional_dephasing", "spin_dephasing")
        )


@dataclass(frozen=True)
class TruncatedHilbert:
    """
    Truncated space for time-domain runs.

    modes are ModeTable indices; each mode keeps levels 0..cutoff. With
    excitation_sector set, only states whose phonon count plus spin excitation
    equals that number are kept (valid when carrier terms are off).
    spin_ion names the ion whose qubit is included, for noise lookup.
    """

    modes: Tuple[int, ...]
    cutoff: int
    include_spin: bool = True
    excitation_sector: Optional[int] = None
    spin_ion: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(set(self.modes)) != len(self.modes) or not self.modes:
            raise ValidationError("Hilbert modes must be distinct and non-empty", details={"modes": self.modes})
        if self.cutoff < 1:
            raise ValidationError("cutoff must be >= 1", details={"cutoff": self.cutoff})
        if self.excitation_sector is not None and self.excitation_sector < 0:
            raise ValidationError("excitation_sector must be >= 0")

    @classmethod
    def for_phonons(
        cls,
        modes: Sequence[int],
        n_phonons: int,
        guard: int = 2,
        include_spin: bool = True,
        conserve_excitations: bool = False,
        spin_ion: Optional[int] = None,
    ) -> "TruncatedHilbert":
        """Cutoff n_max = N + guard, optionally restricted to the N-excitation sector."""
        return cls(
            modes=tuple(modes),
            cutoff=n_phonons + guard,
            include_spin=include_spin,
            excitation_sector=n_phonons if conserve_excitations else None,
            spin_ion=spin_ion,
        )

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def position_of(self, mode: int) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ValidationError("Mode not included in Hilbert space", details={"mode": mode, "modes": self.modes}) from None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Pure-state trajectory from the time-domain model."""

    times: np.ndarray
    states: np.ndarray  # (n_times, dim)
    theta: np.ndarray
    norm_drift: float
    max_leakage: float
    basis: Tuple[Tuple[int, Occupation], ...]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class DensityTrajectory:
    """Density-matrix trajectory from the master equation."""

    times: np.ndarray
    rhos: np.ndarray  # (n_times, dim, dim)
    trace_error: float
    min_eigenvalue: float
    basis: Tuple[Tuple[int, Occupation], ...]

    @property
    def final(self) -> np.ndarray:
        return self.rhos[-1]


@dataclass(frozen=True, eq=False)
class HeatingFit:
    """Per-wait thermal occupations and the fitted heating rate (quanta/s)."""

    wait_times: np.ndarray
    nbars: np.ndarray
    nbar_errors: np.ndarray
    rate: float
    rate_stderr: float
    offset: float

    @property
    def ci95(self) -> Tuple[float, float]:
        half = 1.959963984540054 * self.rate_stderr
        return (self.rate - half, self.rate + half)


@dataclass(frozen=True)
class FidelityDecayFit:
    """Linear decay F(t) = f_ini + epsilon·t."""

    f_ini: float
    epsilon: float
    f_at_t_bs: Optional[float] = None


# ==================== Tomography ====================


@dataclass(frozen=True)
class TomographySetup:
    """Input sector, vacuum ancillas and the interferometer settings."""

    input_sector: FockSector
    n_ancillas: int
    configs: Tuple[InterferometerConfig, ...]
    output_sector: FockSector

    def __post_init__(self):
        object.__setattr__(self, "configs", tuple(self.configs))
        if not self.configs:
            raise ValidationError("Tomography needs at least one setting")
        n_out = self.input_sector.n_modes + self.n_ancillas
        if self.output_sector.n_modes != n_out or self.output_sector.total_phonons != self.input_sector.total_phonons:
            raise ValidationError(
                "Output sector does not match input sector plus ancillas",
                details={"expected_modes": n_out, "output_modes": self.output_sector.n_modes},
            )
        for g, config in enumerate(self.configs):
            if config.n_modes != n_out:
                raise ValidationError(
                    "Setting does not act on all modes",
                    details={"setting": g, "config_modes": config.n_modes, "expected": n_out},
                )

    @property
    def n_settings(self) -> int:
        return len(self.configs)


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """
    Linear map from vec(ρ) (row-major over the input basis) to the stacked
    output probabilities; rows run over settings first, then output states.
    """

    matrix: np.ndarray
    input_sector: FockSector
    output_sector: FockSector
    n_settings: int

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def row_labels(self) -> List[Tuple[int, str]]:
        labels = self.output_sector.labels()
        return [(g, label) for g in range(self.n_settings) for label in labels]


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    """Per-setting output probabilities (estimated when shots > 0)."""

    probabilities: Tuple[np.ndarray, ...]
    shots: int = 0
    counts: Optional[Tuple[np.ndarray, ...]] = None

    def stacked(self) -> np.ndarray:
        return np.concatenate([np.asarray(p, dtype=float) for p in self.probabilities])


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Output of linear-inversion tomography plus projection."""

    rho_raw: np.ndarray
    rho_ml: np.ndarray
    fidelity_to_target: Optional[float]
    purity: float
    condition_number: float
    clipped_eigenmass: float
    dropped_singular_values: int = 0


@dataclass(frozen=True)
class FreeParameter:
    """
    One optimizer coordinate bound to one or more splitter fields.

    slots are (setting, splitter, field) with field "rotation" (rotation angle,
    radians, mixing angle is half of it) or "phase" (radians).
    """

    name: str
    slots: Tuple[Tuple[int, int, str], ...]
    lower: float
    upper: float

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(tuple(s) for s in self.slots))
        if not self.upper > self.lower:
            raise ValidationError("Parameter box is empty", details={"name": self.name})
        for _, _, kind in self.slots:
            if kind not in ("rotation", "phase"):
                raise ValidationError("Unknown parameter field", details={"name": self.name, "field": kind})


@dataclass(frozen=True)
class ConfigTemplate:
    """Base settings plus the free parameters the optimizer may move."""

    base: TomographySetup
    parameters: Tuple[FreeParameter, ...]

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        for p in self.parameters:
            for g, k, _ in p.slots:
                if g >= self.base.n_settings or k >= len(self.base.configs[g].splitters):
                    raise ValidationError("Parameter slot out of range", details={"name": p.name, "slot": (g, k)})

    @property
    def bounds(self) -> List[Tuple[float, float]]:
        return [(p.lower, p.upper) for p in self.parameters]


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """Best settings found by the multi-start search."""

    setup: TomographySetup
    parameters: np.ndarray
    log_det: float
    n_starts: int

    @property
    def det(self) -> float:
        return float(np.exp(self.log_det))


# ==================== CLI ====================


EXPERIMENT_KINDS = (
    "modes",
    "bs-scan",
    "hom",
    "phase-scan",
    "tomography",
    "optimize-config",
    "noise-sim",
    "scaling",
    "heating-fit",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI invocation: command, inputs and run knobs."""

    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    options: Dict[str, object] = field(default_factory=dict)
    out_dir: str = "results"
    seed: int = 2024
    shots: int = 0
    fmt: str = "csv"

    def __post_init__(self):
        if self.command not in EXPERIMENT_KINDS:
            raise ValidationError("Unknown experiment kind", details={"command": self.command})
