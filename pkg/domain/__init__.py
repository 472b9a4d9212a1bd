"""
Domain layer for Phononet.

This module contains the physical entities, decision rules, and validators.
No dependencies on file formats or the command line.
"""

from .models import (
    TrapParams,
    ModeTable,
    ConnectivityStats,
    AxialFit,
    FockSector,
    FockState,
    DensityMatrix,
    BeamSplitterSpec,
    InterferometerConfig,
    DetectionModel,
    CorrectedReadout,
    DriveSpec,
    NoiseModel,
    TruncatedHilbert,
    Trajectory,
    DensityTrajectory,
    HeatingFit,
    FidelityDecayFit,
    TomographySetup,
    SuperOperator,
    MeasurementResult,
    ReconstructionResult,
    FreeParameter,
    ConfigTemplate,
    OptimizationResult,
    ExperimentSpec,
)

from .exceptions import (
    PhononetError,
    ConfigError,
    StateParseError,
    PhysicsError,
    ValidationError,
    InvalidPairError,
    IncompleteSpecError,
    CapacityError,
    SolverError,
    InstabilityError,
    SearchError,
    ResonanceError,
    AmbiguityError,
    LostPhononError,
    FitError,
    IllConditionedError,
    DegenerateTemplateError,
    TruncationError,
    StiffnessError,
    ExportError,
)

from .validators import (
    validate_unitary,
    validate_hermitian,
    validate_density_matrix,
    validate_probability_vector,
    validate_mode_pair,
    validate_ion_index,
    validate_positive,
    validate_ramp_fraction,
    validate_convention,
    validate_output_format,
    validate_input_file,
)

from .rules import (
    select_best_ion,
    binary_pattern,
    matching_occupations,
    all_patterns,
    mode_pair_key,
)

__all__ = [
    # Models
    "TrapParams",
    "ModeTable",
    "ConnectivityStats",
    "AxialFit",
    "FockSector",
    "FockState",
    "DensityMatrix",
    "BeamSplitterSpec",
    "InterferometerConfig",
    "DetectionModel",
    "CorrectedReadout",
    "DriveSpec",
    "NoiseModel",
    "TruncatedHilbert",
    "Trajectory",
    "DensityTrajectory",
    "HeatingFit",
    "FidelityDecayFit",
    "TomographySetup",
    "SuperOperator",
    "MeasurementResult",
    "ReconstructionResult",
    "FreeParameter",
    "ConfigTemplate",
    "OptimizationResult",
    "ExperimentSpec",
    # Exceptions
    "PhononetError",
    "ConfigError",
    "StateParseError",
    "PhysicsError",
    "ValidationError",
    "InvalidPairError",
    "IncompleteSpecError",
    "CapacityError",
    "SolverError",
    "InstabilityError",
    "SearchError",
    "ResonanceError",
    "AmbiguityError",
    "LostPhononError",
    "FitError",
    "IllConditionedError",
    "DegenerateTemplateError",
    "TruncationError",
    "StiffnessError",
    "ExportError",
    # Validators
    "validate_unitary",
    "validate_hermitian",
    "validate_density_matrix",
    "validate_probability_vector",
    "validate_mode_pair",
    "validate_ion_index",
    "validate_positive",
    "validate_ramp_fraction",
    "validate_convention",
    "validate_output_format",
    "validate_input_file",
    # Rules
    "select_best_ion",
    "binary_pattern",
    "matching_occupations",
    "all_patterns",
    "mode_pair_key",
]
