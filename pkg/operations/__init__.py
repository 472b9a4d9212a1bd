"""
Operations layer for Phononet.

Numerical operations - pure functions over domain dataclasses.
No file I/O - results are returned as arrays, dataclasses or DataFrames
that services/ may write out.
"""

from .ionchain_ops import (
    equilibrium_positions,
    transverse_modes,
    build_chain,
    fit_axial_frequency,
    fitted_five_ion_chain,
    assign_ion_for_mode,
    assign_ion_for_pair,
    connectivity_stats,
    estimate_mode_spacing,
    infinite_chain_min_frequency,
    mode_spacing_scaling,
    spacing_for_min_frequency,
    bs_duration_for_spacing,
    bs_duration_scaling,
    synthetic_mode_table,
    mode_table_to_dict,
    mode_table_from_dict,
)

from .fock_ops import (
    enumerate_basis,
    permanent,
    permanent_naive,
    lift_unitary,
    lift_unitary_dense,
    output_probabilities,
    fock_state,
    density_from_state,
    embed_with_ancillas,
    label_probabilities,
    mode_populations,
)

from .pulse_ops import (
    pulse_envelope,
    pulse_area_factor,
    ramp_fraction_for_area,
)

from .network_ops import (
    bs_angle_from_params,
    calibrated_ramp_fraction,
    square_pulse_angle,
    check_angle_consistency,
    bs_mode_unitary,
    compose_interferometer,
    interferometer_fock_operator,
    network_probabilities,
    ac_stark_shifts,
    compensate_phases,
    reference_beam_splitter,
    reference_tomography_config,
    hom_scan,
    hom_visibility,
    phase_scan,
    bs_population_scan,
)

from .detection_ops import (
    binary_pattern_distribution,
    infer_fock_from_binary,
    apply_confusion,
    correct_readout,
    sample_patterns,
    fock_distribution_from_patterns,
)

from .dynamics_ops import (
    hilbert_basis,
    hilbert_state,
    build_full_hamiltonian,
    build_drive,
    simulate_bs_full,
    simulated_bs_angle,
    adiabatic_bs_angle,
    duration_for_angle,
    calibrate_ramp_fraction,
    calibrate_duration,
    fidelity_landscape,
    population_fidelity,
    fit_fidelity_decay,
)

from .lindblad_ops import (
    collapse_operators,
    simulate_lindblad,
    thermal_initial_state,
    noisy_bs_error,
    measured_noise_model,
    error_budget,
)

from .thermometry_ops import (
    thermal_populations,
    thermal_state,
    bsb_signal,
    fit_nbar,
    fit_heating,
    heating_rate_from_points,
    synthetic_heating_series,
)

from .tomography_ops import (
    build_setup,
    reference_setup,
    single_splitter_setup,
    build_superoperator,
    gram_log_det,
    ml_project,
    state_fidelity,
    reconstruct,
    random_pure_state,
    simulate_measurement,
    measurement_from_counts,
    setting_template,
    single_splitter_template,
    four_splitter_template,
    optimize_configuration,
)

__all__ = [
    # Ion chain
    "equilibrium_positions",
    "transverse_modes",
    "build_chain",
    "fit_axial_frequency",
    "fitted_five_ion_chain",
    "assign_ion_for_mode",
    "assign_ion_for_pair",
    "connectivity_stats",
    "estimate_mode_spacing",
    "infinite_chain_min_frequency",
    "mode_spacing_scaling",
    "spacing_for_min_frequency",
    "bs_duration_for_spacing",
    "bs_duration_scaling",
    "synthetic_mode_table",
    "mode_table_to_dict",
    "mode_table_from_dict",
    # Fock space
    "enumerate_basis",
    "permanent",
    "permanent_naive",
    "lift_unitary",
    "lift_unitary_dense",
    "output_probabilities",
    "fock_state",
    "density_from_state",
    "embed_with_ancillas",
    "label_probabilities",
    "mode_populations",
    # Pulses
    "pulse_envelope",
    "pulse_area_factor",
    "ramp_fraction_for_area",
    # Network
    "bs_angle_from_params",
    "calibrated_ramp_fraction",
    "square_pulse_angle",
    "check_angle_consistency",
    "bs_mode_unitary",
    "compose_interferometer",
    "interferometer_fock_operator",
    "network_probabilities",
    "ac_stark_shifts",
    "compensate_phases",
    "reference_beam_splitter",
    "reference_tomography_config",
    "hom_scan",
    "hom_visibility",
    "phase_scan",
    "bs_population_scan",
    # Detection
    "binary_pattern_distribution",
    "infer_fock_from_binary",
    "apply_confusion",
    "correct_readout",
    "sample_patterns",
    "fock_distribution_from_patterns",
    # Dynamics
    "hilbert_basis",
    "hilbert_state",
    "build_full_hamiltonian",
    "build_drive",
    "simulate_bs_full",
    "simulated_bs_angle",
    "adiabatic_bs_angle",
    "duration_for_angle",
    "calibrate_ramp_fraction",
    "calibrate_duration",
    "fidelity_landscape",
    "population_fidelity",
    "fit_fidelity_decay",
    # Master equation
    "collapse_operators",
    "simulate_lindblad",
    "thermal_initial_state",
    "noisy_bs_error",
    "measured_noise_model",
    "error_budget",
    # Thermometry
    "thermal_populations",
    "thermal_state",
    "bsb_signal",
    "fit_nbar",
    "fit_heating",
    "heating_rate_from_points",
    "synthetic_heating_series",
    # Tomography
    "build_setup",
    "reference_setup",
    "single_splitter_setup",
    "build_superoperator",
    "gram_log_det",
    "ml_project",
    "state_fidelity",
    "reconstruct",
    "random_pure_state",
    "simulate_measurement",
    "measurement_from_counts",
    "setting_template",
    "single_splitter_template",
    "four_splitter_template",
    "optimize_configuration",
]
