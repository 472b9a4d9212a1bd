"""
Unit tests for tomography operations.

Tests cover the superoperator, reconstruction, fidelities, simulated and
recorded measurements, and the setting optimizer.
"""

import math

import numpy as np
import pytest

from domain.exceptions import IllConditionedError, ValidationError
from domain.models import DetectionModel
from operations.fock_ops import enumerate_basis, fock_state
from operations.tomography_ops import (
    apply_parameters,
    build_superoperator,
    four_splitter_template,
    gram_log_det,
    measurement_from_counts,
    ml_project,
    optimize_configuration,
    random_parameters,
    random_pure_state,
    reconstruct,
    reference_setup,
    simulate_measurement,
    single_splitter_setup,
    single_splitter_template,
    state_fidelity,
    template_log_det,
)


@pytest.fixture
def single_phonon_state():
    """(|10⟩ + |01⟩)/√2."""
    return fock_state(enumerate_basis(2, 1), {(1, 0): 1.0, (0, 1): 1.0})


# ==================== Superoperator ====================


def test_build_superoperator_shape():
    """Test rows run over settings and outputs, columns over vec(ρ)."""
    setup = reference_setup(1)
    superop = build_superoperator(setup)

    assert superop.shape == (4, 4)
    assert superop.row_labels()[0] == (0, "1000")
    assert math.isfinite(gram_log_det(superop))


def test_superoperator_predicts_probabilities(single_phonon_state):
    """Test L vec(ρ) equals the simulated output probabilities."""
    setup = reference_setup(1)
    superop = build_superoperator(setup)
    rho = np.outer(single_phonon_state.amplitudes, single_phonon_state.amplitudes.conj())

    predicted = np.real(superop.matrix @ rho.ravel())
    simulated = simulate_measurement(single_phonon_state, setup).stacked()

    assert np.allclose(predicted, simulated, atol=1e-12)


# ==================== Reconstruction ====================


def test_ml_project():
    """Test projection onto unit-trace PSD matrices."""
    assert np.allclose(ml_project(np.diag([1.2, -0.2])), np.diag([1.0, 0.0]))
    assert np.allclose(ml_project(np.diag([0.3, 0.7])), np.diag([0.3, 0.7]))

    projected = ml_project(np.array([[0.6, 0.7], [0.7, 0.4]]))
    assert np.trace(projected).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(projected).min() > -1e-12


def test_state_fidelity_pure_states(single_phonon_state):
    """Test fidelity of identical and orthogonal states."""
    other = fock_state(enumerate_basis(2, 1), {(1, 0): 1.0, (0, 1): -1.0})
    assert state_fidelity(single_phonon_state, single_phonon_state) == pytest.approx(1.0)
    assert state_fidelity(single_phonon_state, other) == pytest.approx(0.0, abs=1e-12)


def test_state_fidelity_reported_matrix():
    """Test the fidelity of a rounded reconstruction against |+⟩."""
    reported = np.array([[0.469, 0.472 - 0.005j], [0.472 + 0.005j, 0.475]])
    ideal = np.full((2, 2), 0.5)

    assert state_fidelity(reported, ideal, validate=False) == pytest.approx(0.9449, abs=0.005)

    with pytest.raises(ValidationError):
        state_fidelity(np.diag([0.5, 0.6]), ideal)


def test_reconstruct_single_phonon_noiseless(single_phonon_state):
    """Test exact probabilities reconstruct the single-phonon state."""
    setup = reference_setup(1)
    result = reconstruct(simulate_measurement(single_phonon_state, setup), build_superoperator(setup), target=single_phonon_state)

    assert result.fidelity_to_target >= 1 - 1e-8
    assert result.purity == pytest.approx(1.0, abs=1e-8)
    assert result.clipped_eigenmass < 1e-8


def test_reconstruct_two_phonon_noiseless():
    """Test (|11⟩ + i|02⟩ + i|20⟩)/√3 from the single four-splitter setting."""
    state = fock_state(enumerate_basis(2, 2), {(1, 1): 1.0, (0, 2): 1j, (2, 0): 1j})
    setup = reference_setup(2)

    result = reconstruct(simulate_measurement(state, setup), build_superoperator(setup), target=state)

    assert result.fidelity_to_target >= 1 - 1e-8


@pytest.mark.parametrize("n_phonons", [1, 2])
def test_reconstruct_random_states_exact(rng, n_phonons):
    """Test 20 random pure states round-trip through the four-splitter setting."""
    setup = reference_setup(n_phonons)
    superop = build_superoperator(setup)

    for _ in range(20):
        state = random_pure_state(setup.input_sector, rng)
        result = reconstruct(simulate_measurement(state, setup), superop, target=state)
        assert result.fidelity_to_target >= 1 - 1e-8


def test_reference_setup_two_phonon_full_rank():
    """Test the single setting determines every two-phonon density matrix."""
    superop = build_superoperator(reference_setup(2))

    assert superop.shape == (10, 9)
    assert np.linalg.matrix_rank(superop.matrix) == 9


def test_reconstruct_linear_before_projection(rng):
    """Test the raw estimate is linear in the measured probabilities."""
    setup = reference_setup(2)
    superop = build_superoperator(setup)
    p1 = simulate_measurement(random_pure_state(setup.input_sector, rng), setup).stacked()
    p2 = simulate_measurement(random_pure_state(setup.input_sector, rng), setup).stacked()
    a = 0.3

    mixed = reconstruct(a * p1 + (1 - a) * p2, superop).rho_raw
    expected = a * reconstruct(p1, superop).rho_raw + (1 - a) * reconstruct(p2, superop).rho_raw

    assert np.allclose(mixed, expected, atol=1e-9)


def test_ml_project_is_nearest_physical_state(rng):
    """Test no sampled density matrix lies closer to the raw estimate than its projection."""
    for _ in range(20):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        raw = 0.5 * (a + a.conj().T)
        projected = ml_project(raw)
        distance = np.linalg.norm(projected - raw)

        assert np.trace(projected).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(projected).min() > -1e-12
        for _ in range(50):
            b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            sigma = b @ b.conj().T
            sigma /= np.trace(sigma).real
            assert distance <= np.linalg.norm(sigma - raw) + 1e-12


def test_reference_setting_beats_random_settings():
    """Test det(L†L) of the calibrated setting exceeds 1000 random four-splitter settings."""
    template = four_splitter_template(1)
    reference = gram_log_det(build_superoperator(reference_setup(1)))
    rng = np.random.default_rng(11)

    values = [template_log_det(template, random_parameters(template, rng)) for _ in range(1000)]

    assert np.mean([v < reference for v in values]) >= 0.99


def test_reconstruct_shot_noise_median(single_phonon_state):
    """Test 300 shots per setting keep the median fidelity above 0.97."""
    setup = reference_setup(1)
    superop = build_superoperator(setup)
    fidelities = [
        reconstruct(simulate_measurement(single_phonon_state, setup, shots=300, seed=seed), superop, target=single_phonon_state).fidelity_to_target
        for seed in range(100)
    ]

    assert np.median(fidelities) >= 0.97
    assert min(fidelities) >= 0.945 - 0.03


def test_reconstruct_ill_conditioned():
    """Test a single splitter setting cannot determine a qubit state."""
    setup = single_splitter_setup(phases=[0.0])
    superop = build_superoperator(setup)

    with pytest.raises(IllConditionedError):
        reconstruct([0.5, 0.5], superop)


def test_reconstruct_rejects_unnormalized_blocks():
    """Test setting blocks far from unit sum are rejected."""
    setup = reference_setup(1)
    with pytest.raises(ValidationError) as exc_info:
        reconstruct([0.5, 0.5, 0.5, 0.5], build_superoperator(setup))
    assert "normalized" in str(exc_info.value)


# ==================== Measurements ====================


def test_simulate_measurement_shots(single_phonon_state):
    """Test sampled probabilities carry counts that sum to the shots."""
    result = simulate_measurement(single_phonon_state, reference_setup(1), shots=300, seed=7)

    assert result.shots == 300
    assert result.counts[0].sum() == 300
    assert result.probabilities[0].sum() == pytest.approx(1.0)

    again = simulate_measurement(single_phonon_state, reference_setup(1), shots=300, seed=7)
    assert np.array_equal(result.counts[0], again.counts[0])


def test_simulate_measurement_binary_detection(single_phonon_state):
    """Test readout correction recovers the exact single-phonon reconstruction."""
    setup = reference_setup(1)
    detection = DetectionModel.from_error_rates([0, 1, 2, 3], 0.013, 0.02)
    superop = build_superoperator(setup)

    corrected = simulate_measurement(single_phonon_state, setup, detection=detection)
    uncorrected = simulate_measurement(single_phonon_state, setup, detection=detection, correct=False)

    f_corrected = reconstruct(corrected, superop, target=single_phonon_state).fidelity_to_target
    f_uncorrected = reconstruct(uncorrected, superop, target=single_phonon_state).fidelity_to_target
    assert f_corrected >= 1 - 1e-8
    assert f_uncorrected < f_corrected


def test_measurement_from_counts(single_phonon_state):
    """Test recorded occupation counts feed the reconstruction."""
    setup = reference_setup(1)
    p = simulate_measurement(single_phonon_state, setup).probabilities[0]
    table = {occ: 1000 * value for occ, value in zip(setup.output_sector.basis, p)}

    result = measurement_from_counts(setup, [table])

    assert result.shots == 1000
    assert np.allclose(result.probabilities[0], p)
    with pytest.raises(ValidationError):
        measurement_from_counts(setup, [table, table])


def test_measurement_from_binary_counts(single_phonon_state):
    """Test bright/dark counts map onto single-phonon occupations."""
    setup = reference_setup(1)
    table = {(1, 0, 0, 0): 30, (0, 1, 0, 0): 20, (0, 0, 1, 0): 25, (0, 0, 0, 1): 25, (0, 0, 0, 0): 5}

    result = measurement_from_counts(setup, [table], binary=True)

    assert np.allclose(result.probabilities[0], [0.3, 0.2, 0.25, 0.25])


# ==================== Optimization ====================


def test_optimize_single_splitter_template():
    """Test the optimizer reaches the 0.304π, 2π/3-spaced optimum."""
    reference = gram_log_det(build_superoperator(single_splitter_setup()))

    result = optimize_configuration(single_splitter_template(3), n_starts=8, seed=2024)

    assert result.log_det >= reference + math.log(1 - 1e-6)
    assert len(result.parameters) == 3
    rotation = result.parameters[0]
    assert math.sin(rotation) ** 2 == pytest.approx(2 / 3, abs=1e-3)


def test_fixed_rotation_template():
    """Test a fixed rotation leaves only the phases free."""
    template = single_splitter_template(3, rotation_pi=0.304)
    assert [p.name for p in template.parameters] == ["phase_1_0", "phase_2_0"]


def test_apply_parameters_four_splitter():
    """Test rotation values set twice the mixing angle."""
    template = four_splitter_template(1)
    values = [0.5 * math.pi] * 4 + [0.0, 0.1, 0.2, 0.3]

    setup = apply_parameters(template, values)

    splitters = setup.configs[0].splitters
    assert all(s.theta_bs == pytest.approx(math.pi / 4) for s in splitters)
    assert [s.phi_bs for s in splitters] == pytest.approx([0.0, 0.1, 0.2, 0.3])

    with pytest.raises(ValidationError):
        apply_parameters(template, [0.0])
