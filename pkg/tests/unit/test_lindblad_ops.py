"""
Unit tests for master-equation operations.

Tests cover collapse operators, noisy propagation and the beam-splitter error budget.
"""

import math

import numpy as np
import pytest

from domain.exceptions import ValidationError
from domain.models import NoiseModel, TruncatedHilbert
from operations.dynamics_ops import (
    build_drive,
    build_full_hamiltonian,
    hilbert_basis,
    hilbert_state,
    number_operator,
    simulate_bs_full,
)
from operations.lindblad_ops import (
    BUDGET_DURATION_S,
    budget_splitter,
    collapse_operators,
    error_budget,
    measured_noise_model,
    noise_for_kind,
    noisy_bs_error,
    simulate_lindblad,
    thermal_initial_state,
)


@pytest.fixture
def single_mode():
    """One mode with levels 0 and 1, no spin."""
    return TruncatedHilbert(modes=(0,), cutoff=1, include_spin=False)


def _r_squared(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    return 1.0 - np.sum(residual**2) / np.sum((y - np.mean(y)) ** 2)


# ==================== Collapse operators ====================


def test_collapse_operators_per_channel():
    """Test operator counts for collective and independent dephasing."""
    hilbert = TruncatedHilbert.for_phonons((0, 1), 1, guard=1, conserve_excitations=True, spin_ion=0)

    collective = NoiseModel(motional_dephasing={0: 10.0, 1: 10.0}, collective_dephasing=True)
    independent = NoiseModel(motional_dephasing={0: 10.0, 1: 10.0}, collective_dephasing=False)

    assert len(collapse_operators(collective, hilbert)) == 1
    assert len(collapse_operators(independent, hilbert)) == 2
    assert len(collapse_operators(measured_noise_model(), hilbert)) == 5


def test_collapse_operators_standard_heating_needs_full_space():
    """Test a† jumps cannot live in an excitation-restricted space."""
    hilbert = TruncatedHilbert.for_phonons((0, 1), 1, guard=1, conserve_excitations=True)
    with pytest.raises(ValidationError):
        collapse_operators(noise_for_kind("standard-heating", 10.0), hilbert)


def test_noise_for_kind_unknown():
    """Test unknown channels are rejected."""
    with pytest.raises(ValidationError):
        noise_for_kind("cosmic", 1.0)


# ==================== Propagation ====================


def test_motional_dephasing_oracle(single_mode):
    """Test the |0⟩/|1⟩ coherence decays as e^{-κt/2}."""
    kappa, duration = 100.0, 10e-3
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    noise = NoiseModel(motional_dephasing={0: kappa})

    trajectory = simulate_lindblad(np.zeros((2, 2)), noise, single_mode, rho0, duration)

    assert abs(trajectory.final[0, 1]) == pytest.approx(0.5 * math.exp(-kappa * duration / 2), rel=1e-6)
    assert trajectory.trace_error < 1e-9
    assert trajectory.min_eigenvalue > -1e-10


def test_standard_heating_adds_quanta():
    """Test ⟨n⟩ grows as αt from the vacuum."""
    hilbert = TruncatedHilbert(modes=(0,), cutoff=4, include_spin=False)
    basis = hilbert_basis(hilbert)
    vacuum = hilbert_state(hilbert, {(0, (0,)): 1.0})
    rho0 = np.outer(vacuum, vacuum.conj())
    alpha, duration = 30.0, 1e-3

    trajectory = simulate_lindblad(
        np.zeros((len(basis), len(basis))), NoiseModel(heating_rates={0: alpha}, standard_heating=True),
        hilbert, rho0, duration,
    )

    mean_n = np.real(np.trace(number_operator(basis, 0) @ trajectory.final))
    assert mean_n == pytest.approx(alpha * duration, rel=1e-3)


def test_simulate_lindblad_rejects_wrong_dimension(single_mode):
    """Test the initial state must live on the truncated space."""
    with pytest.raises(ValidationError):
        simulate_lindblad(np.zeros((2, 2)), NoiseModel(), single_mode, np.eye(3) / 3, 1e-3)


def test_noiseless_lindblad_matches_schrodinger():
    """Test an empty noise model reproduces the pure-state run."""
    chain, spec = budget_splitter()
    hilbert = TruncatedHilbert.for_phonons((0, 1), 1, guard=1, conserve_excitations=True, spin_ion=0)
    drive = build_drive(spec, chain, include_carrier=False)
    psi0 = hilbert_state(hilbert, {(0, (1, 0)): 1.0})

    pure = simulate_bs_full(drive, chain, hilbert, psi0, times=[0.0, spec.duration])
    mixed = simulate_lindblad(
        build_full_hamiltonian(drive, chain, hilbert), NoiseModel(), hilbert,
        np.outer(psi0, psi0.conj()), spec.duration, times=[0.0, spec.duration],
    )

    assert np.allclose(np.abs(pure.final_state) ** 2, np.real(np.diag(mixed.final)), atol=1e-7)


def test_thermal_initial_state():
    """Test the thermal start has unit trace and the spin down."""
    hilbert = TruncatedHilbert.for_phonons((0, 1), 0, guard=3)
    rho = thermal_initial_state(hilbert, NoiseModel(thermal_nbar={0: 0.1}))
    basis = hilbert_basis(hilbert)

    assert np.trace(rho).real == pytest.approx(1.0)
    assert all(rho[i, i] == 0 for i, (spin, _) in enumerate(basis) if spin)
    assert rho[basis.index((0, (0, 0))), basis.index((0, (0, 0)))].real == pytest.approx(1 / 1.1, rel=1e-4)

    with pytest.raises(ValidationError):
        thermal_initial_state(TruncatedHilbert.for_phonons((0, 1), 1, conserve_excitations=True), NoiseModel())


# ==================== Error budget ====================


def test_budget_splitter_is_balanced():
    """Test the budget splitter drives two modes with equal couplings."""
    chain, spec = budget_splitter()
    assert spec.duration == BUDGET_DURATION_S
    assert chain.n_modes == 2
    assert spec.coupling_m == spec.coupling_n


def test_noisy_bs_error_noiseless_is_zero():
    """Test no noise adds no error."""
    assert noisy_bs_error(NoiseModel()) == pytest.approx(0.0, abs=1e-9)


def test_noisy_bs_error_measured_rates():
    """Test the measured rates add less than 1% error."""
    error = noisy_bs_error(measured_noise_model())
    assert 0.0 < error <= 0.01


@pytest.mark.parametrize("kind,rates", [
    ("heating", np.geomspace(10.0, 100.0, 4)),
    ("motional", np.geomspace(10.0, 100.0, 4)),
    ("spin", np.geomspace(10.0, 100.0, 4)),
])
def test_error_budget_linear_in_rate(kind, rates):
    """Test error grows linearly with the rate over one decade."""
    df = error_budget(kind, rates)

    assert list(df.columns) == ["rate", "error"]
    assert np.all(np.diff(df["error"]) > 0)
    assert _r_squared(df["rate"].to_numpy(), df["error"].to_numpy()) > 0.99


def test_error_budget_unknown_kind():
    """Test unknown budget kinds are rejected."""
    with pytest.raises(ValidationError):
        error_budget("cosmic", [1.0])
