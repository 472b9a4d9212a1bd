"""
Unit tests for Fock operations.

Tests cover sector enumeration, permanents, unitary lifting and the
probability conventions.
"""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from domain.exceptions import CapacityError, ValidationError
from operations.fock_ops import (
    density_from_state,
    embed_with_ancillas,
    enumerate_basis,
    fock_state,
    label_probabilities,
    lift_unitary,
    lift_unitary_dense,
    mode_populations,
    output_probabilities,
    permanent,
    permanent_naive,
    sector_size,
)


# ==================== Sectors ====================


def test_enumerate_basis_order():
    """Test the basis runs in descending lexicographic order."""
    assert enumerate_basis(2, 1).basis == ((1, 0), (0, 1))
    assert enumerate_basis(2, 2).basis == ((2, 0), (1, 1), (0, 2))
    assert enumerate_basis(3, 0).basis == ((0, 0, 0),)


def test_enumerate_basis_size_and_index():
    """Test sector sizes and the occupation index."""
    sector = enumerate_basis(4, 2)

    assert sector.dim == sector_size(4, 2) == 10
    for i, occupation in enumerate(sector.basis):
        assert sector.index_of(occupation) == i
    assert sector.labels()[0] == "2000"

    with pytest.raises(ValidationError):
        sector.index_of((1, 0, 0, 0))


def test_enumerate_basis_capacity():
    """Test oversize sectors raise CapacityError."""
    with pytest.raises(CapacityError) as exc_info:
        enumerate_basis(10, 10, capacity=1000)

    assert exc_info.value.details["size"] == sector_size(10, 10)


# ==================== Permanents ====================


def test_permanent_known_values():
    """Test permanents of small fixed matrices."""
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.zeros((0, 0))) == 1.0
    assert permanent(np.array([[1, 2], [3, 4]])) == pytest.approx(10.0)
    assert permanent(np.eye(5)) == pytest.approx(1.0)


def test_permanent_matches_naive(rng):
    """Test Ryser against the permutation sum on random complex matrices."""
    for size in range(1, 6):
        a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        assert abs(permanent(a) - permanent_naive(a)) < 1e-10 * max(1.0, abs(permanent_naive(a)))


def test_permanent_row_multilinear(rng):
    """Test scaling one row scales the permanent, and rows add linearly."""
    for size in range(1, 6):
        a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        row = rng.normal(size=size) + 1j * rng.normal(size=size)
        c = complex(rng.normal(), rng.normal())
        k = int(rng.integers(size))

        scaled = a.copy()
        scaled[k] *= c
        assert abs(permanent(scaled) - c * permanent(a)) <= 1e-10 * max(1.0, abs(c * permanent(a)))

        replaced = a.copy()
        replaced[k] = row
        summed = a.copy()
        summed[k] += row
        expected = permanent(a) + permanent(replaced)
        assert abs(permanent(summed) - expected) <= 1e-10 * max(1.0, abs(expected))


# ==================== Lifting ====================


def test_lift_unitary_single_phonon_is_mode_unitary(rng):
    """Test the N=1 sector reproduces the mode unitary."""
    u = unitary_group.rvs(3, random_state=rng)
    assert np.allclose(lift_unitary(u, enumerate_basis(3, 1)), u)


def test_lift_unitary_matches_dense_oracle(rng):
    """Test permanent lifting against exp(i Σ h a†a) for 50 random unitaries."""
    worst = 0.0
    for trial in range(50):
        n_modes = 2 + trial % 3
        n_phonons = 1 + trial % 3
        sector = enumerate_basis(n_modes, n_phonons)
        u = unitary_group.rvs(n_modes, random_state=rng)
        worst = max(worst, float(np.max(np.abs(lift_unitary(u, sector) - lift_unitary_dense(u, sector)))))

    assert worst < 1e-10


def test_lift_unitary_is_unitary(rng):
    """Test lifted propagators stay unitary."""
    sector = enumerate_basis(3, 3)
    lifted = lift_unitary(unitary_group.rvs(3, random_state=rng), sector)
    assert np.allclose(lifted.conj().T @ lifted, np.eye(sector.dim), atol=1e-10)


def test_lift_unitary_composes(rng):
    """Test lift(U·V) = lift(U)·lift(V) for random pairs up to four modes and two phonons."""
    for n_modes in range(2, 5):
        for n_phonons in (1, 2):
            sector = enumerate_basis(n_modes, n_phonons)
            u = unitary_group.rvs(n_modes, random_state=rng)
            v = unitary_group.rvs(n_modes, random_state=rng)
            composed = lift_unitary(u, sector) @ lift_unitary(v, sector)
            assert np.max(np.abs(lift_unitary(u @ v, sector) - composed)) < 1e-9


def test_lift_unitary_rejects_bad_input():
    """Test non-unitary and wrong-size inputs."""
    with pytest.raises(ValidationError):
        lift_unitary(np.array([[1.0, 1.0], [0.0, 1.0]]), enumerate_basis(2, 1))
    with pytest.raises(ValidationError):
        lift_unitary(np.eye(3), enumerate_basis(2, 1))


def test_hong_ou_mandel_dip():
    """Test |1,1⟩ through a 50:50 splitter never leaves one phonon per mode."""
    sector = enumerate_basis(2, 2)
    c = s = 1 / math.sqrt(2)
    u = np.array([[c, 1j * s], [1j * s, c]])
    rho = density_from_state(fock_state(sector, {(1, 1): 1.0}))

    p = output_probabilities(rho, lift_unitary(u, sector), convention="forward")

    assert p[sector.index_of((1, 1))] < 1e-12
    assert p[sector.index_of((2, 0))] == pytest.approx(0.5)
    assert p[sector.index_of((0, 2))] == pytest.approx(0.5)


# ==================== Probabilities ====================


def test_output_probabilities_conventions_agree(rng):
    """Test adjoint with U† equals forward with U."""
    sector = enumerate_basis(3, 2)
    lifted = lift_unitary(unitary_group.rvs(3, random_state=rng), sector)
    amplitudes = rng.normal(size=sector.dim) + 1j * rng.normal(size=sector.dim)
    state = fock_state(sector, dict(zip(sector.basis, amplitudes)))
    rho = density_from_state(state)

    forward = output_probabilities(rho, lifted, convention="forward")
    adjoint = output_probabilities(rho, lifted.conj().T, convention="adjoint")

    assert np.allclose(forward, adjoint, atol=1e-12)
    assert forward.sum() == pytest.approx(1.0)


def test_output_probabilities_rejects_bad_trace():
    """Test unnormalized density matrices are refused."""
    with pytest.raises(ValidationError):
        output_probabilities(np.diag([0.5, 0.4]), np.eye(2))

    with pytest.raises(ValidationError):
        output_probabilities(np.diag([0.5, 0.5]), np.eye(2), convention="sideways")


def test_embed_with_ancillas():
    """Test vacuum ancillas pad every occupation with zeros."""
    sector = enumerate_basis(2, 1)
    state = fock_state(sector, {(1, 0): 1.0, (0, 1): 1.0})

    embedded = embed_with_ancillas(state, 2)

    assert embedded.sector.n_modes == 4
    assert embedded.sector.dim == 4
    assert np.real(np.trace(embedded.matrix)) == pytest.approx(1.0)
    i, j = embedded.sector.index_of((1, 0, 0, 0)), embedded.sector.index_of((0, 1, 0, 0))
    assert embedded.matrix[i, j] == pytest.approx(0.5)
    assert embedded.matrix[embedded.sector.index_of((0, 0, 1, 0))].sum() == 0


def test_label_probabilities_and_populations():
    """Test labelled probabilities and mean phonon numbers."""
    sector = enumerate_basis(2, 2)
    p = [0.5, 0.0, 0.5]

    labels = label_probabilities(p, sector)

    assert labels[0] == {"occupation": [2, 0], "p": 0.5}
    assert np.allclose(mode_populations(p, sector), [1.0, 1.0])

    with pytest.raises(ValidationError):
        label_probabilities([1.0], sector)


def test_fock_state_zero_norm():
    """Test an all-zero amplitude map is rejected."""
    with pytest.raises(ValidationError):
        fock_state(enumerate_basis(2, 1), {(1, 0): 0.0})
