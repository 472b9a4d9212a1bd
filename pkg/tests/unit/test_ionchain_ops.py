"""
Unit tests for ion chain operations.

Tests cover equilibrium positions, transverse modes, the axial fit,
ion assignment and the scaling studies.
"""

import math

import numpy as np
import pytest

from config.constants import FIVE_ION_SPECTRUM_HZ
from domain.exceptions import InstabilityError, InvalidPairError, ValidationError
from domain.models import TrapParams
from operations.ionchain_ops import (
    assign_ion_for_mode,
    assign_ion_for_pair,
    bs_duration_for_spacing,
    bs_duration_scaling,
    build_chain,
    connectivity_stats,
    dimensionless_positions,
    equilibrium_positions,
    estimate_mode_spacing,
    fit_axial_frequency,
    fitted_five_ion_chain,
    infinite_chain_min_frequency,
    mode_spacing_scaling,
    mode_table_from_dict,
    mode_table_to_dict,
    spacing_for_min_frequency,
    synthetic_mode_table,
)


@pytest.fixture
def five_ion_params():
    """Harmonic five-ion chain."""
    return TrapParams(n_ions=5, nu_com_transverse=2.2e6, nu_axial=0.3e6)


# ==================== Equilibrium ====================


def test_dimensionless_positions_two_and_three_ions():
    """Test closed-form equilibria of small chains."""
    assert np.allclose(dimensionless_positions(2), [-(0.25 ** (1 / 3)), 0.25 ** (1 / 3)], atol=1e-10)
    assert np.allclose(dimensionless_positions(3), [-(1.25 ** (1 / 3)), 0.0, 1.25 ** (1 / 3)], atol=1e-10)
    assert np.allclose(dimensionless_positions(1), [0.0])


def test_equilibrium_positions_symmetric(five_ion_params):
    """Test harmonic chains are sorted and symmetric about the trap centre."""
    z = equilibrium_positions(five_ion_params)
    assert np.all(np.diff(z) > 0)
    assert np.allclose(z, -z[::-1], atol=1e-18)


def test_equilibrium_positions_equal_spacing():
    """Test equal-spacing chains are placed directly."""
    params = TrapParams(n_ions=4, nu_com_transverse=3e6, nu_axial=0.1e6, fixed_spacing=5e-6)
    assert np.allclose(np.diff(equilibrium_positions(params)), 5e-6)


# ==================== Transverse modes ====================


def test_build_chain_com_and_tilt(five_ion_params):
    """Test COM mode at ν_x with uniform amplitudes and the tilt mode at √(ν_x² − ν_z²)."""
    modes = build_chain(five_ion_params)

    assert modes.n_modes == 5 and modes.n_ions == 5
    assert modes.frequencies[-1] == pytest.approx(2.2e6, rel=1e-9)
    assert np.allclose(modes.mode_vectors[:, -1], 1 / math.sqrt(5), atol=1e-9)
    assert modes.frequencies[-2] == pytest.approx(math.sqrt(2.2e6**2 - 0.3e6**2), rel=1e-9)
    assert np.allclose(modes.mode_vectors.T @ modes.mode_vectors, np.eye(5), atol=1e-10)


def test_build_chain_unstable_raises():
    """Test a soft transverse confinement buckles the chain."""
    params = TrapParams(n_ions=10, nu_com_transverse=1.0e6, nu_axial=0.9e6)

    with pytest.raises(InstabilityError) as exc_info:
        build_chain(params)

    assert "unstable" in str(exc_info.value)


def test_trap_params_rejects_inverted_frequencies():
    """Test the transverse frequency must exceed the axial one."""
    with pytest.raises(ValidationError):
        TrapParams(n_ions=3, nu_com_transverse=1e6, nu_axial=2e6)


# ==================== Axial fit ====================


def test_fit_axial_frequency_recovers_synthetic_spectrum(five_ion_params):
    """Test an exact chain spectrum is fitted back to 1e-9 relative."""
    freqs = build_chain(five_ion_params).frequencies
    placeholder = TrapParams(n_ions=5, nu_com_transverse=2.2e6, nu_axial=0.1e6)

    fit = fit_axial_frequency(freqs, placeholder)

    assert fit.nu_axial == pytest.approx(0.3e6, rel=1e-9)
    assert fit.nu_com_transverse == pytest.approx(2.2e6, rel=1e-12)
    assert fit.rms_residual < 1e-3


def test_fit_axial_frequency_measured_spectrum():
    """Test the measured five-ion spectrum gives a finite residual and a sub-MHz axial frequency."""
    placeholder = TrapParams(n_ions=5, nu_com_transverse=max(FIVE_ION_SPECTRUM_HZ), nu_axial=0.3e6)

    fit = fit_axial_frequency(FIVE_ION_SPECTRUM_HZ, placeholder)

    assert 0.2e6 < fit.nu_axial < 0.6e6
    assert 0.0 < fit.rms_residual < 30e3
    assert len(fit.model_frequencies) == 5


def test_fit_axial_frequency_wrong_length():
    """Test the spectrum must list N or N-1 frequencies."""
    placeholder = TrapParams(n_ions=5, nu_com_transverse=2.2e6, nu_axial=0.3e6)
    with pytest.raises(ValidationError):
        fit_axial_frequency([2.0e6, 2.1e6], placeholder)


# ==================== Assignment ====================


def test_assign_ion_tie_goes_to_lowest_index():
    """Test the uniform COM mode assigns the first ion."""
    modes = fitted_five_ion_chain()
    assert assign_ion_for_mode(modes, modes.com_index()) == 0


@pytest.mark.parametrize("mode,ion", [(1, 3), (4, 1)])
def test_assign_ion_for_mode_five_ion_chain(mode, ion):
    """Test 1-based assignments of the measured chain: mode 1 to the centre, mode 4 to an end."""
    modes = fitted_five_ion_chain()
    assert assign_ion_for_mode(modes, mode - 1) == ion - 1


@pytest.mark.parametrize("pair,ion", [((1, 2), 2), ((1, 3), 3)])
def test_assign_ion_for_pair_five_ion_chain(pair, ion):
    """Test 1-based pair assignments of the measured chain."""
    modes = fitted_five_ion_chain()
    assert assign_ion_for_pair(modes, pair[0] - 1, pair[1] - 1) == ion - 1


def test_assign_ion_for_pair_maximizes_product():
    """Test the chosen ion maximizes |η_m η_n|."""
    modes = fitted_five_ion_chain()
    eta = modes.lamb_dicke
    for m, n in ((0, 1), (1, 2), (2, 4)):
        ion = assign_ion_for_pair(modes, m, n)
        products = np.abs(eta[:, m] * eta[:, n])
        assert products[ion] == pytest.approx(products.max(), rel=1e-9)


def test_assign_ion_for_pair_invalid():
    """Test invalid pairs are rejected."""
    modes = fitted_five_ion_chain()
    with pytest.raises(InvalidPairError):
        assign_ion_for_pair(modes, 1, 1)
    with pytest.raises(InvalidPairError):
        assign_ion_for_pair(modes, 0, 5)


# ==================== Scaling ====================


def test_estimate_mode_spacing():
    """Test the average spacing for a 100-ion chain between 1 and 5 MHz."""
    assert estimate_mode_spacing(5e6, 1e6, 100) == pytest.approx(40e3)

    with pytest.raises(ValidationError):
        estimate_mode_spacing(5e6, 1e6, 1)


def test_spacing_for_min_frequency_inverts_infinite_chain():
    """Test the derived spacing puts the lowest mode at ν_min."""
    d = spacing_for_min_frequency(5e6, 1e6)
    params = TrapParams(n_ions=10, nu_com_transverse=5e6, nu_axial=0.5e6, fixed_spacing=d)

    assert infinite_chain_min_frequency(params) == pytest.approx(1e6, rel=1e-9)

    with pytest.raises(ValidationError):
        spacing_for_min_frequency(1e6, 5e6)


def test_mode_spacing_scaling_equal_chains():
    """Test the exact spacing stays within a factor 2 of the estimate for 10 to 100 ions."""
    spacing = spacing_for_min_frequency(5e6, 1e6)
    params = TrapParams(n_ions=10, nu_com_transverse=5e6, nu_axial=0.5e6, fixed_spacing=spacing)

    table = mode_spacing_scaling([10, 30, 100], params)

    assert list(table["n_ions"]) == [10, 30, 100]
    assert table["spacing_estimate_hz"].iloc[-1] == pytest.approx(40e3, rel=1e-6)
    ratio = table["spacing_exact_hz"] / table["spacing_estimate_hz"]
    assert ((ratio >= 0.5) & (ratio <= 2.0)).all()


def test_mode_spacing_scaling_single_ion():
    """Test a single ion has no mode spacing."""
    params = TrapParams(n_ions=2, nu_com_transverse=5e6, nu_axial=0.5e6)
    with pytest.raises(ValidationError):
        mode_spacing_scaling([1], params)


def test_bs_duration_for_spacing():
    """Test T = R1² / (2Δ(1 − r)) with Δ = δν/R2."""
    expected = 1.5**2 / (2 * (50e3 / 3.0))
    assert bs_duration_for_spacing(50e3, 1.5, 3.0) == pytest.approx(expected)
    assert bs_duration_for_spacing(50e3, 1.5, 3.0, 0.5) == pytest.approx(2 * expected)

    with pytest.raises(ValidationError):
        bs_duration_for_spacing(0.0, 1.5, 3.0)


def test_bs_duration_scaling_grows_with_ions():
    """Test splitter duration grows as the mode spacing shrinks."""
    params = TrapParams(n_ions=5, nu_com_transverse=5e6, nu_axial=0.3e6, fixed_spacing=spacing_for_min_frequency(5e6, 1e6))
    df = bs_duration_scaling([5, 10, 20], params, r1=1.5, r2=3.0)

    assert list(df.columns) == ["n_ions", "spacing_hz", "bs_duration_s"]
    assert np.all(np.diff(df["bs_duration_s"]) > 0)


def test_connectivity_stats_hundred_ions():
    """Test connectivity statistics of a 100-ion equally spaced chain."""
    stats = connectivity_stats(100, "equal")

    assert stats.n_pairs == 100 * 99 // 2
    assert stats.fraction_above_threshold > 0.99
    assert 1.65 < stats.mean_best_product * 100 < 2.25
    assert stats.std_best_product > 0


def test_connectivity_mean_scales_inversely():
    """Test mean·N stays bounded in [1, 3] between 10 and 100 ions."""
    for n in (10, 30, 100):
        stats = connectivity_stats(n, "equal")
        assert 1.0 <= stats.mean_best_product * n <= 3.0


# ==================== Synthetic tables ====================


def test_synthetic_mode_table_uniform_coupling():
    """Test every ion couples to every mode with η/√N."""
    modes = synthetic_mode_table([1.0e6, 1.05e6, 1.1e6, 1.15e6], eta=0.1)

    assert np.allclose(np.abs(modes.lamb_dicke), 0.05)
    assert np.allclose(modes.mode_vectors[:, -1], 0.5)

    with pytest.raises(ValidationError):
        synthetic_mode_table([1.0e6, 1.1e6, 1.2e6], eta=0.1)


def test_mode_table_dict_round_trip(five_ion_params):
    """Test serialized mode tables restore frequencies and Lamb-Dicke matrix."""
    modes = build_chain(five_ion_params)
    doc = mode_table_to_dict(modes, five_ion_params)
    restored = mode_table_from_dict(doc)

    assert doc["n_ions"] == 5
    assert np.allclose(restored.frequencies, modes.frequencies)
    assert np.allclose(restored.lamb_dicke, modes.lamb_dicke, atol=1e-14)
