"""
Unit tests for domain validators.

Tests cover numerical checks and error handling.
"""

import numpy as np
import pytest

from domain.validators import (
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
from domain.exceptions import ConfigError, InvalidPairError, ValidationError


def test_validate_unitary_valid():
    """Test a 50:50 splitter passes the unitarity check."""
    u = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    result = validate_unitary(u)
    assert result.dtype == complex
    assert np.allclose(result, u)


def test_validate_unitary_invalid():
    """Test non-unitary and non-square matrices are rejected."""
    with pytest.raises(ValidationError) as exc_info:
        validate_unitary(np.array([[1.0, 0.0], [0.0, 0.5]]))
    assert "not unitary" in str(exc_info.value)

    with pytest.raises(ValidationError):
        validate_unitary(np.ones((2, 3)))  # Not square


def test_validate_hermitian_returns_symmetric_part():
    """Test the Hermitian part is returned within tolerance."""
    a = np.array([[1.0, 0.5j], [-0.5j, 0.0]])
    assert np.allclose(validate_hermitian(a), a)

    with pytest.raises(ValidationError):
        validate_hermitian(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_validate_density_matrix():
    """Test trace and positivity checks on density matrices."""
    rho = np.diag([0.25, 0.75])
    assert np.allclose(validate_density_matrix(rho), rho)

    with pytest.raises(ValidationError) as exc_info:
        validate_density_matrix(np.diag([0.5, 0.6]))  # Trace 1.1
    assert "trace" in str(exc_info.value)

    with pytest.raises(ValidationError) as exc_info:
        validate_density_matrix(np.diag([1.2, -0.2]))  # Negative eigenvalue
    assert "positive semidefinite" in str(exc_info.value)


def test_validate_probability_vector():
    """Test probability vectors must be non-negative and normalized."""
    assert np.allclose(validate_probability_vector([0.2, 0.8]), [0.2, 0.8])

    with pytest.raises(ValidationError):
        validate_probability_vector([0.5, 0.6])  # Sum 1.1

    with pytest.raises(ValidationError):
        validate_probability_vector([1.1, -0.1])  # Negative entry


def test_validate_mode_pair():
    """Test mode pairs must be distinct and in range."""
    assert validate_mode_pair(0, 3, 4) == (0, 3)

    with pytest.raises(InvalidPairError):
        validate_mode_pair(2, 2, 4)  # Same mode

    with pytest.raises(InvalidPairError):
        validate_mode_pair(0, 4, 4)  # Out of range


def test_validate_ion_index_and_positive():
    """Test index range and positivity checks."""
    assert validate_ion_index(4, 5) == 4
    with pytest.raises(ValidationError):
        validate_ion_index(5, 5)

    assert validate_positive(2.5, "rate") == 2.5
    for bad in (0.0, -1.0, float("inf"), float("nan")):
        with pytest.raises(ValidationError):
            validate_positive(bad, "rate")


def test_validate_ramp_fraction():
    """Test ramp fraction must lie in [0, 0.5]."""
    assert validate_ramp_fraction(0.0) == 0.0
    assert validate_ramp_fraction(0.5) == 0.5

    with pytest.raises(ValidationError):
        validate_ramp_fraction(0.6)

    with pytest.raises(ValidationError):
        validate_ramp_fraction(-0.1)


def test_validate_convention_and_format():
    """Test enumerated choices."""
    assert validate_convention("adjoint") == "adjoint"
    assert validate_convention("forward") == "forward"
    assert validate_output_format("json") == "json"

    with pytest.raises(ValidationError):
        validate_convention("backward")

    with pytest.raises(ValidationError):
        validate_output_format("xlsx")


def test_validate_input_file(tmp_path):
    """Test input files must exist and carry an allowed suffix."""
    config_file = tmp_path / "network.json"
    config_file.write_text("{}")
    assert validate_input_file(config_file, (".json", ".toml")) == config_file

    with pytest.raises(ConfigError) as exc_info:
        validate_input_file(tmp_path / "missing.json")
    assert "not found" in str(exc_info.value)

    other = tmp_path / "network.txt"
    other.write_text("")
    with pytest.raises(ConfigError):
        validate_input_file(other, (".json", ".toml"))


def test_config_error_exit_codes():
    """Test exit codes carried by the exception families."""
    assert ConfigError("x").exit_code == 2
    assert ValidationError("x").exit_code == 3
    assert InvalidPairError("x").exit_code == 3
