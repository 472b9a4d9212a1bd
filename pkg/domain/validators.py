"""
Input validators for Phononet.

Numerical checks shared by the operations layer.
All validators raise ValidationError (or a subclass) on failure.
"""

import math
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from config.constants import HERMITIAN_TOL, OUTPUT_FORMATS, PROBABILITY_CONVENTIONS, UNITARY_TOL
from .exceptions import ConfigError, InvalidPairError, ValidationError


def validate_square(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    """
    Coerce to a complex 2D array and check it is square.

    Raises:
        ValidationError: If not square
    """
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square", details={"shape": arr.shape})
    return arr


def validate_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL, name: str = "U") -> np.ndarray:
    """
    Check ‖U†U − I‖_max ≤ tol.

    Args:
        matrix: Candidate unitary
        tol: Element-wise tolerance

    Returns:
        The matrix as complex array

    Raises:
        ValidationError: If not unitary
    """
    u = validate_square(matrix, name)
    deviation = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) if u.size else 0.0
    if deviation > tol:
        raise ValidationError(f"{name} is not unitary", details={"max_deviation": deviation, "tol": tol})
    return u


def validate_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL, name: str = "rho") -> np.ndarray:
    """Check ‖A − A†‖_max ≤ tol and return the Hermitian part."""
    a = validate_square(matrix, name)
    deviation = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if deviation > tol:
        raise ValidationError(f"{name} is not Hermitian", details={"max_asymmetry": deviation, "tol": tol})
    return 0.5 * (a + a.conj().T)


def validate_density_matrix(
    matrix: np.ndarray,
    trace_tol: float = 1e-8,
    eig_tol: float = 1e-8,
    name: str = "rho",
) -> np.ndarray:
    """
    Check a density matrix is Hermitian, unit-trace and positive semidefinite.

    Returns:
        Hermitian part of the matrix

    Raises:
        ValidationError: If any check fails
    """
    rho = validate_hermitian(matrix, name=name)
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > trace_tol:
        raise ValidationError(f"{name} trace is not 1", details={"trace": trace})
    min_eig = float(np.min(np.linalg.eigvalsh(rho)))
    if min_eig < -eig_tol:
        raise ValidationError(f"{name} is not positive semidefinite", details={"min_eigenvalue": min_eig})
    return rho


def validate_probability_vector(p: Sequence[float], tol: float = 1e-8, name: str = "p") -> np.ndarray:
    """Non-negative entries summing to 1 within tol."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -tol):
        raise ValidationError(f"{name} has negative entries", details={"min": float(arr.min())})
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise ValidationError(f"{name} does not sum to 1", details={"sum": total})
    return arr


def validate_mode_pair(mode_m: int, mode_n: int, n_modes: int) -> Tuple[int, int]:
    """
    Distinct in-range mode indices.

    Raises:
        InvalidPairError: If m == n or out of range
    """
    if mode_m == mode_n:
        raise InvalidPairError("Modes of a pair must differ", details={"mode": mode_m})
    for mode in (mode_m, mode_n):
        if not 0 <= mode < n_modes:
            raise InvalidPairError("Mode index out of range", details={"mode": mode, "n_modes": n_modes})
    return int(mode_m), int(mode_n)


def validate_ion_index(ion: int, n_ions: int) -> int:
    if not 0 <= ion < n_ions:
        raise ValidationError("Ion index out of range", details={"ion": ion, "n_ions": n_ions})
    return int(ion)


def validate_positive(value: float, name: str) -> float:
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be positive and finite", details={name: value})
    return float(value)


def validate_ramp_fraction(ramp_fraction: float) -> float:
    if not 0.0 <= ramp_fraction <= 0.5:
        raise ValidationError("ramp_fraction must lie in [0, 0.5]", details={"ramp_fraction": ramp_fraction})
    return float(ramp_fraction)


def validate_convention(convention: str) -> str:
    if convention not in PROBABILITY_CONVENTIONS:
        raise ValidationError(
            f"Unknown probability convention: {convention}",
            details={"allowed": PROBABILITY_CONVENTIONS},
        )
    return convention


def validate_output_format(fmt: str) -> str:
    if fmt not in OUTPUT_FORMATS:
        raise ValidationError(f"Unsupported output format: {fmt}", details={"allowed": OUTPUT_FORMATS})
    return fmt


def validate_input_file(file_path: Path, allowed_extensions: Optional[Sequence[str]] = None) -> Path:
    """
    Existing input file with an allowed suffix.

    Raises:
        ConfigError: If the file is missing or has the wrong suffix
    """
    path = Path(file_path)
    if not path.is_file():
        raise ConfigError("Input file not found", details={"path": str(path)})
    if allowed_extensions and path.suffix.lower() not in allowed_extensions:
        raise ConfigError(
            "Unsupported input file type",
            details={"path": str(path), "allowed": list(allowed_extensions)},
        )
    return path
