"""
Fock Operations for Phononet.

Fixed-N Fock sectors, matrix permanents and the lifting of M×M mode
unitaries to the multi-phonon sector.

The forward propagator U_F maps a_j† to Σ_i U_ij a_i†, so
⟨ν'|U_F|ν⟩ = Per(U[ν', ν]) / √(Π ν_i! ν'_i!), where U[ν', ν] repeats row i
ν'_i times and column j ν_j times.
"""

import itertools
import logging
import math
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np
from numba import njit
from scipy.linalg import expm, schur

from config.constants import SECTOR_CAPACITY, TRACE_TOL, UNITARY_TOL
from domain.exceptions import CapacityError, SolverError, ValidationError
from domain.models import DensityMatrix, FockSector, FockState, Occupation
from domain.validators import validate_convention, validate_square, validate_unitary

logger = logging.getLogger(__name__)


# ==================== Sectors ====================


def sector_size(n_modes: int, total_phonons: int) -> int:
    """C(N + M - 1, N)."""
    return math.comb(total_phonons + n_modes - 1, total_phonons)


def _occupations(n_modes: int, total: int) -> Iterator[Occupation]:
    if n_modes == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _occupations(n_modes - 1, total - first):
            yield (first,) + rest


def enumerate_basis(n_modes: int, total_phonons: int, capacity: int = SECTOR_CAPACITY) -> FockSector:
    """
    Enumerate the fixed-N sector in descending lexicographic order.

    Args:
        n_modes: Number of modes M (>= 1)
        total_phonons: Total phonon number N (>= 0)
        capacity: Largest basis size allowed

    Returns:
        FockSector with an O(1) occupation index

    Raises:
        CapacityError: If the basis would exceed capacity

    Example:
        >>> enumerate_basis(2, 1).basis
        ((1, 0), (0, 1))
    """
    if n_modes < 1 or total_phonons < 0:
        raise ValidationError(
            "Sector needs M >= 1 and N >= 0",
            details={"n_modes": n_modes, "total_phonons": total_phonons},
        )
    size = sector_size(n_modes, total_phonons)
    if size > capacity:
        raise CapacityError(
            "Fock sector exceeds capacity",
            details={"n_modes": n_modes, "total_phonons": total_phonons, "size": size, "capacity": capacity},
        )
    basis = tuple(_occupations(n_modes, total_phonons))
    logger.debug(f"Enumerated sector M={n_modes}, N={total_phonons}: {len(basis)} states")
    return FockSector(n_modes=n_modes, total_phonons=total_phonons, basis=basis)


# ==================== Permanents ====================


@njit(cache=True)
def _ryser_gray(matrix: np.ndarray) -> complex:
    n = matrix.shape[0]
    row_sums = np.zeros(n, dtype=np.complex128)
    total = 0j
    subset_size = 0
    gray = 0
    for k in range(1, 1 << n):
        # column whose membership flips: lowest set bit of k
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            for i in range(n):
                row_sums[i] += matrix[i, j]
            subset_size += 1
        else:
            for i in range(n):
                row_sums[i] -= matrix[i, j]
            subset_size -= 1
        prod = 1.0 + 0j
        for i in range(n):
            prod *= row_sums[i]
        if subset_size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        return -total
    return total


def permanent(matrix: np.ndarray) -> complex:
    """
    Permanent by Ryser's formula with Gray-code subset order, O(2^d d).

    The 0×0 permanent is 1.

    Example:
        >>> permanent(np.ones((3, 3)))
        (6+0j)
    """
    a = np.asarray(matrix, dtype=complex)
    if a.size == 0:
        return 1.0 + 0j
    a = validate_square(a, "matrix")
    return complex(_ryser_gray(np.ascontiguousarray(a)))


def permanent_naive(matrix: np.ndarray) -> complex:
    """Permutation-sum permanent, O(d·d!); test oracle."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    rows = np.arange(n)
    return complex(sum(np.prod(a[rows, list(perm)]) for perm in itertools.permutations(range(n))))


# ==================== Lifting ====================


def _repeat_indices(occupation: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(occupation)), occupation)


def lift_unitary(u_mode: np.ndarray, sector: FockSector) -> np.ndarray:
    """
    Forward Fock-space propagator of a mode unitary on a sector.

    Args:
        u_mode: M×M unitary
        sector: Target sector

    Returns:
        dim×dim unitary on the sector basis (rows: output, columns: input)

    Raises:
        ValidationError: If u_mode is not unitary or has the wrong size
    """
    u = validate_unitary(u_mode, tol=UNITARY_TOL, name="U_mode")
    if u.shape[0] != sector.n_modes:
        raise ValidationError("Mode unitary size does not match sector", details={"size": u.shape[0], "n_modes": sector.n_modes})

    dim = sector.dim
    if sector.total_phonons == 0:
        return np.ones((1, 1), dtype=complex)
    if sector.total_phonons == 1:
        # basis[k] is the unit vector e_k
        return u.copy()

    indices = [_repeat_indices(occ) for occ in sector.basis]
    norms = np.array([math.prod(math.factorial(n) for n in occ) for occ in sector.basis], dtype=float)
    lifted = np.empty((dim, dim), dtype=complex)
    for col, cols in enumerate(indices):
        sub_cols = u[:, cols]
        for row, rows in enumerate(indices):
            lifted[row, col] = _ryser_gray(np.ascontiguousarray(sub_cols[rows, :]))
    lifted /= np.sqrt(np.outer(norms, norms))
    return lifted


def mode_hamiltonian(u_mode: np.ndarray) -> np.ndarray:
    """
    Hermitian h with U = exp(i h), from the complex Schur form of U.

    Raises:
        SolverError: If U is not normal to working precision
    """
    u = validate_unitary(u_mode, name="U_mode")
    t, z = schur(u, output="complex")
    off_diagonal = float(np.max(np.abs(np.triu(t, k=1)))) if t.size > 1 else 0.0
    if off_diagonal > 1e-8:
        raise SolverError("Schur form of the unitary is not diagonal", details={"max_off_diagonal": off_diagonal})
    phases = np.angle(np.diag(t))
    h = (z * phases) @ z.conj().T
    return 0.5 * (h + h.conj().T)


def promote_quadratic(h: np.ndarray, sector: FockSector) -> np.ndarray:
    """Matrix of Σ_ij h_ij a_i† a_j on the sector."""
    h = np.asarray(h, dtype=complex)
    dim = sector.dim
    big = np.zeros((dim, dim), dtype=complex)
    for col, occ in enumerate(sector.basis):
        for j, n_j in enumerate(occ):
            if n_j == 0:
                continue
            lowered = list(occ)
            lowered[j] -= 1
            for i in range(sector.n_modes):
                raised = list(lowered)
                raised[i] += 1
                amp = math.sqrt(n_j) * math.sqrt(raised[i])
                big[sector.index_of(raised), col] += h[i, j] * amp
    return big


def lift_unitary_dense(u_mode: np.ndarray, sector: FockSector) -> np.ndarray:
    """
    Same lifting as lift_unitary via exp(i Σ h_ij a_i† a_j); test oracle.
    """
    h = mode_hamiltonian(u_mode)
    return expm(1j * promote_quadratic(h, sector))


# ==================== Probabilities ====================


def _as_matrix(rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return validate_square(rho, "rho")


def output_probabilities(
    rho_prime: Union[DensityMatrix, np.ndarray],
    u_fock: np.ndarray,
    convention: str = "adjoint",
) -> np.ndarray:
    """
    Output-state probabilities of a density matrix under a Fock propagator.

    "adjoint": p_ν = ⟨ν|U† ρ' U|ν⟩, with U the interferometer operator.
    "forward": p_ν = ⟨ν|U ρ' U†|ν⟩, for U a forward propagator.

    Raises:
        ValidationError: If tr(ρ') deviates from 1 by more than 1e-6
    """
    validate_convention(convention)
    rho = _as_matrix(rho_prime)
    u = np.asarray(u_fock, dtype=complex)
    if u.shape != rho.shape:
        raise ValidationError("Density matrix and propagator shapes differ", details={"rho": rho.shape, "U": u.shape})
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValidationError("Density matrix trace deviates from 1", details={"trace": trace})

    if convention == "adjoint":
        p = np.einsum("an,ab,bn->n", u.conj(), rho, u)
    else:
        p = np.einsum("na,ab,nb->n", u, rho, u.conj())
    return np.real(p)


# ==================== States ====================


def fock_state(sector: FockSector, amplitudes: Mapping[Sequence[int], complex]) -> FockState:
    """
    Normalized pure state from {occupation: amplitude}.

    Example:
        >>> s = enumerate_basis(2, 1)
        >>> fock_state(s, {(1, 0): 1, (0, 1): 1}).amplitudes  # (1, 1)/√2
    """
    vector = np.zeros(sector.dim, dtype=complex)
    for occupation, amp in amplitudes.items():
        vector[sector.index_of(occupation)] += amp
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ValidationError("State has zero norm")
    return FockState(sector=sector, amplitudes=vector / norm)


def density_from_state(state: FockState) -> DensityMatrix:
    return DensityMatrix(sector=state.sector, matrix=np.outer(state.amplitudes, state.amplitudes.conj()))


def embedding_matrix(input_sector: FockSector, output_sector: FockSector) -> np.ndarray:
    """Isometry appending vacuum modes: |ν⟩ -> |ν, 0, ..., 0⟩."""
    pad = (0,) * (output_sector.n_modes - input_sector.n_modes)
    embed = np.zeros((output_sector.dim, input_sector.dim))
    for col, occ in enumerate(input_sector.basis):
        embed[output_sector.index_of(occ + pad), col] = 1.0
    return embed


def embed_with_ancillas(
    rho: Union[DensityMatrix, FockState],
    n_ancillas: int,
) -> DensityMatrix:
    """ρ' = ρ ⊗ |0…0⟩⟨0…0| on the enlarged sector."""
    if isinstance(rho, FockState):
        rho = density_from_state(rho)
    if n_ancillas < 0:
        raise ValidationError("n_ancillas must be >= 0", details={"n_ancillas": n_ancillas})
    out = enumerate_basis(rho.sector.n_modes + n_ancillas, rho.sector.total_phonons)
    e = embedding_matrix(rho.sector, out)
    return DensityMatrix(sector=out, matrix=e @ rho.matrix @ e.T)


def label_probabilities(p: Sequence[float], sector: FockSector) -> List[Dict[str, object]]:
    """[{"occupation": [...], "p": float}] in basis order."""
    if len(p) != sector.dim:
        raise ValidationError("Probability vector length does not match sector", details={"len": len(p), "dim": sector.dim})
    return [{"occupation": list(occ), "p": float(v)} for occ, v in zip(sector.basis, p)]


def mode_populations(p: Sequence[float], sector: FockSector) -> np.ndarray:
    """Mean phonon number per mode, Σ_ν p_ν ν_m."""
    occupations = np.array(sector.basis, dtype=float)
    return np.asarray(p, dtype=float) @ occupations
