"""
Decision rules for Phononet.

Small pure functions that encode selection and classification rules:
which ion assists a pair, how phonon numbers map onto detection patterns,
and which Fock states a pattern can come from.
"""

from typing import List, Sequence, Tuple

import numpy as np

from config.constants import TIE_RELATIVE_TOL
from .models import FockSector, Occupation, Pattern


def select_best_ion(products: Sequence[float], rel_tol: float = TIE_RELATIVE_TOL) -> int:
    """
    Index of the largest product; near-ties resolve to the lowest index.

    Two candidates tie when they differ by at most rel_tol relative to the
    maximum.

    Args:
        products: Non-negative coupling products per ion

    Returns:
        0-based ion index

    Example:
        >>> select_best_ion([0.1, 0.3, 0.3 + 1e-12])
        1
    """
    values = np.asarray(products, dtype=float)
    best = float(values.max())
    threshold = best - rel_tol * max(abs(best), 1e-300)
    return int(np.flatnonzero(values >= threshold)[0])


def binary_pattern(occupation: Sequence[int]) -> Pattern:
    """Bright (1) where a mode holds at least one phonon."""
    return tuple(1 if n > 0 else 0 for n in occupation)


def matching_occupations(pattern: Sequence[int], sector: FockSector) -> List[Occupation]:
    """All sector states whose binary pattern equals pattern, in basis order."""
    target = tuple(int(b) for b in pattern)
    return [occ for occ in sector.basis if binary_pattern(occ) == target]


def all_patterns(n_modes: int) -> List[Pattern]:
    """Every binary pattern over n_modes, ordered like binary counting from 0."""
    return [tuple(int(b) for b in format(k, f"0{n_modes}b")) for k in range(2**n_modes)]


def mode_pair_key(mode_m: int, mode_n: int) -> Tuple[int, int]:
    """Unordered pair key with the smaller index first."""
    return (mode_m, mode_n) if mode_m < mode_n else (mode_n, mode_m)
