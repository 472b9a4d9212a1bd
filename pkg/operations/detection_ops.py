"""
Detection Operations for Phononet.

Binary fluorescence detection: bright/dark patterns, number-conserving
inference of Fock states from patterns, and readout-error correction by
inverting per-ion confusion matrices.
"""

import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from domain.exceptions import AmbiguityError, LostPhononError, ValidationError
from domain.models import CorrectedReadout, DetectionModel, FockSector, Occupation, Pattern
from domain.rules import all_patterns, binary_pattern, matching_occupations
from .fock_ops import enumerate_basis

logger = logging.getLogger(__name__)


def binary_pattern_distribution(p: Sequence[float], sector: FockSector) -> Dict[Pattern, float]:
    """
    Aggregate Fock-state probabilities by bright/dark pattern.

    Example:
        >>> s = enumerate_basis(2, 3)
        >>> binary_pattern_distribution([0, 0.5, 0.5, 0], s)[(1, 1)]
        1.0
    """
    probs = np.asarray(p, dtype=float)
    if probs.size != sector.dim:
        raise ValidationError("Probability vector length does not match sector", details={"len": probs.size, "dim": sector.dim})
    distribution: Dict[Pattern, float] = {}
    for occ, value in zip(sector.basis, probs):
        key = binary_pattern(occ)
        distribution[key] = distribution.get(key, 0.0) + float(value)
    return distribution


def infer_fock_from_binary(pattern: Sequence[int], total_phonons: int, n_modes: int) -> Occupation:
    """
    Unique occupation consistent with a pattern and a conserved phonon number.

    Raises:
        LostPhononError: All modes dark although N > 0
        ValidationError: More bright modes than phonons
        AmbiguityError: Several occupations match (possible for N >= 3)

    Example:
        >>> infer_fock_from_binary((0, 1, 0, 0), 2, 4)
        (0, 2, 0, 0)
    """
    key = tuple(int(b) for b in pattern)
    if len(key) != n_modes:
        raise ValidationError("Pattern length does not match mode count", details={"pattern": key, "n_modes": n_modes})
    bright = sum(key)
    if bright == 0 and total_phonons > 0:
        raise LostPhononError("No mode fluoresced although phonons are present", details={"pattern": key, "total_phonons": total_phonons})
    if bright > total_phonons:
        raise ValidationError("More bright modes than phonons", details={"pattern": key, "total_phonons": total_phonons})

    candidates = matching_occupations(key, enumerate_basis(n_modes, total_phonons))
    if len(candidates) > 1:
        raise AmbiguityError("Pattern matches several Fock states", details={"pattern": key, "candidates": candidates})
    return candidates[0]


def _check_model(model: DetectionModel, n_modes: int) -> None:
    if model.n_modes != n_modes:
        raise ValidationError("Detection model mode count differs", details={"model": model.n_modes, "patterns": n_modes})
    for mode in range(n_modes):
        c = model.confusion_matrix(mode)
        if c[1, 0] + c[0, 1] >= 1.0:
            raise ValidationError(
                "Confusion matrix is singular or inverting",
                details={"mode": mode, "p_bright_given_dark": c[1, 0], "p_dark_given_bright": c[0, 1]},
            )


def _to_tensor(distribution: Mapping[Pattern, float], n_modes: int) -> np.ndarray:
    tensor = np.zeros((2,) * n_modes)
    for pattern, value in distribution.items():
        if len(pattern) != n_modes:
            raise ValidationError("Pattern length mismatch", details={"pattern": pattern, "n_modes": n_modes})
        tensor[tuple(pattern)] += value
    return tensor


def _apply_per_mode(tensor: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
    out = tensor
    for axis, matrix in enumerate(matrices):
        out = np.moveaxis(np.tensordot(matrix, out, axes=([1], [axis])), 0, axis)
    return out


def _from_tensor(tensor: np.ndarray) -> Dict[Pattern, float]:
    return {pattern: float(tensor[pattern]) for pattern in all_patterns(tensor.ndim)}


def apply_confusion(distribution: Mapping[Pattern, float], model: DetectionModel) -> Dict[Pattern, float]:
    """Observed pattern distribution given true pattern probabilities."""
    n_modes = model.n_modes
    tensor = _to_tensor(distribution, n_modes)
    return _from_tensor(_apply_per_mode(tensor, [model.confusion_matrix(m) for m in range(n_modes)]))


def correct_readout(pattern_counts: Mapping[Pattern, float], model: DetectionModel) -> CorrectedReadout:
    """
    Invert the tensor-product confusion map on observed pattern counts.

    Negative entries are clipped to 0 and the result renormalized; the
    clipped mass is reported.

    Raises:
        ValidationError: Negative or empty counts, or a singular confusion matrix
    """
    n_modes = model.n_modes
    _check_model(model, n_modes)
    if any(v < 0 for v in pattern_counts.values()):
        raise ValidationError("Pattern counts must be non-negative")
    total = float(sum(pattern_counts.values()))
    if total <= 0:
        raise ValidationError("Pattern counts are empty")

    raw = _to_tensor(pattern_counts, n_modes) / total
    inverses = [np.linalg.inv(model.confusion_matrix(m)) for m in range(n_modes)]
    corrected = _apply_per_mode(raw, inverses)

    clipped = float(-corrected[corrected < 0].sum())
    corrected = np.clip(corrected, 0.0, None)
    corrected /= corrected.sum()
    if clipped > 0:
        logger.warning(f"Readout correction clipped {clipped:.4f} negative probability mass")

    return CorrectedReadout(probabilities=_from_tensor(corrected), clipped_mass=clipped, raw=_from_tensor(raw))


def sample_patterns(
    distribution: Mapping[Pattern, float],
    shots: int,
    rng: np.random.Generator,
    model: Optional[DetectionModel] = None,
) -> Dict[Pattern, int]:
    """Multinomial pattern counts, after the confusion map when a model is given."""
    observed = apply_confusion(distribution, model) if model is not None else dict(distribution)
    patterns = list(observed)
    probs = np.clip(np.array([observed[p] for p in patterns]), 0.0, None)
    counts = rng.multinomial(shots, probs / probs.sum())
    return {pattern: int(n) for pattern, n in zip(patterns, counts)}


def fock_distribution_from_patterns(
    distribution: Mapping[Pattern, float],
    sector: FockSector,
) -> Tuple[np.ndarray, float]:
    """
    Map pattern probabilities onto the sector by number-conserving inference.

    Patterns with no consistent occupation (all dark, or too many bright
    modes) are discarded and the rest renormalized.

    Returns:
        (probability vector over the sector, discarded mass)
    """
    p = np.zeros(sector.dim)
    discarded = 0.0
    for pattern, value in distribution.items():
        if value == 0.0:
            continue
        try:
            occupation = infer_fock_from_binary(pattern, sector.total_phonons, sector.n_modes)
        except (LostPhononError, ValidationError):
            discarded += value
            continue
        p[sector.index_of(occupation)] += value
    kept = p.sum()
    if kept <= 0:
        raise LostPhononError("No detection pattern is consistent with the phonon number", details={"total_phonons": sector.total_phonons})
    if discarded > 0:
        logger.debug(f"Discarded {discarded:.4f} pattern mass inconsistent with N={sector.total_phonons}")
    return p / kept, discarded
