"""
State Expression Parser.

Parses Fock-state expressions such as "(|10>+|01>)/sqrt2" or
"(|11> + i|20> - 0.5|02>)/sqrt(2.25)" into normalized FockState objects.

Grammar (whitespace-insensitive):
    expression := "(" terms ")" [ "/" norm ] | terms [ "/" norm ]
    terms      := [sign] [coef] ket { sign [coef] ket }
    ket        := "|" digits ">" | "|" n "," n "," ... ">"
    coef       := real | real "i" | "i" | "(" complex ")"
    norm       := "sqrt" K | "sqrt(" K ")" | K
"""

import logging
import math
import re
from typing import Dict, List, Optional, Tuple

import numpy as np

from domain.exceptions import StateParseError
from domain.models import FockState, Occupation
from operations.fock_ops import enumerate_basis

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COEF = rf"(?:\([^()|]*\)|{_NUMBER}\s*\*?\s*i|{_NUMBER}|i)"
_TERM = re.compile(rf"([+-]?)\s*({_COEF})?\s*\*?\s*\|\s*([0-9,\s]+?)\s*>")
_NORM = re.compile(rf"^/\s*(?:sqrt\s*\(\s*({_NUMBER})\s*\)|sqrt\s*({_NUMBER})|({_NUMBER}))$")


def _parse_coefficient(text: Optional[str]) -> complex:
    if not text:
        return 1.0 + 0j
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    body = body.replace(" ", "").replace("*", "")
    if body in ("i", "+i"):
        return 1j
    if body == "-i":
        return -1j
    body = re.sub(r"(?<![0-9.])i", "1i", body).replace("i", "j")
    try:
        return complex(body)
    except ValueError:
        raise StateParseError("Unreadable coefficient", details={"coefficient": text}) from None


def _parse_ket(text: str) -> Occupation:
    body = text.replace(" ", "")
    if "," in body:
        parts = body.split(",")
        if any(not p.isdigit() for p in parts):
            raise StateParseError("Malformed ket", details={"ket": text})
        return tuple(int(p) for p in parts)
    return tuple(int(ch) for ch in body)


def _split_norm(expression: str) -> Tuple[str, float]:
    """Separate the trailing /sqrtK (or /K) divisor from the terms."""
    text = expression.strip()
    divisor = 1.0
    slash = text.rfind("/")
    if slash >= 0 and ">" not in text[slash:]:
        match = _NORM.match(text[slash:].strip())
        if match is None:
            raise StateParseError("Malformed normalization", details={"suffix": text[slash:]})
        root, bare_root, plain = match.groups()
        value = float(root or bare_root) if (root or bare_root) else float(plain)
        if value <= 0:
            raise StateParseError("Normalization must be positive", details={"suffix": text[slash:]})
        divisor = math.sqrt(value) if (root or bare_root) else value
        text = text[:slash].strip()
    if text.startswith("(") and text.endswith(")") and _TERM.search(text[1:-1]):
        text = text[1:-1]
    return text, divisor


def parse_terms(expression: str) -> Tuple[Dict[Occupation, complex], float]:
    """
    Ket amplitudes and the divisor of an expression, before normalization.

    Raises:
        StateParseError: If the text is not a sum of kets
    """
    if not expression or not expression.strip():
        raise StateParseError("Empty state expression")
    body, divisor = _split_norm(expression)

    amplitudes: Dict[Occupation, complex] = {}
    position = 0
    compact = body.strip()
    for match in _TERM.finditer(compact):
        gap = compact[position:match.start()].strip()
        if gap:
            raise StateParseError("Unexpected text in state expression", details={"text": gap, "position": position})
        if position > 0 and not match.group(1):
            raise StateParseError("Terms must be joined by + or -", details={"position": match.start()})
        sign = -1.0 if match.group(1) == "-" else 1.0
        occupation = _parse_ket(match.group(3))
        amplitudes[occupation] = amplitudes.get(occupation, 0j) + sign * _parse_coefficient(match.group(2))
        position = match.end()
    if position == 0 or compact[position:].strip():
        raise StateParseError("State expression is not a sum of kets", details={"expression": expression})
    return amplitudes, divisor


def parse_state(expression: str, n_modes: Optional[int] = None) -> FockState:
    """
    Parse a state expression into a normalized FockState.

    Args:
        expression: e.g. "(|10>+|01>)/sqrt2"
        n_modes: Expected mode count; inferred from the kets if omitted

    Returns:
        FockState on the sector fixed by the kets

    Raises:
        StateParseError: Malformed text, inconsistent kets, or a norm that
            differs from 1 by more than 1e-6

    Example:
        >>> parse_state("(|10>+|01>)/sqrt2").amplitudes
        array([0.70710678+0.j, 0.70710678+0.j])
    """
    amplitudes, divisor = parse_terms(expression)
    lengths = {len(occ) for occ in amplitudes}
    totals = {sum(occ) for occ in amplitudes}
    if len(lengths) != 1:
        raise StateParseError("Kets have different mode counts", details={"lengths": sorted(lengths)})
    if len(totals) != 1:
        raise StateParseError("Kets have different phonon numbers", details={"totals": sorted(totals)})
    modes = lengths.pop()
    if n_modes is not None and modes != n_modes:
        raise StateParseError("Kets do not match the mode count", details={"expected": n_modes, "found": modes})

    sector = enumerate_basis(modes, totals.pop())
    vector = np.zeros(sector.dim, dtype=complex)
    for occupation, amp in amplitudes.items():
        vector[sector.index_of(occupation)] += amp / divisor
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise StateParseError("State is not normalized", details={"norm": norm, "expression": expression})
    logger.debug(f"Parsed state on M={sector.n_modes}, N={sector.total_phonons}: {len(amplitudes)} terms")
    return FockState(sector=sector, amplitudes=vector / norm)


def format_state(state: FockState, precision: int = 6) -> str:
    """Readable sum-of-kets text of a state (inverse of parse_state up to rounding)."""
    terms: List[str] = []
    for occupation, amp in zip(state.sector.basis, state.amplitudes):
        if abs(amp) < 10 ** (-precision):
            continue
        ket = "".join(str(n) for n in occupation) if max(occupation) < 10 else ",".join(str(n) for n in occupation)
        coefficient = f"({amp.real:.{precision}g}{amp.imag:+.{precision}g}i)"
        terms.append(f"{coefficient}|{ket}>")
    return " + ".join(terms)
