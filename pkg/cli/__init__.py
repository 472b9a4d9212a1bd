"""
Command-line layer for Phononet.
"""

from .parser import build_parser, parse_args, parse_range, parse_value, parse_pair, spec_from_args
from .commands import run

__all__ = [
    "build_parser",
    "parse_args",
    "parse_range",
    "parse_value",
    "parse_pair",
    "spec_from_args",
    "run",
]
