"""
Command-line parser for Phononet.

Every subcommand takes the common flags --seed, --shots, --out, --format
and --verbose. Mode and ion numbers on the command line are 1-based;
angles accept a "pi" suffix (0.5pi) and are radians otherwise.
"""

import argparse
import math
import re
from typing import Any, Dict, Optional, Sequence

import numpy as np

from config.constants import APP_NAME, APP_VERSION, OUTPUT_FORMATS
from domain.models import ExperimentSpec
from operations.lindblad_ops import ERROR_BUDGET_KINDS

NOISE_SIM_KINDS = ERROR_BUDGET_KINDS + ("measured", "landscape")

_PI_VALUE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*(pi|π)?\s*$")


def parse_value(text: str) -> float:
    """
    Number with an optional pi suffix.

    Example:
        >>> parse_value("0.5pi")
        1.5707963267948966
    """
    match = _PI_VALUE.match(text)
    if match is None or (match.group(1) is None and match.group(2) is None):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    value = float(match.group(1)) if match.group(1) is not None else 1.0
    return value * math.pi if match.group(2) else value


def parse_range(text: str) -> np.ndarray:
    """
    "start:stop:count" (inclusive, count points) or a comma-separated list.

    Example:
        >>> parse_range("0:0.5pi:3")
        array([0.        , 0.78539816, 1.57079633])
    """
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
        start, stop = parse_value(parts[0]), parse_value(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"range count must be an integer, got {parts[2]!r}") from None
        if count < 1:
            raise argparse.ArgumentTypeError(f"range count must be >= 1, got {count}")
        return np.linspace(start, stop, count)
    return np.array([parse_value(part) for part in text.split(",") if part.strip()], dtype=float)


def parse_pair(text: str) -> tuple:
    """1-based mode pair "m,n"."""
    try:
        m, n = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"pair must be m,n with integers, got {text!r}") from None
    if m < 1 or n < 1 or m == n:
        raise argparse.ArgumentTypeError(f"pair needs two distinct 1-based modes, got {text!r}")
    return (m, n)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Random seed (default from PHONONET_SEED or 2024)")
    common.add_argument("--shots", type=int, default=None, help="Shots per setting; 0 for exact probabilities")
    common.add_argument("--out", default=None, help="Output directory (default from PHONONET_OUTPUT_DIR or ./results)")
    common.add_argument("--format", dest="fmt", choices=OUTPUT_FORMATS, default="csv", help="Table format")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment kind."""
    parser = argparse.ArgumentParser(
        prog="phononet",
        description=APP_NAME,
    )
    parser.add_argument("--version", action="version", version=f"phononet {APP_VERSION}")
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", parents=[common], help="Transverse mode table of a chain; spectrum fit of the five-ion chain")
    p.add_argument("--ions", type=int, default=5)
    p.add_argument("--fit-spectrum", dest="spectrum", default=None, help="JSON/TOML file with frequencies_hz")
    p.add_argument("--nu-com", type=parse_value, default=None, help="Transverse COM frequency (Hz)")
    p.add_argument("--nu-axial", type=parse_value, default=None, help="Axial frequency (Hz)")
    p.add_argument("--spacing-um", type=float, default=None, help="Equal ion spacing in µm")

    p = sub.add_parser("bs-scan", parents=[common], help="Single-phonon transfer vs pulse time for a calibrated pair")
    p.add_argument("--pair", type=parse_pair, default=(1, 2), help="1-based mode pair, e.g. 1,2")
    p.add_argument("--times", type=parse_range, default=parse_range("0:600e-6:121"), help="start:stop:count in seconds")
    p.add_argument("--model", choices=("effective", "full"), default="effective")
    p.add_argument("--ramp-fraction", type=float, default=None, help="Edge fraction; defaults to the calibrated value")
    p.add_argument("--carrier", action="store_true", help="Keep carrier terms in the full model")

    p = sub.add_parser("hom", parents=[common], help="Two-phonon interference dip vs mixing angle")
    p.add_argument("--theta-scan", dest="thetas", type=parse_range, default=parse_range("0:0.5pi:201"))

    p = sub.add_parser("phase-scan", parents=[common], help="Output populations vs the phase of one splitter")
    p.add_argument("--config", required=True)
    p.add_argument("--input", dest="state", required=True, help='State expression, e.g. "|1000>"')
    p.add_argument("--phi-scan", dest="phis", type=parse_range, default=parse_range("0:2pi:101"))
    p.add_argument("--splitter", type=int, default=None, help="1-based splitter to scan (default: last)")
    p.add_argument("--compensate", action="store_true", help="Apply ac-Stark phase compensation")

    p = sub.add_parser("tomography", parents=[common], help="Reconstruct a state from simulated or recorded counts")
    p.add_argument("--config", required=True)
    p.add_argument("--input", dest="state", default=None, help='State expression, e.g. "(|10>+|01>)/sqrt2"')
    p.add_argument("--counts", default=None, help="Recorded counts JSON")
    p.add_argument("--phonons", type=int, default=None, help="Phonon number when no state is given")
    p.add_argument("--binary", action="store_true", help="Binary fluorescence detection with readout errors")
    p.add_argument("--p-bright-given-dark", type=float, default=None)
    p.add_argument("--p-dark-given-bright", type=float, default=None)
    p.add_argument("--no-correct", action="store_true", help="Skip readout correction")

    p = sub.add_parser("optimize-config", parents=[common], help="Maximize det(L†L) over tomography settings")
    p.add_argument("--template", choices=("single", "four"), default="single")
    p.add_argument("--phonons", type=int, default=1)
    p.add_argument("--settings", type=int, default=3, help="Settings of the single-splitter template")
    p.add_argument("--starts", type=int, default=32)

    p = sub.add_parser("noise-sim", parents=[common], help="Splitter error vs noise rate, or the R1/R2 fidelity landscape")
    p.add_argument("--kind", choices=NOISE_SIM_KINDS, default="heating")
    p.add_argument("--rates", type=parse_range, default=None, help="Rates (1/s or quanta/s)")
    p.add_argument("--collective", action="store_true", help="Collective motional dephasing operator")
    p.add_argument("--r1", dest="r1_values", type=parse_range, default=parse_range("1:3:5"))
    p.add_argument("--r2", dest="r2_values", type=parse_range, default=parse_range("2:7:5"))

    p = sub.add_parser("scaling", parents=[common], help="Mode spacing, splitter duration or connectivity vs ion number")
    p.add_argument("--ions-range", dest="ions", type=parse_range, default=parse_range("5:100:20"))
    p.add_argument("--study", choices=("duration", "spacing", "connectivity"), default="duration")
    p.add_argument("--r1", type=float, default=1.5)
    p.add_argument("--r2", type=float, default=3.0)
    p.add_argument("--ramp-fraction", type=float, default=0.0)
    p.add_argument("--nu-com", type=parse_value, default=5e6)
    p.add_argument("--nu-min", type=parse_value, default=1e6)

    p = sub.add_parser("heating-fit", parents=[common], help="Heating rate from BSB traces or fitted occupations")
    p.add_argument("--traces", default=None, help="CSV with wait_s, time_s, signal")
    p.add_argument("--nbar-points", default=None, help="CSV with wait_s, nbar[, nbar_err]")
    p.add_argument("--synthetic-rate", type=float, default=None, help="Generate traces at this rate (quanta/s)")
    p.add_argument("--waits", type=parse_range, default=None, help="Wait times for synthetic traces (s)")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--rabi-hz", type=float, default=10e3)
    p.add_argument("--decay-rate", type=float, default=0.0)

    return parser


INPUT_KEYS = ("spectrum", "config", "counts", "traces", "nbar_points")
RUN_KEYS = ("command", "seed", "shots", "out", "fmt", "verbose")


def spec_from_args(args: argparse.Namespace, out_dir: str, seed: int, shots: int) -> ExperimentSpec:
    """ExperimentSpec from parsed arguments; seed/shots/out_dir already resolved."""
    values: Dict[str, Any] = vars(args)
    inputs = {k: str(values[k]) for k in INPUT_KEYS if values.get(k)}
    options: Dict[str, Any] = {}
    for key, value in values.items():
        if key in INPUT_KEYS or key in RUN_KEYS or value is None:
            continue
        options[key] = [float(v) for v in value] if isinstance(value, np.ndarray) else value
    return ExperimentSpec(
        command=args.command,
        inputs=inputs,
        options=options,
        out_dir=out_dir,
        seed=seed,
        shots=shots,
        fmt=args.fmt,
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)

