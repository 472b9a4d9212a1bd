"""
Command entry for Phononet.

Maps parsed arguments onto an ExperimentSpec and a RunContext, runs the
experiment and turns errors into exit codes:
0 success, 2 input/parse errors, 3 physics/validation errors, 4 I/O errors.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

from config.run_context import create_run_context
from config.settings import get_settings
from domain.exceptions import ExportError, PhononetError
from domain.validators import validate_output_format
from services.experiment_runner import run_experiment
from .parser import build_parser, spec_from_args

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = ExportError.exit_code


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one experiment and return the exit status.

    argparse usage errors exit with status 2 on their own.

    Example:
        >>> run(["hom", "--theta-scan", "0:0.5pi:200", "--out", "results/hom"])
        0
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.getLogger().setLevel(logging.DEBUG if args.verbose else settings.log_level)

    try:
        validate_output_format(args.fmt)
        out_dir = Path(args.out) if args.out else settings.output_dir
        ctx = create_run_context(
            settings=settings,
            seed=args.seed,
            shots=args.shots,
            out_dir=out_dir,
            fmt=args.fmt,
            command=args.command,
        )
        spec = spec_from_args(args, out_dir=str(ctx.out_dir), seed=ctx.seed, shots=ctx.shots)
        written = run_experiment(spec, ctx)
    except PhononetError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed with an I/O error: {e}")
        return EXIT_IO
    except ValueError as e:
        logger.error(f"{args.command} rejected its options: {e}")
        return 2

    for path in written:
        print(path)
    return EXIT_OK
