#!/usr/bin/env python3
"""
Phononet - trapped-ion phononic network simulator
Main entry point for the command line
"""

import sys
import logging
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def setup_logging(level: str = "INFO"):
    """
    Configure logging for the application.

    Sets up console output with timestamped formatting.
    Suppresses noisy third-party loggers.
    """
    formatter = logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S'
    )

    # Console handler (stderr keeps stdout for the list of written files)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)
    console_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.addHandler(console_handler)

    # Suppress noisy third-party loggers
    logging.getLogger('numba').setLevel(logging.WARNING)
    logging.getLogger('matplotlib').setLevel(logging.WARNING)

    logging.debug(f"Logging initialized - Level: {level}")


def main():
    """Main application entry point."""
    from config.settings import get_settings
    from cli.commands import run

    setup_logging(get_settings().log_level)
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
