"""
Path Configuration for Phononet.

Centralized path management for result files.
"""

from pathlib import Path
import logging
import re
from typing import Optional

logger = logging.getLogger(__name__)


def get_app_root() -> Path:
    """
    Get application root directory (the directory holding main.py).

    Returns:
        Project root path
    """
    return Path(__file__).parent.parent


def sanitize_artifact_name(name: str) -> str:
    """
    Sanitize an artifact name for use as a file stem.

    Args:
        name: Artifact name (e.g., "phase-scan/run 1")

    Returns:
        Safe file stem

    Example:
        >>> sanitize_artifact_name("phase-scan/run 1")
        'phase-scan_run_1'
    """
    return re.sub(r'[/\\:*?"<>|\s]', '_', name)


def get_output_path(out_dir: Path, create: bool = True) -> Path:
    """
    Resolve the output directory of a run.

    Args:
        out_dir: Requested directory
        create: Create the directory if missing

    Returns:
        Absolute output directory
    """
    resolved = Path(out_dir).expanduser().resolve()
    if create:
        resolved.mkdir(parents=True, exist_ok=True)
    logger.debug(f"Output path: {resolved}")
    return resolved


def get_artifact_path(out_dir: Path, name: str, suffix: str, tag: Optional[str] = None) -> Path:
    """
    Build the path of one artifact file.

    Args:
        out_dir: Output directory
        name: Artifact name (usually the command)
        suffix: File suffix including the dot (".csv", ".json", ".meta.json")
        tag: Optional extra qualifier appended to the stem

    Returns:
        Path inside out_dir
    """
    stem = sanitize_artifact_name(name if tag is None else f"{name}_{tag}")
    return Path(out_dir) / f"{stem}{suffix}"
