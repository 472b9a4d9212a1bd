"""
Run Context for Phononet.

Per-invocation state shared by the CLI commands.
"""

from dataclasses import dataclass, field, replace
from typing import Optional
from pathlib import Path

import numpy as np

from .constants import OUTPUT_FORMATS
from .settings import Settings, get_settings


@dataclass(frozen=True)
class RunContext:
    """
    Immutable context of one experiment run.

    Holds the resolved settings and the run-level knobs (seed, shots, output
    directory, output format). Operations never read globals; commands pass
    values from here explicitly.

    Example:
        >>> from config.run_context import create_run_context
        >>> ctx = create_run_context(seed=7, shots=300)
        >>> ctx = ctx.with_output_dir(Path("results/tomo"))
        >>> rng = ctx.rng()
    """

    settings: Settings = field(default_factory=get_settings)
    seed: int = 2024
    shots: int = 0
    out_dir: Path = field(default_factory=lambda: get_settings().output_dir)
    fmt: str = "csv"
    command: Optional[str] = None

    def __post_init__(self):
        if self.fmt not in OUTPUT_FORMATS:
            raise ValueError(f"Unsupported output format: {self.fmt}")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")

    @property
    def app_version(self) -> str:
        return self.settings.app_version

    @property
    def max_workers(self) -> int:
        return self.settings.max_workers

    def rng(self) -> np.random.Generator:
        """Fresh generator seeded from this context."""
        return np.random.default_rng(self.seed)

    def with_seed(self, seed: int) -> "RunContext":
        """Create new context with a different seed."""
        return replace(self, seed=seed)

    def with_shots(self, shots: int) -> "RunContext":
        """Create new context with a different shot count."""
        return replace(self, shots=shots)

    def with_output_dir(self, out_dir: Path) -> "RunContext":
        """Create new context writing to out_dir."""
        return replace(self, out_dir=Path(out_dir))

    def with_format(self, fmt: str) -> "RunContext":
        """Create new context emitting fmt ("csv" or "json")."""
        return replace(self, fmt=fmt)

    def with_command(self, command: str) -> "RunContext":
        return replace(self, command=command)

    def to_dict(self) -> dict:
        """Serializable view used in output metadata."""
        return {
            "command": self.command,
            "seed": self.seed,
            "shots": self.shots,
            "format": self.fmt,
            "ode_rtol": self.settings.ode_rtol,
            "ode_atol": self.settings.ode_atol,
        }


def create_run_context(
    settings: Optional[Settings] = None,
    seed: Optional[int] = None,
    shots: Optional[int] = None,
    out_dir: Optional[Path] = None,
    fmt: str = "csv",
    command: Optional[str] = None,
) -> RunContext:
    """
    Factory function to create RunContext.

    Missing values fall back to the settings defaults.

    Args:
        settings: Settings instance (defaults to global settings)
        seed: Random seed (defaults to settings.default_seed)
        shots: Shots per setting (defaults to settings.default_shots)
        out_dir: Output directory (defaults to settings.output_dir)
        fmt: Output format
        command: Subcommand name recorded in metadata

    Returns:
        RunContext instance
    """
    if settings is None:
        settings = get_settings()

    return RunContext(
        settings=settings,
        seed=settings.default_seed if seed is None else seed,
        shots=settings.default_shots if shots is None else shots,
        out_dir=settings.output_dir if out_dir is None else Path(out_dir),
        fmt=fmt,
        command=command,
    )
