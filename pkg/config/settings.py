"""
Application settings for Phononet.

Loads settings from environment variables (and an optional .env file) or uses defaults.
Provides centralized configuration management.
"""

import os
from pathlib import Path
from typing import Optional
from dataclasses import dataclass, field

from dotenv import load_dotenv

from .constants import (
    APP_VERSION,
    EXPERIMENT_SHOTS,
    ODE_ATOL,
    ODE_RTOL,
    OUTPUT_DIR,
    SECTOR_CAPACITY,
)


@dataclass
class Settings:
    """
    Application settings.

    Can be loaded from environment variables or initialized with defaults.
    """

    # Application info
    app_version: str = APP_VERSION

    # Output location (created on first write, not here)
    output_dir: Path = field(default_factory=lambda: Path.cwd() / OUTPUT_DIR)

    # Reproducibility
    default_seed: int = 2024
    default_shots: int = EXPERIMENT_SHOTS

    # Integrator tolerances for the time-domain models
    ode_rtol: float = ODE_RTOL
    ode_atol: float = ODE_ATOL

    # Sweep parallelism (1 = serial)
    max_workers: int = 1

    # Fock sector size guard
    sector_capacity: int = SECTOR_CAPACITY

    # Debug settings
    debug_mode: bool = False
    log_level: str = "INFO"  # DEBUG, INFO, WARNING, ERROR

    def __post_init__(self):
        if self.ode_rtol <= 0 or self.ode_atol <= 0:
            raise ValueError("integrator tolerances must be positive")
        if self.max_workers < 1:
            raise ValueError("max_workers must be at least 1")

    @classmethod
    def from_env(cls, dotenv_path: Optional[Path] = None) -> "Settings":
        """
        Load settings from environment variables.

        A .env file (current directory, or dotenv_path) is read first; values
        already present in the environment win.

        Environment variables:
        - PHONONET_OUTPUT_DIR: Directory for result files
        - PHONONET_SEED: Default random seed
        - PHONONET_SHOTS: Default shots per tomography setting
        - PHONONET_ODE_RTOL / PHONONET_ODE_ATOL: Integrator tolerances
        - PHONONET_MAX_WORKERS: Process pool size for sweeps
        - PHONONET_SECTOR_CAPACITY: Largest Fock sector allowed
        - PHONONET_DEBUG: Enable debug mode (true/false)
        - PHONONET_LOG_LEVEL: Logging level (DEBUG/INFO/WARNING/ERROR)

        Returns:
            Settings instance with values from environment or defaults
        """
        load_dotenv(dotenv_path=dotenv_path, override=False)

        return cls(
            output_dir=Path(os.getenv("PHONONET_OUTPUT_DIR", str(Path.cwd() / OUTPUT_DIR))),
            default_seed=int(os.getenv("PHONONET_SEED", "2024")),
            default_shots=int(os.getenv("PHONONET_SHOTS", str(EXPERIMENT_SHOTS))),
            ode_rtol=float(os.getenv("PHONONET_ODE_RTOL", str(ODE_RTOL))),
            ode_atol=float(os.getenv("PHONONET_ODE_ATOL", str(ODE_ATOL))),
            max_workers=int(os.getenv("PHONONET_MAX_WORKERS", "1")),
            sector_capacity=int(os.getenv("PHONONET_SECTOR_CAPACITY", str(SECTOR_CAPACITY))),
            debug_mode=os.getenv("PHONONET_DEBUG", "false").lower() == "true",
            log_level=os.getenv("PHONONET_LOG_LEVEL", "INFO"),
        )

    def to_dict(self) -> dict:
        """Convert settings to dictionary for serialization."""
        return {
            "app_version": self.app_version,
            "output_dir": str(self.output_dir),
            "default_seed": self.default_seed,
            "default_shots": self.default_shots,
            "ode_rtol": self.ode_rtol,
            "ode_atol": self.ode_atol,
            "max_workers": self.max_workers,
            "sector_capacity": self.sector_capacity,
            "debug_mode": self.debug_mode,
            "log_level": self.log_level,
        }


# Global settings instance (lazy-loaded)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get global settings instance.

    Lazy-loaded on first call. Loads from environment variables.

    Returns:
        Settings instance

    Example:
        >>> from config.settings import get_settings
        >>> settings = get_settings()
        >>> print(settings.ode_rtol)
    """
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def reset_settings():
    """
    Reset global settings instance.

    Useful for testing - forces reload from environment on next get_settings() call.
    """
    global _settings
    _settings = None
