"""
Configuration package for Phononet.

Exports:
- RunContext: Per-run context
- Settings: Application settings
- Constants: Application constants
"""

from .run_context import RunContext, create_run_context
from .settings import Settings, get_settings, reset_settings
from .constants import (
    APP_NAME,
    APP_VERSION,
    CALIBRATED_BEAM_SPLITTERS,
    CALIBRATED_DETUNING_HZ,
    FIVE_ION_SPECTRUM_HZ,
    TOMOGRAPHY_SETTING,
)

__all__ = [
    # Run Context
    "RunContext",
    "create_run_context",
    # Settings
    "Settings",
    "get_settings",
    "reset_settings",
    # Constants
    "APP_NAME",
    "APP_VERSION",
    "CALIBRATED_BEAM_SPLITTERS",
    "CALIBRATED_DETUNING_HZ",
    "FIVE_ION_SPECTRUM_HZ",
    "TOMOGRAPHY_SETTING",
]
