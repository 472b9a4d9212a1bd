"""
Config Reader Service.

Reads interferometer configurations (JSON or TOML) of the form

    {n_modes, compensation,
     beamsplitters: [{m, n, ion, theta_pi_units, phi_pi_units,
                      delta_hz, coupling_m_hz, coupling_n_hz,
                      duration_s, ramp_fraction, spin_sign}]}

Mode and ion indices in files are 1-based as in the calibration tables;
angles are rotation angles in units of π (0.5 is a 50:50 splitter).
An entry with "calibrated" set takes its ion and drive from the calibration
table for its mode pair and may not set the drive fields itself. Every
splitter with a drive is checked against the angle it implies.
Tomography files may list several such settings under "settings" together
with "input_modes", and may carry "state", "spectrum" and "detection".
"""

import dataclasses
import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from domain.exceptions import ConfigError, PhysicsError
from domain.models import BeamSplitterSpec, DetectionModel, InterferometerConfig, TomographySetup
from domain.validators import validate_input_file
from operations.network_ops import check_angle_consistency, reference_beam_splitter
from operations.tomography_ops import build_setup

logger = logging.getLogger(__name__)

CONFIG_EXTENSIONS = [".json", ".toml"]

REQUIRED_SPLITTER_FIELDS = ("m", "n", "ion", "theta_pi_units")
DRIVE_FIELDS = ("delta_hz", "coupling_m_hz", "coupling_n_hz", "duration_s", "ramp_fraction")
OPTIONAL_SPLITTER_FIELDS = {
    "phi_pi_units": 0.0,
    "delta_hz": None,
    "coupling_m_hz": None,
    "coupling_n_hz": None,
    "duration_s": None,
    "ramp_fraction": 0.0,
    "spin_sign": 1,
    "calibrated": False,
}


class ConfigReader:
    """
    Reader for network and tomography configuration documents.

    The document is parsed once in __init__; accessors build validated
    domain objects and raise ConfigError naming the offending field.
    """

    def __init__(self, file_path: Path):
        """
        Initialize config reader.

        Args:
            file_path: Path to a .json or .toml document

        Raises:
            ConfigError: If the file is missing or does not parse
        """
        self.file_path = validate_input_file(file_path, allowed_extensions=CONFIG_EXTENSIONS)
        self.document = self._load()
        logger.info(f"Initialized config reader for: {self.file_path}")

    def _load(self) -> Dict[str, Any]:
        try:
            if self.file_path.suffix.lower() == ".toml":
                with open(self.file_path, "rb") as fh:
                    data = tomllib.load(fh)
            else:
                with open(self.file_path, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"Config file does not parse: {e}", details={"path": str(self.file_path)}) from e
        except OSError as e:
            raise ConfigError(f"Config file cannot be read: {e}", details={"path": str(self.file_path)}) from e
        if not isinstance(data, dict):
            raise ConfigError("Config document must be an object", details={"path": str(self.file_path)})
        return data

    # ==================== Field helpers ====================

    def _number(self, entry: Dict[str, Any], key: str, where: str, default: Any = None, integer: bool = False) -> Any:
        field = f"{where}.{key}" if where else key
        value = entry.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("Field must be numeric", details={"field": field, "value": value})
        if integer:
            if int(value) != value:
                raise ConfigError("Field must be an integer", details={"field": field, "value": value})
            return int(value)
        return float(value)

    def _splitter(self, entry: Any, where: str, n_modes: int) -> BeamSplitterSpec:
        if not isinstance(entry, dict):
            raise ConfigError("Beam splitter entry must be an object", details={"field": where})
        calibrated = entry.get("calibrated", False)
        if not isinstance(calibrated, bool):
            raise ConfigError("Field must be true or false", details={"field": f"{where}.calibrated", "value": calibrated})
        for key in REQUIRED_SPLITTER_FIELDS:
            if key not in entry and not (calibrated and key == "ion"):
                raise ConfigError("Missing beam splitter field", details={"field": f"{where}.{key}"})
        unknown = set(entry) - set(REQUIRED_SPLITTER_FIELDS) - set(OPTIONAL_SPLITTER_FIELDS)
        if unknown:
            raise ConfigError("Unknown beam splitter field", details={"field": f"{where}.{sorted(unknown)[0]}"})
        if calibrated:
            for key in DRIVE_FIELDS:
                if key in entry:
                    raise ConfigError("Calibrated splitter takes its drive from the table", details={"field": f"{where}.{key}"})

        m = self._number(entry, "m", where, integer=True)
        n = self._number(entry, "n", where, integer=True)
        ion = self._number(entry, "ion", where, integer=True)
        for key, value in (("m", m), ("n", n)):
            if not 1 <= value <= n_modes:
                raise ConfigError("Mode index out of range (1-based)", details={"field": f"{where}.{key}", "value": value, "n_modes": n_modes})
        if ion is not None and ion < 1:
            raise ConfigError("Ion index must be >= 1", details={"field": f"{where}.ion", "value": ion})

        rotation = self._number(entry, "theta_pi_units", where)
        phase = self._number(entry, "phi_pi_units", where, default=0.0)
        spin_sign = self._number(entry, "spin_sign", where, default=1, integer=True)
        try:
            if calibrated:
                spec = dataclasses.replace(reference_beam_splitter((m, n), rotation, phase), spin_sign=spin_sign)
                if ion is not None and ion != spec.ion_j + 1:
                    raise ConfigError(
                        "Ion differs from the calibrated assignment",
                        details={"field": f"{where}.ion", "value": ion, "calibrated": spec.ion_j + 1},
                    )
            else:
                spec = BeamSplitterSpec.from_rotation(
                    m - 1,
                    n - 1,
                    ion - 1,
                    rotation,
                    phase,
                    delta_bs=self._number(entry, "delta_hz", where),
                    coupling_m=self._number(entry, "coupling_m_hz", where),
                    coupling_n=self._number(entry, "coupling_n_hz", where),
                    duration=self._number(entry, "duration_s", where),
                    ramp_fraction=self._number(entry, "ramp_fraction", where, default=0.0),
                    spin_sign=spin_sign,
                )
            check_angle_consistency(spec)
        except PhysicsError as e:
            raise ConfigError(f"Invalid beam splitter: {e.message}", details={"field": where, **e.details}) from e
        return spec

    def _interferometer(self, block: Any, where: str) -> InterferometerConfig:
        if not isinstance(block, dict):
            raise ConfigError("Interferometer setting must be an object", details={"field": where})
        prefix = f"{where}." if where else ""
        if "n_modes" not in block:
            raise ConfigError("Missing field", details={"field": f"{prefix}n_modes"})
        n_modes = self._number(block, "n_modes", where, integer=True)
        if n_modes < 1:
            raise ConfigError("n_modes must be >= 1", details={"field": f"{prefix}n_modes", "value": n_modes})
        entries = block.get("beamsplitters", [])
        if not isinstance(entries, list):
            raise ConfigError("beamsplitters must be a list", details={"field": f"{prefix}beamsplitters"})
        splitters = [self._splitter(e, f"{prefix}beamsplitters[{k}]", n_modes) for k, e in enumerate(entries)]
        compensation = block.get("compensation", "none")
        try:
            return InterferometerConfig(n_modes=n_modes, splitters=tuple(splitters), compensation=compensation)
        except PhysicsError as e:
            raise ConfigError(f"Invalid interferometer: {e.message}", details={"field": f"{prefix}compensation", **e.details}) from e

    # ==================== Accessors ====================

    def read_interferometer(self) -> InterferometerConfig:
        """The top-level interferometer (or the first of several settings)."""
        return self.read_settings()[0]

    def read_settings(self) -> List[InterferometerConfig]:
        """
        All interferometer settings of the document.

        Returns:
            One config per "settings" entry, or the document itself as the
            only setting

        Raises:
            ConfigError: If a setting is malformed
        """
        if "settings" in self.document:
            blocks = self.document["settings"]
            if not isinstance(blocks, list) or not blocks:
                raise ConfigError("settings must be a non-empty list", details={"field": "settings"})
            configs = [self._interferometer(b, f"settings[{g}]") for g, b in enumerate(blocks)]
        else:
            configs = [self._interferometer(self.document, "")]
        logger.debug(f"Read {len(configs)} interferometer setting(s) from {self.file_path.name}")
        return configs

    def read_tomography_setup(self, n_phonons: int, input_modes: Optional[int] = None) -> TomographySetup:
        """
        Tomography setup with the document's settings.

        Args:
            n_phonons: Phonon number of the input state
            input_modes: Input mode count; falls back to "input_modes" in the
                document, then to 2

        Raises:
            ConfigError: If settings disagree on the mode count or leave no input modes
        """
        configs = self.read_settings()
        total = {c.n_modes for c in configs}
        if len(total) != 1:
            raise ConfigError("Settings act on different mode counts", details={"field": "settings", "n_modes": sorted(total)})
        n_total = total.pop()
        if input_modes is None:
            input_modes = self._number(self.document, "input_modes", "", default=2, integer=True)
        if not 1 <= input_modes <= n_total:
            raise ConfigError("input_modes out of range", details={"field": "input_modes", "value": input_modes, "n_modes": n_total})
        try:
            return build_setup(input_modes, n_phonons, n_total - input_modes, configs)
        except PhysicsError as e:
            raise ConfigError(f"Invalid tomography setup: {e.message}", details={"field": "settings", **e.details}) from e

    def read_state(self) -> Optional[str]:
        state = self.document.get("state")
        if state is not None and not isinstance(state, str):
            raise ConfigError("state must be a state expression string", details={"field": "state"})
        return state

    def read_spectrum(self) -> List[float]:
        """
        Measured mode frequencies in Hz.

        Accepts {"frequencies_hz": [...]} or {"spectrum": {"frequencies_hz": [...]}}.
        """
        block = self.document.get("spectrum", self.document)
        values = block.get("frequencies_hz") if isinstance(block, dict) else None
        if not isinstance(values, list) or not values:
            raise ConfigError("Missing frequency list", details={"field": "frequencies_hz"})
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in values):
            raise ConfigError("Frequencies must be positive numbers", details={"field": "frequencies_hz"})
        return [float(v) for v in values]

    def read_detection(self, n_modes: int) -> Optional[DetectionModel]:
        """
        Optional binary-detection block.

        {"detection": {"mode_ions": [1, 2, ...], "p_bright_given_dark": 0.013,
        "p_dark_given_bright": 0.02}}; mode_ions defaults to ion m for mode m.
        """
        block = self.document.get("detection")
        if block is None:
            return None
        if not isinstance(block, dict):
            raise ConfigError("detection must be an object", details={"field": "detection"})
        ions: Sequence[int] = block.get("mode_ions", list(range(1, n_modes + 1)))
        if not isinstance(ions, list) or len(ions) != n_modes:
            raise ConfigError("mode_ions must list one ion per output mode", details={"field": "detection.mode_ions", "n_modes": n_modes})
        try:
            return DetectionModel.from_error_rates(
                [int(j) - 1 for j in ions],
                self._number(block, "p_bright_given_dark", "detection", default=0.0),
                self._number(block, "p_dark_given_bright", "detection", default=0.0),
            )
        except PhysicsError as e:
            raise ConfigError(f"Invalid detection model: {e.message}", details={"field": "detection", **e.details}) from e


def splitter_to_entry(spec: BeamSplitterSpec) -> Dict[str, Any]:
    """File entry of one splitter (1-based indices, π units); None fields are left out."""
    entry: Dict[str, Any] = {
        "m": spec.mode_m + 1,
        "n": spec.mode_n + 1,
        "ion": spec.ion_j + 1,
        "theta_pi_units": round(spec.rotation_pi, 12),
        "phi_pi_units": round(spec.phi_bs / math.pi, 12),
    }
    optional = {
        "delta_hz": spec.delta_bs,
        "coupling_m_hz": spec.coupling_m,
        "coupling_n_hz": spec.coupling_n,
        "duration_s": spec.duration,
    }
    entry.update({k: v for k, v in optional.items() if v is not None})
    if spec.ramp_fraction:
        entry["ramp_fraction"] = spec.ramp_fraction
    if spec.spin_sign != 1:
        entry["spin_sign"] = spec.spin_sign
    return entry


def config_to_document(config: InterferometerConfig) -> Dict[str, Any]:
    """Inverse of ConfigReader.read_interferometer."""
    return {
        "n_modes": config.n_modes,
        "compensation": config.compensation,
        "beamsplitters": [splitter_to_entry(s) for s in config.splitters],
    }
