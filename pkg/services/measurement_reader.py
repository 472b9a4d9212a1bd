"""
Measurement Reader Service.

Handles reading recorded data for:
- Tomography counts (JSON): {settings: [{setting_id, shots, counts: [{occupation|pattern, n}]}]}
- Blue-sideband traces (CSV): columns wait_s, time_s, signal
- Fitted thermal occupations (CSV): columns wait_s, nbar, nbar_err

Uses pandas for the CSV files.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from domain.exceptions import ConfigError
from domain.validators import validate_input_file

logger = logging.getLogger(__name__)

CountTable = Dict[Tuple[int, ...], float]

TRACE_COLUMNS = ("wait_s", "time_s", "signal")
NBAR_COLUMNS = ("wait_s", "nbar")


class MeasurementReader:
    """
    Reader for tomography count files and thermometry CSV files.
    """

    def __init__(self, file_path: Path):
        """
        Initialize measurement reader.

        Args:
            file_path: Path to a .json counts file or a .csv trace file

        Raises:
            ConfigError: If file is invalid or doesn't exist
        """
        self.file_path = validate_input_file(file_path, allowed_extensions=[".json", ".csv"])
        logger.info(f"Initialized measurement reader for: {self.file_path}")

    # ==================== Tomography counts ====================

    def read_counts(self) -> Tuple[List[CountTable], bool]:
        """
        Per-setting count tables, ordered by setting_id.

        Returns:
            (tables, binary): binary is True when entries are bright/dark
            patterns rather than occupations

        Raises:
            ConfigError: Malformed document, mixed key kinds or duplicate setting ids
        """
        try:
            with open(self.file_path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Counts file does not parse: {e}", details={"path": str(self.file_path)}) from e

        settings = data.get("settings") if isinstance(data, dict) else data
        if not isinstance(settings, list) or not settings:
            raise ConfigError("Counts file needs a non-empty settings list", details={"field": "settings"})

        tables: Dict[int, CountTable] = {}
        kinds = set()
        for g, entry in enumerate(settings):
            where = f"settings[{g}]"
            if not isinstance(entry, dict) or not isinstance(entry.get("counts"), list):
                raise ConfigError("Setting needs a counts list", details={"field": f"{where}.counts"})
            setting_id = entry.get("setting_id", g)
            if not isinstance(setting_id, int) or setting_id in tables:
                raise ConfigError("setting_id must be a unique integer", details={"field": f"{where}.setting_id", "value": setting_id})

            table: CountTable = {}
            for k, record in enumerate(entry["counts"]):
                key_kind = "pattern" if isinstance(record, dict) and "pattern" in record else "occupation"
                key = record.get(key_kind) if isinstance(record, dict) else None
                n = record.get("n") if isinstance(record, dict) else None
                if not isinstance(key, list) or not all(isinstance(v, int) and v >= 0 for v in key):
                    raise ConfigError("Count record needs an occupation or pattern list", details={"field": f"{where}.counts[{k}]"})
                if isinstance(n, bool) or not isinstance(n, (int, float)) or n < 0:
                    raise ConfigError("Count must be a non-negative number", details={"field": f"{where}.counts[{k}].n"})
                kinds.add(key_kind)
                table[tuple(key)] = table.get(tuple(key), 0.0) + float(n)

            shots = entry.get("shots")
            if shots is not None and abs(sum(table.values()) - shots) > 0.5:
                logger.warning(f"{where}: counts sum to {sum(table.values()):.0f}, header says {shots} shots")
            tables[setting_id] = table

        if len(kinds) > 1:
            raise ConfigError("Counts mix occupations and patterns", details={"field": "counts"})
        ordered = [tables[g] for g in sorted(tables)]
        logger.debug(f"Read counts for {len(ordered)} settings from {self.file_path.name}")
        return ordered, kinds == {"pattern"}

    # ==================== Thermometry ====================

    def _read_csv(self, required: Tuple[str, ...]) -> pd.DataFrame:
        try:
            df = pd.read_csv(self.file_path, comment="#")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise ConfigError(f"CSV file does not parse: {e}", details={"path": str(self.file_path)}) from e
        df.columns = [str(c).strip().lower() for c in df.columns]
        for column in required:
            if column not in df.columns:
                raise ConfigError("Missing CSV column", details={"field": column, "path": str(self.file_path)})
        try:
            df[list(required)] = df[list(required)].astype(float)
        except ValueError as e:
            raise ConfigError(f"Non-numeric CSV value: {e}", details={"path": str(self.file_path)}) from e
        return df

    def read_bsb_traces(self) -> List[Tuple[float, np.ndarray, np.ndarray]]:
        """
        BSB flopping traces grouped by wait time.

        Returns:
            (wait_time, pulse_times, signal) per wait, ascending in wait time
        """
        df = self._read_csv(TRACE_COLUMNS)
        series = []
        for wait, group in df.groupby("wait_s", sort=True):
            group = group.sort_values("time_s")
            series.append((float(wait), group["time_s"].to_numpy(), group["signal"].to_numpy()))
        logger.debug(f"Read {len(series)} BSB traces ({len(df)} samples)")
        return series

    def read_nbar_points(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        (waits, n̄, n̄ errors); a missing nbar_err column reads as zeros.
        """
        df = self._read_csv(NBAR_COLUMNS)
        errors = df["nbar_err"].astype(float).to_numpy() if "nbar_err" in df.columns else np.zeros(len(df))
        return df["wait_s"].to_numpy(), df["nbar"].to_numpy(), errors
