"""
Plot-Data Export Service.

Writes experiment results as CSV or JSON files for external plotting.

Every data file embeds the code version, the command and the resolved
configuration. CSV files carry them as leading "# " lines before the header
row. Wall-clock timestamps live only in the `<name>.meta.json` sidecar, so
data files are byte-identical for identical inputs and seed.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from config.constants import APP_VERSION
from config.paths import get_artifact_path, get_output_path
from config.run_context import RunContext
from domain.exceptions import ExportError
from domain.validators import validate_output_format

logger = logging.getLogger(__name__)

PROBABILITY_CONVENTION = "P(n) = diag(U_IFO rho' U_IFO^dagger), U_IFO = U_F^dagger (adjoint of the forward propagator)"
CSV_FLOAT_FORMAT = "%.12g"


def to_jsonable(value: Any) -> Any:
    """
    Plain-JSON view of numpy scalars, arrays and complex numbers.

    Complex values become [re, im] pairs; complex matrices become row-major
    lists of such pairs.
    """
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def complex_matrix_to_json(matrix: np.ndarray) -> List[List[List[float]]]:
    """Row-major [[re, im], ...] rows of a complex matrix."""
    return to_jsonable(np.asarray(matrix, dtype=complex))


def complex_matrix_from_json(rows: List[List[List[float]]]) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


class PlotDataExporter:
    """
    Emits result tables and documents into the run's output directory.

    Example:
        >>> exporter = PlotDataExporter(create_run_context(command="hom"))
        >>> exporter.write_table("hom", scan, {"theta_scan": "0:0.5pi:200"})
        [PosixPath('results/hom.csv'), PosixPath('results/hom.meta.json')]
    """

    def __init__(self, ctx: RunContext):
        """
        Initialize exporter.

        Args:
            ctx: Run context (output directory, format, seed, command)

        Raises:
            ValidationError: If the context's format is unsupported
        """
        self.ctx = ctx
        self.fmt = validate_output_format(ctx.fmt)
        self.written: List[Path] = []
        logger.debug(f"Exporter for {ctx.command} -> {ctx.out_dir} ({self.fmt})")

    def _metadata(self, config: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
        return {
            "version": APP_VERSION,
            "command": self.ctx.command,
            "config": to_jsonable({**self.ctx.to_dict(), **(config or {})}),
            "convention": PROBABILITY_CONVENTION,
        }

    def _open_dir(self) -> Path:
        try:
            return get_output_path(self.ctx.out_dir)
        except OSError as e:
            raise ExportError(f"Output directory not writable: {e}", details={"out_dir": str(self.ctx.out_dir)}) from e

    def _write_text(self, path: Path, text: str) -> Path:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as e:
            logger.exception(f"Failed to write {path}: {e}")
            raise ExportError(f"Could not write output file: {e}", details={"path": str(path)}) from e
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def _write_sidecar(self, out_dir: Path, name: str, metadata: Dict[str, Any], data_file: Path) -> Path:
        sidecar = {
            **metadata,
            "data_file": data_file.name,
            "timestamp": datetime.now().isoformat(timespec="seconds"),
        }
        path = get_artifact_path(out_dir, name, ".meta.json")
        return self._write_text(path, json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    def write_table(
        self,
        name: str,
        table: pd.DataFrame,
        config: Optional[Mapping[str, Any]] = None,
    ) -> List[Path]:
        """
        Write a result table in the run's format plus its metadata sidecar.

        Args:
            name: Artifact name (file stem)
            table: Result rows; an empty frame yields a header-only CSV
            config: Resolved command configuration for the metadata

        Returns:
            [data file, sidecar]

        Raises:
            ExportError: If a file cannot be written
        """
        out_dir = self._open_dir()
        metadata = self._metadata(config)

        if self.fmt == "csv":
            lines = [
                f"# phononet {metadata['version']}",
                f"# command: {metadata['command']}",
                f"# config: {json.dumps(metadata['config'], sort_keys=True, separators=(',', ':'))}",
                f"# convention: {metadata['convention']}",
            ]
            body = table.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
            path = self._write_text(get_artifact_path(out_dir, name, ".csv"), "\n".join(lines) + "\n" + body)
        else:
            document = {
                "metadata": metadata,
                "columns": [str(c) for c in table.columns],
                "rows": to_jsonable(table.to_dict(orient="records")),
            }
            path = self._write_text(get_artifact_path(out_dir, name, ".json"), json.dumps(document, indent=2, sort_keys=True) + "\n")

        return [path, self._write_sidecar(out_dir, name, metadata, path)]

    def write_document(
        self,
        name: str,
        document: Mapping[str, Any],
        config: Optional[Mapping[str, Any]] = None,
    ) -> List[Path]:
        """
        Write a JSON document (reports, mode tables) plus its metadata sidecar.

        Documents are always JSON regardless of the run format.
        """
        out_dir = self._open_dir()
        metadata = self._metadata(config)
        payload = {"metadata": metadata, **to_jsonable(dict(document))}
        path = self._write_text(get_artifact_path(out_dir, name, ".json"), json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return [path, self._write_sidecar(out_dir, name, metadata, path)]


def emit_plotdata(
    result: Union[pd.DataFrame, Mapping[str, Any]],
    name: str,
    ctx: RunContext,
    config: Optional[Mapping[str, Any]] = None,
) -> List[Path]:
    """
    Write one result (table or document) for ctx.

    Raises:
        ValidationError: Unsupported format
        ExportError: Output not writable
    """
    exporter = PlotDataExporter(ctx)
    if isinstance(result, pd.DataFrame):
        return exporter.write_table(name, result, config)
    return exporter.write_document(name, result, config)
