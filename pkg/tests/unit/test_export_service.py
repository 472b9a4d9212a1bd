"""
Unit tests for the plot-data export service.

Tests cover CSV headers and metadata sidecars, JSON tables and documents,
numpy conversion and unwritable output directories.
"""

import json

import numpy as np
import pandas as pd
import pytest

from config.constants import APP_VERSION
from config.run_context import create_run_context
from domain.exceptions import ExportError
from services.export_service import (
    PlotDataExporter,
    complex_matrix_from_json,
    complex_matrix_to_json,
    emit_plotdata,
    to_jsonable,
)


@pytest.fixture
def scan():
    """Small HOM-style table."""
    return pd.DataFrame({"theta": [0.0, 0.25, 0.5], "p11": [1.0, 0.5, 0.0]})


def _ctx(out_dir, fmt="csv"):
    return create_run_context(seed=7, shots=0, out_dir=out_dir, fmt=fmt, command="hom")


# ==================== CSV ====================


def test_write_table_csv_header_and_sidecar(tmp_path, scan):
    """Test the CSV carries metadata comments and a sidecar with the timestamp."""
    data_file, sidecar = PlotDataExporter(_ctx(tmp_path)).write_table("hom", scan, {"theta_scan": "0:0.5pi:3"})

    lines = data_file.read_text(encoding="utf-8").splitlines()
    assert data_file.name == "hom.csv"
    assert lines[0] == f"# phononet {APP_VERSION}"
    assert lines[1] == "# command: hom"
    assert '"theta_scan":"0:0.5pi:3"' in lines[2]
    assert lines[3].startswith("# convention:")
    assert lines[4] == "theta,p11"
    assert "timestamp" not in data_file.read_text(encoding="utf-8")

    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    assert sidecar.name == "hom.meta.json"
    assert meta["data_file"] == "hom.csv"
    assert meta["config"]["seed"] == 7
    assert "timestamp" in meta

    table = pd.read_csv(data_file, comment="#")
    assert np.allclose(table["p11"], scan["p11"])


def test_csv_is_reproducible(tmp_path, scan):
    """Test identical inputs give byte-identical data files."""
    first, _ = emit_plotdata(scan, "hom", _ctx(tmp_path / "a"))
    second, _ = emit_plotdata(scan, "hom", _ctx(tmp_path / "b"))

    assert first.read_bytes() == second.read_bytes()


def test_empty_table_writes_header(tmp_path):
    """Test an empty result still yields a header row."""
    data_file, _ = emit_plotdata(pd.DataFrame(columns=["rate", "error"]), "budget", _ctx(tmp_path))

    assert data_file.read_text(encoding="utf-8").splitlines()[-1] == "rate,error"


# ==================== JSON ====================


def test_write_table_json(tmp_path, scan):
    """Test JSON tables list columns and rows."""
    data_file, _ = emit_plotdata(scan, "hom", _ctx(tmp_path, fmt="json"))

    document = json.loads(data_file.read_text(encoding="utf-8"))
    assert data_file.suffix == ".json"
    assert document["columns"] == ["theta", "p11"]
    assert document["rows"][1] == {"theta": 0.25, "p11": 0.5}
    assert document["metadata"]["command"] == "hom"


def test_write_document_is_always_json(tmp_path):
    """Test documents ignore the CSV format and convert complex values."""
    rho = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    data_file, _ = emit_plotdata({"fidelity": np.float64(0.99), "rho": complex_matrix_to_json(rho)}, "tomography", _ctx(tmp_path))

    document = json.loads(data_file.read_text(encoding="utf-8"))
    assert data_file.name == "tomography.json"
    assert document["fidelity"] == pytest.approx(0.99)
    assert np.allclose(complex_matrix_from_json(document["rho"]), rho)


def test_to_jsonable_numpy_values():
    """Test numpy scalars, arrays and complex numbers become plain JSON."""
    value = to_jsonable({1: np.int64(3), "flag": np.bool_(True), "z": 1 + 2j, "v": np.arange(2)})

    assert value == {"1": 3, "flag": True, "z": [1.0, 2.0], "v": [0, 1]}
    json.dumps(value)


# ==================== Errors ====================


def test_unwritable_output_directory(tmp_path, scan):
    """Test a file in place of the output directory raises ExportError."""
    blocker = tmp_path / "results"
    blocker.write_text("not a directory", encoding="utf-8")

    with pytest.raises(ExportError) as exc_info:
        emit_plotdata(scan, "hom", _ctx(blocker))

    assert exc_info.value.exit_code == 4
