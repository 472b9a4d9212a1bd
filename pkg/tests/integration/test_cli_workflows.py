"""
Integration tests for the command-line workflows.

Tests run complete subcommands through cli.commands.run and check the
written artifacts and exit codes.
"""

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from cli.commands import run
from operations.tomography_ops import build_superoperator, gram_log_det, single_splitter_setup

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def _read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


# ==================== Network experiments ====================


def test_hom_workflow(tmp_path):
    """Test the HOM dip reaches zero at the 50:50 point."""
    status = run(["hom", "--theta-scan", "0:0.5pi:5", "--out", str(tmp_path)])

    assert status == 0
    table = _read_table(tmp_path / "hom.csv")
    assert len(table) == 5
    assert table["p_11"].iloc[2] == pytest.approx(0.0, abs=1e-12)
    assert table["p_11"].iloc[0] == pytest.approx(1.0)

    meta = json.loads((tmp_path / "hom.meta.json").read_text(encoding="utf-8"))
    assert meta["config"]["visibility"] == pytest.approx(1.0, abs=1e-9)


def test_phase_scan_workflow(tmp_path):
    """Test a Mach-Zehnder phase scan swings the input fully between modes."""
    status = run([
        "phase-scan", "--config", str(CONFIGS / "mach_zehnder.toml"), "--input", "|1000>",
        "--phi-scan", "0:2pi:41", "--out", str(tmp_path),
    ])

    assert status == 0
    table = _read_table(tmp_path / "phase-scan.csv")
    assert np.ptp(table["p_1000"]) > 0.99
    assert np.allclose(table["p_1000"] + table["p_0100"], 1.0)
    assert np.allclose(table["p_0010"], 0.0)


def test_bs_scan_effective_workflow(tmp_path):
    """Test the calibrated (1,2) splitter transfers the phonon over the scan."""
    status = run(["bs-scan", "--pair", "1,2", "--times", "0:600e-6:31", "--out", str(tmp_path)])

    assert status == 0
    table = _read_table(tmp_path / "bs-scan.csv")
    assert table["p_m"].iloc[0] == pytest.approx(1.0)
    assert np.allclose(table["p_m"] + table["p_n"], 1.0)


# ==================== Tomography ====================


def test_tomography_exact_probabilities(tmp_path):
    """Test reconstruction from exact probabilities recovers the input state."""
    status = run([
        "tomography", "--config", str(CONFIGS / "tomography_reference.json"),
        "--shots", "0", "--format", "json", "--out", str(tmp_path),
    ])

    assert status == 0
    report = json.loads((tmp_path / "tomography.json").read_text(encoding="utf-8"))
    assert report["fidelity"] == pytest.approx(1.0, abs=1e-6)
    assert report["basis"] == ["10", "01"]

    probabilities = json.loads((tmp_path / "tomography_probabilities.json").read_text(encoding="utf-8"))
    assert probabilities["columns"] == ["setting", "occupation", "p_measured", "p_reconstructed"]
    assert len(probabilities["rows"]) == 4


def test_tomography_recorded_counts(tmp_path):
    """Test counts files feed the same reconstruction."""
    counts = tmp_path / "counts.json"
    counts.write_text(json.dumps({"settings": [{"setting_id": 0, "shots": 300, "counts": [
        {"occupation": [1, 0, 0, 0], "n": 60},
        {"occupation": [0, 1, 0, 0], "n": 90},
        {"occupation": [0, 0, 1, 0], "n": 80},
        {"occupation": [0, 0, 0, 1], "n": 70},
    ]}]}), encoding="utf-8")

    status = run([
        "tomography", "--config", str(CONFIGS / "tomography_reference.json"),
        "--counts", str(counts), "--out", str(tmp_path / "out"),
    ])

    assert status == 0
    report = json.loads((tmp_path / "out" / "tomography.json").read_text(encoding="utf-8"))
    assert report["shots"] == 300
    assert 0.0 <= report["fidelity"] <= 1.0


def test_optimize_config_single_splitter(tmp_path):
    """Test the single-splitter search writes settings at the 2/3 population optimum."""
    status = run(["optimize-config", "--template", "single", "--settings", "3", "--starts", "8", "--seed", "2024", "--out", str(tmp_path)])

    assert status == 0
    document = json.loads((tmp_path / "optimize-config.json").read_text(encoding="utf-8"))
    reference = gram_log_det(build_superoperator(single_splitter_setup()))
    assert document["template"] == "single"
    assert document["log_det"] >= reference + math.log(1 - 1e-6)
    assert math.sin(document["parameters"]["rotation_0"]) ** 2 == pytest.approx(2 / 3, abs=1e-3)
    assert len(document["settings"]) == 3
    assert all(len(setting["beamsplitters"]) == 1 for setting in document["settings"])


# ==================== Noise ====================


def test_noise_sim_heating_budget(tmp_path):
    """Test the heating budget grows with the rate."""
    status = run(["noise-sim", "--kind", "heating", "--rates", "10,100", "--out", str(tmp_path)])

    assert status == 0
    table = _read_table(tmp_path / "noise-sim_heating.csv")
    assert list(table["rate"]) == [10.0, 100.0]
    assert 0.0 < table["error"].iloc[0] < table["error"].iloc[1]


def test_noise_sim_measured_rates(tmp_path):
    """Test the measured noise model adds under 1% error."""
    status = run(["noise-sim", "--kind", "measured", "--out", str(tmp_path)])

    assert status == 0
    table = _read_table(tmp_path / "noise-sim_measured.csv")
    assert len(table) == 1
    assert 0.0 < table["error"].iloc[0] <= 0.01


def test_noise_sim_without_rates_exits_2(tmp_path):
    """Test a rate sweep needs --rates."""
    assert run(["noise-sim", "--kind", "spin", "--out", str(tmp_path)]) == 2


# ==================== Ion chain ====================


def test_modes_spectrum_fit(tmp_path):
    """Test the five-ion spectrum fit lands within tens of kHz."""
    status = run(["modes", "--fit-spectrum", str(CONFIGS / "five_ion_spectrum.json"), "--out", str(tmp_path)])

    assert status == 0
    document = json.loads((tmp_path / "modes.json").read_text(encoding="utf-8"))
    assert 0 < document["fit"]["rms_residual_hz"] < 30e3
    assert len(document["pair_assignment"]) == 10
    assert all(1 <= entry["ion"] <= 5 for entry in document["pair_assignment"])


def test_scaling_connectivity(tmp_path):
    """Test connectivity rows per chain size."""
    status = run(["scaling", "--study", "connectivity", "--ions-range", "10,30", "--out", str(tmp_path)])

    assert status == 0
    table = _read_table(tmp_path / "scaling_connectivity.csv")
    assert list(table["n_ions"]) == [10, 30]
    assert np.all((table["mean_best_product_times_n"] > 1.0) & (table["mean_best_product_times_n"] < 3.0))


# ==================== Thermometry ====================


def test_heating_fit_synthetic(tmp_path):
    """Test a synthetic heating series is fitted back to its rate."""
    status = run(["heating-fit", "--synthetic-rate", "2300", "--out", str(tmp_path)])

    assert status == 0
    meta = json.loads((tmp_path / "heating-fit.meta.json").read_text(encoding="utf-8"))
    assert meta["config"]["fit"]["rate_quanta_per_s"] == pytest.approx(2300.0, rel=0.1)


def test_heating_fit_from_points(tmp_path):
    """Test fitted occupations give the linear rate directly."""
    points = tmp_path / "nbar.csv"
    points.write_text("wait_s,nbar,nbar_err\n0,0.1,0.01\n0.01,0.4,0.01\n0.02,0.7,0.01\n", encoding="utf-8")

    status = run(["heating-fit", "--nbar-points", str(points), "--out", str(tmp_path / "out")])

    assert status == 0
    table = _read_table(tmp_path / "out" / "heating-fit.csv")
    assert np.allclose(table["nbar_model"], [0.1, 0.4, 0.7])


# ==================== Exit codes ====================


def test_missing_config_exits_2(tmp_path):
    """Test input errors exit with status 2."""
    status = run(["phase-scan", "--config", str(tmp_path / "absent.json"), "--input", "|10>", "--out", str(tmp_path)])
    assert status == 2


def test_bad_state_exits_2(tmp_path):
    """Test unparsable state expressions exit with status 2."""
    status = run([
        "phase-scan", "--config", str(CONFIGS / "mach_zehnder.toml"), "--input", "|10>+",
        "--out", str(tmp_path),
    ])
    assert status == 2


def test_unstable_chain_exits_3(tmp_path):
    """Test physics failures exit with status 3."""
    status = run(["modes", "--ions", "10", "--nu-com", "1e6", "--nu-axial", "0.9e6", "--out", str(tmp_path)])
    assert status == 3


def test_unwritable_output_exits_4(tmp_path):
    """Test output failures exit with status 4."""
    blocker = tmp_path / "taken"
    blocker.write_text("", encoding="utf-8")

    status = run(["hom", "--theta-scan", "0:0.5pi:3", "--out", str(blocker)])
    assert status == 4


def test_bad_format_is_usage_error(tmp_path):
    """Test argparse rejects unknown formats with status 2."""
    with pytest.raises(SystemExit) as exc_info:
        run(["hom", "--format", "xml", "--out", str(tmp_path)])

    assert exc_info.value.code == 2
