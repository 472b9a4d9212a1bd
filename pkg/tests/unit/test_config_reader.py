"""
Unit tests for ConfigReader.

Tests cover JSON and TOML interferometer documents, 1-based index
conversion, tomography settings, detection blocks and error reporting.
"""

import json
import logging
import math
from pathlib import Path

import pytest

from domain.exceptions import ConfigError
from domain.models import BeamSplitterSpec, InterferometerConfig
from operations.network_ops import calibrated_ramp_fraction, check_angle_consistency
from services.config_reader import ConfigReader, config_to_document, splitter_to_entry

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture
def write_json(tmp_path):
    """Write a document to a JSON file and return its path."""
    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def two_splitter_document():
    """Four modes, a 50:50 splitter on modes 1-3 and a swap on 3-4."""
    return {
        "n_modes": 4,
        "beamsplitters": [
            {"m": 1, "n": 3, "ion": 3, "theta_pi_units": 0.5, "phi_pi_units": 0.25},
            {"m": 3, "n": 4, "ion": 5, "theta_pi_units": 1.0},
        ],
    }


# ==================== Interferometers ====================


def test_read_interferometer_converts_indices(write_json, two_splitter_document):
    """Test 1-based file indices become 0-based and π units become radians."""
    config = ConfigReader(write_json(two_splitter_document)).read_interferometer()

    assert config.n_modes == 4
    first, second = config.splitters
    assert (first.mode_m, first.mode_n, first.ion_j) == (0, 2, 2)
    assert first.theta_bs == pytest.approx(math.pi / 4)
    assert first.phi_bs == pytest.approx(math.pi / 4)
    assert second.rotation_pi == pytest.approx(1.0)
    assert second.phi_bs == 0.0
    assert config.compensation == "none"


def test_read_interferometer_toml(tmp_path):
    """Test TOML documents read the same way."""
    path = tmp_path / "config.toml"
    path.write_text(
        'n_modes = 2\ncompensation = "none"\n\n'
        "[[beamsplitters]]\nm = 1\nn = 2\nion = 2\ntheta_pi_units = 0.5\n"
        "delta_hz = -10000.0\ncoupling_m_hz = 6300.0\ncoupling_n_hz = 6300.0\nduration_s = 0.0002548\n",
        encoding="utf-8",
    )

    spec = ConfigReader(path).read_interferometer().splitters[0]

    assert spec.ion_j == 1
    assert spec.has_physical
    assert spec.duration == pytest.approx(254.8e-6)


def test_config_to_document_reads_back(write_json, two_splitter_document):
    """Test the writer produces a document the reader accepts unchanged."""
    config = ConfigReader(write_json(two_splitter_document)).read_interferometer()
    again = ConfigReader(write_json(config_to_document(config), "again.json")).read_interferometer()

    for a, b in zip(config.splitters, again.splitters):
        assert (a.mode_m, a.mode_n, a.ion_j) == (b.mode_m, b.mode_n, b.ion_j)
        assert a.theta_bs == pytest.approx(b.theta_bs)
        assert a.phi_bs == pytest.approx(b.phi_bs)


def test_splitter_to_entry_skips_missing_physics():
    """Test optional fields appear only when set."""
    entry = splitter_to_entry(BeamSplitterSpec.from_rotation(0, 1, 1, 0.5, 1.0))

    assert entry == {"m": 1, "n": 2, "ion": 2, "theta_pi_units": 0.5, "phi_pi_units": 1.0}


# ==================== Calibrated splitters ====================


def test_calibrated_entry_takes_table_drive(write_json):
    """Test a calibrated entry gets ion, drive and a consistent ramp from the table."""
    path = write_json({"n_modes": 4, "beamsplitters": [{"m": 2, "n": 4, "theta_pi_units": 0.304, "calibrated": True}]})

    spec = ConfigReader(path).read_interferometer().splitters[0]

    assert spec.ion_j == 3
    assert spec.duration == pytest.approx(468.1e-6 * 0.304 / 0.5)
    assert spec.ramp_fraction == pytest.approx(calibrated_ramp_fraction((2, 4)))
    assert check_angle_consistency(spec) < 1e-9


@pytest.mark.parametrize("splitter,field", [
    ({"m": 1, "n": 2, "theta_pi_units": 0.5, "calibrated": True, "duration_s": 1e-4}, "beamsplitters[0].duration_s"),
    ({"m": 1, "n": 2, "ion": 3, "theta_pi_units": 0.5, "calibrated": True}, "beamsplitters[0].ion"),
    ({"m": 1, "n": 2, "theta_pi_units": 0.5, "calibrated": "yes"}, "beamsplitters[0].calibrated"),
    ({"m": 1, "n": 2, "theta_pi_units": 0.5}, "beamsplitters[0].ion"),
])
def test_bad_calibrated_entry_names_field(write_json, splitter, field):
    """Test calibrated entries reject drive fields, a wrong ion and non-boolean flags."""
    path = write_json({"n_modes": 4, "beamsplitters": [splitter]})

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path).read_interferometer()

    assert exc_info.value.details["field"] == field


def test_calibrated_entry_uncalibrated_pair(write_json):
    """Test a pair without a table row is a config error."""
    path = write_json({"n_modes": 4, "beamsplitters": [{"m": 1, "n": 4, "theta_pi_units": 0.5, "calibrated": True}]})

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path).read_interferometer()

    assert "Invalid beam splitter" in str(exc_info.value)


def test_inconsistent_drive_is_logged(write_json, caplog):
    """Test an explicit drive that disagrees with theta is read with a warning."""
    entry = {
        "m": 1, "n": 2, "ion": 2, "theta_pi_units": 0.5,
        "delta_hz": -10000.0, "coupling_m_hz": 5000.0, "coupling_n_hz": 5000.0, "duration_s": 4.0e-4,
    }
    with caplog.at_level(logging.WARNING):
        spec = ConfigReader(write_json({"n_modes": 2, "beamsplitters": [entry]})).read_interferometer().splitters[0]

    assert check_angle_consistency(spec) == pytest.approx(1.0)
    assert "drive implies" in caplog.text


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.*")), ids=lambda p: p.name)
def test_shipped_configs_match_angle_formula(path, caplog):
    """Test every splitter with a drive in the sample configs reaches its theta."""
    reader = ConfigReader(path)
    if "n_modes" not in reader.document:
        pytest.skip("not an interferometer document")

    with caplog.at_level(logging.WARNING):
        splitters = [s for config in reader.read_settings() for s in config.splitters]

    assert splitters
    for spec in splitters:
        assert spec.has_physical
        assert check_angle_consistency(spec) < 1e-9
    assert "drive implies" not in caplog.text


# ==================== Errors ====================


@pytest.mark.parametrize("splitter,field", [
    ({"m": 1, "n": 2, "ion": 1}, "beamsplitters[0].theta_pi_units"),
    ({"m": 1, "n": 5, "ion": 1, "theta_pi_units": 0.5}, "beamsplitters[0].n"),
    ({"m": 1, "n": 2, "ion": 0, "theta_pi_units": 0.5}, "beamsplitters[0].ion"),
    ({"m": 1, "n": 2, "ion": 1, "theta_pi_units": "half"}, "beamsplitters[0].theta_pi_units"),
    ({"m": 1, "n": 2, "ion": 1, "theta_pi_units": 0.5, "colour": "red"}, "beamsplitters[0].colour"),
])
def test_bad_splitter_names_field(write_json, splitter, field):
    """Test errors name the offending field."""
    path = write_json({"n_modes": 4, "beamsplitters": [splitter]})

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path).read_interferometer()

    assert exc_info.value.details["field"] == field


def test_same_mode_pair_is_config_error(write_json):
    """Test physics validation failures surface as ConfigError."""
    path = write_json({"n_modes": 4, "beamsplitters": [{"m": 2, "n": 2, "ion": 1, "theta_pi_units": 0.5}]})

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path).read_interferometer()

    assert "Invalid beam splitter" in str(exc_info.value)


def test_missing_n_modes(write_json):
    """Test n_modes is required."""
    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(write_json({"beamsplitters": []})).read_interferometer()

    assert exc_info.value.details["field"] == "n_modes"


def test_unknown_compensation(write_json):
    """Test compensation modes are checked."""
    with pytest.raises(ConfigError):
        ConfigReader(write_json({"n_modes": 2, "compensation": "magic"})).read_interferometer()


def test_unparsable_file(tmp_path):
    """Test syntax errors become ConfigError."""
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path)

    assert "does not parse" in str(exc_info.value)


def test_missing_file(tmp_path):
    """Test missing files are input errors."""
    with pytest.raises(ConfigError):
        ConfigReader(tmp_path / "absent.json")


def test_top_level_must_be_object(write_json):
    """Test a JSON list is not a config document."""
    with pytest.raises(ConfigError):
        ConfigReader(write_json([1, 2, 3]))


# ==================== Tomography documents ====================


def test_read_tomography_setup(write_json, two_splitter_document):
    """Test settings plus input_modes build a setup with ancillas."""
    path = write_json({
        "input_modes": 2,
        "settings": [two_splitter_document, {**two_splitter_document, "beamsplitters": []}],
        "state": "(|10>+|01>)/sqrt2",
    })
    reader = ConfigReader(path)

    setup = reader.read_tomography_setup(n_phonons=1)

    assert len(setup.configs) == 2
    assert setup.n_ancillas == 2
    assert setup.output_sector.dim == 4
    assert reader.read_state() == "(|10>+|01>)/sqrt2"


def test_tomography_settings_must_agree(write_json, two_splitter_document):
    """Test settings on different mode counts are rejected."""
    path = write_json({"settings": [two_splitter_document, {"n_modes": 3}]})

    with pytest.raises(ConfigError) as exc_info:
        ConfigReader(path).read_tomography_setup(n_phonons=1)

    assert exc_info.value.details["field"] == "settings"


def test_input_modes_out_of_range(write_json, two_splitter_document):
    """Test input_modes cannot exceed the mode count."""
    with pytest.raises(ConfigError):
        ConfigReader(write_json(two_splitter_document)).read_tomography_setup(n_phonons=1, input_modes=5)


# ==================== Spectrum and detection ====================


def test_read_spectrum_nested_and_flat(write_json):
    """Test both spectrum layouts."""
    flat = ConfigReader(write_json({"frequencies_hz": [1.9e6, 2.0e6]}, "flat.json")).read_spectrum()
    nested = ConfigReader(write_json({"spectrum": {"frequencies_hz": [1.9e6, 2.0e6]}}, "nested.json")).read_spectrum()

    assert flat == nested == [1.9e6, 2.0e6]


def test_read_spectrum_rejects_negative(write_json):
    """Test frequencies must be positive."""
    with pytest.raises(ConfigError):
        ConfigReader(write_json({"frequencies_hz": [2.0e6, -1.0]})).read_spectrum()


def test_read_detection(write_json):
    """Test detection ions default to one per mode and convert to 0-based."""
    reader = ConfigReader(write_json({"detection": {"p_bright_given_dark": 0.013, "p_dark_given_bright": 0.02}}))

    model = reader.read_detection(n_modes=4)

    assert model.mode_ions == (0, 1, 2, 3)
    assert ConfigReader(write_json({"n_modes": 2}, "plain.json")).read_detection(2) is None


def test_read_detection_wrong_ion_count(write_json):
    """Test mode_ions must match the output modes."""
    reader = ConfigReader(write_json({"detection": {"mode_ions": [1, 2]}}))

    with pytest.raises(ConfigError):
        reader.read_detection(n_modes=4)
