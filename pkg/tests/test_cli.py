"""Test the command-line entry point."""

import json

import numpy as np
import pytest

from yig_magnetometer.cli import main
from yig_magnetometer.const import EXIT_CONFIG_ERROR, EXIT_NUMERICAL_ERROR, EXIT_OK
from yig_magnetometer.physics.fmr import s_parameter_sweep
from yig_magnetometer.physics.leeson import evaluate_spectrum
from yig_magnetometer.physics.models import FieldSeries
from yig_magnetometer.physics.utils import (
    read_field,
    read_table,
    write_field,
    write_phase_noise,
    write_sweep,
)

from .const import MOCK_KAPPAS_HZ, MOCK_LEESON, TWO_PI

SHORT_SCENARIO_TOML = """
[leeson]
enabled = false

[[tones]]
f_hz = 1e3
b_rms_tesla = 1e-12

[sampling]
sample_rate_hz = 1e6
if_hz = 200e3
duration_s = 2.0
"""


def _json_output(capsys):
    return json.loads(capsys.readouterr().out)


def test_limits_json(capsys):
    """Test the limits budget printed as JSON."""
    assert main(["--format", "json", "limits"]) == EXIT_OK
    report = _json_output(capsys)
    assert report["thermal_limit_t_rts"] == pytest.approx(188.6e-18, rel=0.01)
    assert report["tip_angle_rad"] == pytest.approx(0.0708, rel=0.01)


def test_limits_text(capsys):
    """Test the key=value text output."""
    assert main(["limits", "--diameter-m", "2e-3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "spin_projection_limit_t_rts=" in out


def test_phase_noise_table(tmp_path, capsys):
    """Test that the phase-noise table is written and printed."""
    assert main(["--format", "json", "--out-dir", str(tmp_path), "phase-noise"]) == EXIT_OK
    rows = _json_output(capsys)
    table = read_table(tmp_path / "phase_noise.txt", 3)
    assert len(rows) == len(table) == 41
    at_100k = table[np.argmin(np.abs(table[:, 0] - 1e5))]
    assert at_100k[1] == pytest.approx(-154.86, abs=0.01)


def test_sideband_sweep_table(tmp_path, capsys):
    """Test the sideband sweep table."""
    assert main(["--out-dir", str(tmp_path), "sweep"]) == EXIT_OK
    table = read_table(tmp_path / "sideband_sweep.txt", 5)
    assert len(table) == 6
    np.testing.assert_allclose(table[:, 3], table[:, 2], rtol=0.02)


def test_extract_kappas(tmp_path, capsys, resonator):
    """Test coupling-rate extraction from a sweep file."""
    path = tmp_path / "sweep.txt"
    f_y = resonator.omega_y / TWO_PI
    write_sweep(path, s_parameter_sweep(resonator, f_y + np.linspace(-5e6, 5e6, 20001)))
    assert main(["--format", "json", "extract-kappas", str(path)]) == EXIT_OK
    fit = _json_output(capsys)
    fitted = (fit["kappa0_hz"], fit["kappa1_hz"], fit["kappa2_hz"])
    assert fitted == pytest.approx(MOCK_KAPPAS_HZ, rel=0.01)


def test_extract_kappas_numerical_error(tmp_path, resonator):
    """Test exit code 3 for a sweep that misses one half-power point."""
    path = tmp_path / "sweep.txt"
    f_y = resonator.omega_y / TWO_PI
    write_sweep(path, s_parameter_sweep(resonator, f_y + np.linspace(-100e3, 5e6, 1001)))
    assert main(["extract-kappas", str(path)]) == EXIT_NUMERICAL_ERROR


def test_fit_leeson(tmp_path, capsys, leeson):
    """Test the Leeson fit of a phase-noise file with the power given in dBm."""
    path = tmp_path / "pn.txt"
    write_phase_noise(path, evaluate_spectrum(leeson, np.logspace(3, 7, 200)))
    argv = ["--format", "json", "fit-leeson", str(path), "--p-sustain-dbm", "3.0103"]
    assert main(argv) == EXIT_OK
    fit = _json_output(capsys)
    assert fit["f_leeson_hz"] == pytest.approx(MOCK_LEESON["f_leeson"], rel=0.01)
    assert fit["noise_factor"] == pytest.approx(MOCK_LEESON["noise_factor"], rel=0.01)


def test_fit_leeson_conflicting_power(tmp_path, leeson):
    """Test that the sustaining power cannot be given twice."""
    path = tmp_path / "pn.txt"
    write_phase_noise(path, evaluate_spectrum(leeson, np.logspace(3, 7, 50)))
    argv = ["fit-leeson", str(path), "--p-sustain-dbm", "3", "--p-sustain-w", "2e-3"]
    assert main(argv) == EXIT_CONFIG_ERROR


def test_missing_and_malformed_inputs(tmp_path):
    """Test exit code 2 for absent or unparsable files."""
    assert main(["fit-leeson", str(tmp_path / "absent.txt")]) == EXIT_CONFIG_ERROR
    assert main(["run", str(tmp_path / "absent.toml")]) == EXIT_CONFIG_ERROR
    broken = tmp_path / "broken.toml"
    broken.write_text("[sampling\n")
    assert main(["run", str(broken)]) == EXIT_CONFIG_ERROR
    table = tmp_path / "pn.txt"
    table.write_text("1e3, -120\n1e4\n")
    assert main(["fit-leeson", str(table)]) == EXIT_CONFIG_ERROR


def test_run_writes_outputs(tmp_path, capsys):
    """Test that a run writes the report, spectrum and field with the seed override."""
    config = tmp_path / "scenario.toml"
    config.write_text(SHORT_SCENARIO_TOML)
    out_dir = tmp_path / "out"
    argv = ["--format", "json", "--seed", "9", "--out-dir", str(out_dir), "run", str(config)]
    argv += ["--block-size", "262144"]
    assert main(argv) == EXIT_OK
    printed = _json_output(capsys)
    report = json.loads((out_dir / "report.json").read_text())
    assert report == printed
    assert report["config"]["seed"] == 9
    assert report["config"]["sampling"]["block_size"] == 262144
    assert report["tones"][0]["reading_rms_tesla"] == pytest.approx(1e-12, rel=0.01)
    for name in ("asd.txt", "asd.json", "field.bin", "field.json"):
        assert (out_dir / name).exists()
    assert not (out_dir / "chop.txt").exists()
    assert read_field(out_dir / "field.bin").n_samples == 2_000_000


def test_encode_demod_asd_chain(tmp_path):
    """Test the file-based pipeline from a field record to its spectrum."""
    sample_rate, n = 100e3, 200_000
    t = np.arange(n) / sample_rate
    samples = np.sqrt(2) * 1e-12 * np.cos(TWO_PI * 1e3 * t)
    field = FieldSeries(sample_rate=sample_rate, samples=samples)
    write_field(tmp_path / "field.bin", field)

    waveform = tmp_path / "waveform.bin"
    recovered = tmp_path / "recovered.bin"
    asd = tmp_path / "asd.txt"
    argv = ["encode", str(tmp_path / "field.bin"), str(waveform), "--carrier-hz", "20e3"]
    assert main(argv) == EXIT_OK
    assert main(["demod", str(waveform), str(recovered)]) == EXIT_OK
    assert main(["asd", str(recovered), str(asd)]) == EXIT_OK

    metadata = json.loads((tmp_path / "asd.json").read_text())
    assert metadata["segments"] == 2
    table = read_table(asd, 2)
    (row,) = table[table[:, 0] == 1e3]
    assert row[1] == pytest.approx(1e-12, rel=0.01)


def test_version(capsys):
    """Test the version flag."""
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "yig-magnetometer" in capsys.readouterr().out
