import csv
import io
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from casimir import cli as cli_module
from casimir.asymptotics import delta_crit
from casimir.cli import cli
from config.settings import NumericsSettings


@pytest.fixture
def runner():
    return CliRunner()


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def _quantities(text):
    return {row[0]: row[1] for row in _rows(text)[1:]}


def test_compute_plane_sphere_conductors(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "compute", "--R1", "1e-3", "--L", "1e-6"])

    assert result.exit_code == 0, result.output
    values = _quantities(result.stdout)
    assert float(values["x"]) == pytest.approx(1e-3)
    assert float(values["e_pfa"]) == pytest.approx(-(math.pi**3) / 720.0, rel=1e-9)
    assert float(values["beta1"]) == pytest.approx(1.0 / 3.0 - 20.0 / math.pi**2, rel=1e-7)
    assert float(values["beta1_closed"]) == pytest.approx(1.0 / 3.0 - 20.0 / math.pi**2, rel=1e-11)
    assert float(values["force_pfa"]) == pytest.approx(-(math.pi**3) / 360.0, rel=1e-11)


def test_compute_json_record_is_reproducible(runner):
    args = ["--log-level", "WARNING", "compute", "--R1", "2e-6", "--R2", "2e-6", "--L", "2e-8",
            "--theta2", "0.4", "--format", "json"]

    first = json.loads(runner.invoke(cli, args).stdout)
    second = json.loads(runner.invoke(cli, args).stdout)

    assert first["config_hash"] == second["config_hash"]
    assert first["results"]["u"]["value"] == pytest.approx(0.25)
    assert first["results"]["e_pfa"]["unit"] == "hbar*c*R_eff/L^2"
    assert first["timing_s"] is None


def test_compute_near_critical_angle_keeps_e1_finite(runner):
    result = runner.invoke(
        cli, ["--log-level", "ERROR", "compute", "--theta2", "0.7550326", "--format", "json"]
    )

    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record["results"]["e1"]["value"] is not None


def test_compute_finite_temperature(runner):
    result = runner.invoke(
        cli, ["--log-level", "WARNING", "compute", "--R1", "1e-4", "--L", "1e-6", "--T", "300", "--format", "json"]
    )

    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert "corrections_zero_temperature_only" in record["flags"]
    assert record["results"]["tau"]["value"] > 0.0
    assert record["results"]["e_pfa"]["value"] < 0.0


def test_compute_dielectric_spheres(runner):
    result = runner.invoke(
        cli, ["--log-level", "WARNING", "compute", "--R1", "1e-5", "--R2", "1e-5", "--L", "1e-8", "--n", "2.0"]
    )

    assert result.exit_code == 0, result.output
    values = _quantities(result.stdout)
    assert -(math.pi**3) / 720.0 < float(values["e_pfa"]) < 0.0
    assert _rows(result.stdout)[-1][:2] == ["flag", "geometric_correction_pemc_only"]


@pytest.mark.parametrize(
    "args",
    [
        ["compute", "--theta1", "0.5", "--theta2", "0.2"],
        ["compute", "--L", "-1"],
        ["compute", "--n", "2.0", "--T", "300"],
        ["sweep-delta", "--ratios", "1,abc"],
        ["sweep-x", "--x-min", "0.5", "--x-max", "0.2"],
        ["mie-check", "--sizes", "1000,2000"],
    ],
)
def test_invalid_input_exits_with_two(runner, args):
    result = runner.invoke(cli, ["--log-level", "ERROR", *args])

    assert result.exit_code == 2


def test_unknown_log_level_exits_with_two(runner):
    result = runner.invoke(cli, ["--log-level", "LOUD", "compute"])

    assert result.exit_code == 2


def test_numerical_failure_exits_with_three(runner, monkeypatch):
    monkeypatch.setattr(cli_module, "get_settings", lambda: NumericsSettings(quad_max_level=2))

    result = runner.invoke(cli, ["--log-level", "ERROR", "compute"])

    assert result.exit_code == 3


def test_config_file_supplies_defaults(runner, tmp_path):
    path = tmp_path / "run.env"
    path.write_text("R1=5e-6\nL=1e-8\ntheta2=0.3\nformat=json\n", encoding="utf-8")

    result = runner.invoke(cli, ["--log-level", "WARNING", "--config", str(path), "compute", "--theta2", "0.2"])

    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record["inputs"]["R1"]["value"] == pytest.approx(5e-6)
    assert record["inputs"]["L"]["value"] == pytest.approx(1e-8)
    assert record["inputs"]["theta2"]["value"] == pytest.approx(0.2)


def test_sweep_delta_includes_critical_angle(runner, tmp_path):
    out = tmp_path / "sweep.csv"

    result = runner.invoke(
        cli, ["--log-level", "WARNING", "sweep-delta", "--points", "5", "--ratios", "1,inf", "--out", str(out)]
    )

    assert result.exit_code == 0, result.output
    rows = _rows(out.read_text(encoding="utf-8"))
    assert rows[0] == ["delta", "ratio", "u", "e1", "e_pfa", "beta1", "config_hash"]
    assert len(rows) == 1 + 2 * 6
    assert sum(row[5] == "pole" for row in rows[1:]) == 2
    assert {row[1] for row in rows[1:]} == {"1.00000000000e+00", "inf"}


def test_sweep_delta_curves_meet_at_critical_angle(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "sweep-delta", "--points", "7"])

    assert result.exit_code == 0, result.output
    rows = _rows(result.stdout)[1:]
    at_pole = [float(row[3]) for row in rows if row[5] == "pole"]
    assert len(at_pole) == 4
    assert at_pole == pytest.approx([at_pole[0]] * 4, rel=1e-10)
    assert at_pole[0] == pytest.approx(20.0 * (math.pi**2 - 6.0 * delta_crit() * (math.pi - delta_crit())) / (720.0 * math.pi), rel=1e-10)


def test_sweep_delta_spacing_at_zero_angle(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "sweep-delta", "--points", "7"])

    rows = [row for row in _rows(result.stdout)[1:] if float(row[0]) == 0.0]
    plane = next(float(row[3]) for row in rows if row[1] == "inf")
    assert len(rows) == 4
    for row in rows:
        u = float(row[2])
        assert float(row[3]) - plane == pytest.approx(math.pi**3 / 720.0 * u, rel=1e-9, abs=1e-14)


def test_sweep_x_follows_three_halves_power(runner):
    result = runner.invoke(
        cli, ["--log-level", "WARNING", "sweep-x", "--x-min", "1e-5", "--x-max", "1e-3", "--points", "5"]
    )

    assert result.exit_code == 0, result.output
    rows = _rows(result.stdout)
    assert rows[0] == ["x", "ratio", "correction", "analytic_x32", "fit_x32", "config_hash"]
    xs = np.array([float(row[0]) for row in rows[1:]])
    corrections = np.array([float(row[2]) for row in rows[1:]])
    slope = np.polyfit(np.log(xs), np.log(np.abs(corrections)), 1)[0]
    assert 1.45 <= slope <= 1.55
    assert corrections[0] / float(rows[1][4]) == pytest.approx(0.886, rel=0.05)
    assert float(rows[1][3]) / float(rows[1][4]) == pytest.approx(0.8865, abs=1e-3)


@pytest.mark.parametrize(
    "args",
    [
        ["sweep-delta", "--points", "3"],
        ["sweep-x", "--x-min", "1e-4", "--x-max", "1e-3", "--points", "2"],
        ["mie-check", "--sizes", "25,50"],
        ["oracle", "--suite", "pfa_closed_form", "--format", "csv"],
    ],
)
def test_every_table_echoes_config_hash(runner, args):
    first = runner.invoke(cli, ["--log-level", "WARNING", *args])
    second = runner.invoke(cli, ["--log-level", "WARNING", *args])

    assert first.exit_code == 0, first.output
    rows = _rows(first.stdout)
    assert rows[0][-1] == "config_hash"
    digests = {row[-1] for row in rows[1:]}
    assert len(digests) == 1
    assert len(digests.pop()) == 64
    assert first.stdout == second.stdout


def test_mie_check_rows(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "mie-check", "--sizes", "25,50"])

    assert result.exit_code == 0, result.output
    rows = _rows(result.stdout)
    assert rows[0] == ["xi_tilde", "polarization", "deviation_leading", "deviation_corrected", "config_hash"]
    assert len(rows) == 5
    for row in rows[1:]:
        assert float(row[3]) < float(row[2])


def test_oracle_identity_suite(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "oracle", "--suite", "identities", "--format", "csv"])

    assert result.exit_code == 0, result.output
    rows = _rows(result.stdout)
    assert rows[0] == ["suite", "passed", "metric", "value", "config_hash"]
    assert all(row[1] == "true" for row in rows[1:])


def test_ntlo_record(runner):
    result = runner.invoke(cli, ["--log-level", "WARNING", "ntlo", "--x", "1e-4", "--format", "json"])

    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record["results"]["ratio"]["value"] == pytest.approx(1.0 - 15.0 / math.pi**2 * 1e-4, abs=1e-5)
    assert record["references"]["beta_3_2_analytic"]["value"] == pytest.approx(2.3493, abs=1e-4)
