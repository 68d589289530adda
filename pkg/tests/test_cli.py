import cmath
import csv
import io
import json
import math

import pytest

from ptsusy import cli
from ptsusy.config import RunConfig, build_config, parse_config_text
from ptsusy.errors import ConfigError


def run(capsys, *argv):
    status = cli.main(list(argv))
    return status, capsys.readouterr().out


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def value_at_origin(document):
    row = next(r for r in document["results"] if r["x"] == 0.0)
    return complex(row["re"], row["im"])


class TestSpectrum:
    def test_partner2_table(self, capsys):
        status, out = run(capsys, "spectrum", "--mu", "1", "--lambda", "-2.5", "--which", "partner2")
        assert status == cli.EXIT_OK
        results = json.loads(out)["results"]
        assert [r["analytic"] for r in results] == [-3.75, -0.75]
        for r in results:
            assert r["energy_re"] == pytest.approx(r["analytic"], abs=1e-6)
            assert r["bound"] is True
            assert r["continuum_edge"] == 0.25
            assert r["zero_mode"] is False

    def test_partner1_flags_zero_mode(self, capsys):
        status, out = run(capsys, "spectrum", "--mu", "1", "--lambda", "-2.5", "--which", "partner1")
        assert status == cli.EXIT_OK
        results = json.loads(out)["results"]
        assert len(results) == 3
        zero = [r for r in results if r["zero_mode"]]
        assert len(zero) == 1
        assert zero[0]["energy_re"] == pytest.approx(0.0, abs=1e-6)
        assert zero[0]["analytic"] == 0.0
        assert all(abs(r["energy_im"]) < 1e-8 for r in results)

    def test_both_in_csv(self, capsys):
        status, out = run(capsys, "spectrum", "--mu", "1", "--lambda", "-2.5", "--format", "csv")
        assert status == cli.EXIT_OK
        rows = rows_of(out)
        assert out.splitlines()[0] == ",".join(cli.SPECTRUM_COLUMNS + ["partner"])
        assert [r["partner"] for r in rows] == ["partner1"] * 3 + ["partner2"] * 2

    def test_shallow_well_single_row(self, capsys):
        # kappa = 0.1 needs a wide box
        status, out = run(capsys, "spectrum", "--mu", "1", "--lambda", "0.6", "--which", "partner2",
                          "--half-width", "120", "--n-points", "30001")
        assert status == cli.EXIT_OK
        results = json.loads(out)["results"]
        assert len(results) == 1
        assert results[0]["energy_re"] == pytest.approx(0.24, abs=1e-6)


class TestVerify:
    def test_table_passes_and_is_deterministic(self, capsys):
        first = run(capsys, "verify", "--mu", "1", "--lambda", "-2.5")
        second = run(capsys, "verify", "--mu", "1", "--lambda", "-2.5")
        assert first[0] == cli.EXIT_OK
        assert first == second
        document = json.loads(first[1])
        assert set(document) == {"config", "results", "checks"}
        assert document["checks"] and all(c["passed"] for c in document["checks"])

    def test_scaled_table_passes(self, capsys):
        status, _ = run(capsys, "verify", "--mu", "2", "--lambda", "-5", "--format", "csv")
        assert status == cli.EXIT_OK

    def test_deeper_well_passes(self, capsys):
        status, out = run(capsys, "verify", "--mu", "1", "--lambda", "-3.5", "--format", "csv")
        assert status == cli.EXIT_OK
        assert all(r["passed"] == "true" for r in rows_of(out))

    def test_out_of_memory_is_numerical_failure(self, capsys, monkeypatch):
        def exhausted(*args, **kwargs):
            raise MemoryError("Unable to allocate")

        monkeypatch.setattr(cli.numerics, "solve_refined", exhausted)
        status, out = run(capsys, "spectrum", "--mu", "1", "--lambda", "-2.5")
        assert status == cli.EXIT_NUMERICAL
        assert out == ""

    def test_mu_equal_lambda_rejected(self, capsys):
        status, out = run(capsys, "verify", "--mu", "1", "--lambda", "1")
        assert status == cli.EXIT_USAGE
        assert out == ""

    def test_planted_coarse_grid_fails(self, capsys):
        status, out = run(capsys, "verify", "--mu", "1", "--lambda", "-2.5", "--n-points", "201",
                          "--half-width", "4", "--format", "csv")
        assert status == cli.EXIT_CHECK_FAILED
        rows = rows_of(out)
        assert any(r["passed"] == "false" for r in rows)
        assert len(rows) > 10


class TestSample:
    def test_v1_at_origin(self, capsys):
        status, out = run(capsys, "sample", "--object", "v1", "--mu", "1", "--lambda", "-2.5")
        assert status == cli.EXIT_OK
        assert value_at_origin(json.loads(out)) == pytest.approx(-6.75, abs=1e-12)

    def test_zero_mode_phase(self, capsys):
        status, out = run(capsys, "sample", "--object", "zero-mode", "--mu", "1", "--lambda", "-2.5")
        assert status == cli.EXIT_OK
        value = value_at_origin(json.loads(out))
        assert abs(value) == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-8)
        assert value / abs(value) == pytest.approx(cmath.exp(-1.25j * math.pi), abs=1e-12)

    def test_ground_state_peaks_at_origin(self, capsys):
        status, out = run(capsys, "sample", "--object", "psi2-n", "--n", "0", "--mu", "1", "--lambda", "-2.5")
        assert status == cli.EXIT_OK
        results = json.loads(out)["results"]
        peak = max(results, key=lambda r: abs(complex(r["re"], r["im"])))
        assert peak["x"] == 0.0

    def test_partner1_for_legendre_family(self, capsys):
        status, out = run(capsys, "sample", "--object", "psi1-n", "--n", "2", "--mu", "1", "--lambda", "-3.5",
                          "--n-points", "401")
        assert status == cli.EXIT_OK
        assert len(json.loads(out)["results"]) == 401

    def test_undefined_level(self, capsys):
        status, out = run(capsys, "sample", "--object", "psi1-n", "--n", "2", "--mu", "1", "--lambda", "-2.5")
        assert status == cli.EXIT_USAGE
        assert out == ""

    def test_csv_and_json_agree(self, capsys):
        args = ["sample", "--object", "zero-mode", "--mu", "1", "--lambda", "-2.5", "--n-points", "201"]
        _, as_json = run(capsys, *args)
        _, as_csv = run(capsys, *(args + ["--format", "csv"]))
        rows = rows_of(as_csv)
        results = json.loads(as_json)["results"]
        assert len(rows) == len(results) == 201
        for row, result in zip(rows, results):
            for key in cli.SAMPLE_COLUMNS:
                assert float(row[key]) == result[key]


class TestConfig:
    def test_file_then_flags(self, tmp_path, capsys):
        path = tmp_path / "run.config"
        path.write_text("# table run\nmu = 1\nlambda = -2.5\nn_points = 201\noutput_format = csv\n")
        status, out = run(capsys, "sample", "--object", "v2", "--config", str(path), "--format", "json")
        assert status == cli.EXIT_OK
        document = json.loads(out)
        config = {item["key"]: item["value"] for item in document["config"]}
        assert config["n_points"] == 201
        assert config["output_format"] == "json"
        assert config["half_width"] == 16.0

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "v1.csv"
        status, out = run(capsys, "sample", "--object", "v1", "--mu", "1", "--lambda", "-2.5",
                          "--n-points", "101", "--format", "csv", "--out", str(target))
        assert status == cli.EXIT_OK
        assert out == ""
        assert len(rows_of(target.read_text())) == 101

    def test_missing_parameters(self, capsys):
        status, _ = run(capsys, "spectrum", "--mu", "1")
        assert status == cli.EXIT_USAGE

    def test_even_point_count(self, capsys):
        status, _ = run(capsys, "spectrum", "--mu", "1", "--lambda", "-2.5", "--n-points", "400")
        assert status == cli.EXIT_USAGE

    def test_unknown_subcommand(self, capsys):
        assert cli.main(["plot"]) == cli.EXIT_USAGE

    def test_parse_errors(self):
        with pytest.raises(ConfigError):
            parse_config_text("mu 1")
        with pytest.raises(ConfigError):
            parse_config_text("nu = 1")
        with pytest.raises(ConfigError):
            parse_config_text("refine = maybe")
        with pytest.raises(ConfigError):
            parse_config_text("mu = nan")

    def test_parse_values(self):
        values = parse_config_text("mu=2\nlambda='-5'\nrefine=off  # fast\nallow_mu_eq_lambda=yes\n")
        assert values == {"mu": 2.0, "lam": -5.0, "refine": False, "allow_mu_eq_lambda": True}

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            build_config(str(tmp_path / "missing.config"))

    def test_flags_override_defaults(self):
        cfg = build_config(None, mu=1.0, lam=-2.5, refine=None)
        assert cfg == RunConfig(mu=1.0, lam=-2.5)
        assert cfg.grid().n_points == 4001
