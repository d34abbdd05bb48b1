import csv
import io
import json

import numpy as np
import pytest

from she_moments.cli import main
from she_moments.gaussian import heat_kernel
from she_moments.kernels import mgf_local_time


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture()
def lebesgue_file(tmp_path):
    path = tmp_path / "leb.json"
    path.write_text(json.dumps({"type": "lebesgue", "scale": 1.0}))
    return str(path)


@pytest.fixture()
def delta_file(tmp_path):
    path = tmp_path / "delta.json"
    path.write_text(json.dumps({"type": "atoms", "atoms": [[0.0, 1.0]]}))
    return str(path)


class TestKernelCommand:
    def test_zero_coupling_column_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "kernel", "--which", "K", "--t", "1",
                               "--nu", "1", "--lambda", "0", "--x", "-2:2:5")
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 5
        assert all(float(r["value"]) == 0.0 for r in rows)

    def test_csv_is_crlf(self, capsys):
        _, out, _ = run_cli(capsys, "kernel", "--which", "H", "--t", "1")
        assert "\r\n" in out

    def test_kstar_zero_coupling_is_heat_product(self, capsys):
        code, out, _ = run_cli(capsys, "kernel", "--which", "Kstar", "--t", "1",
                               "--nu", "1", "--lambda", "0",
                               "--z1", "-1:1:3", "--z2", "0.5", "--y", "0.3")
        assert code == 0
        for row in parse_csv(out):
            want = heat_kernel(1.0, float(row["z1"]), 1.0) \
                * heat_kernel(1.0, float(row["z2"]), 1.0)
            assert float(row["value"]) == pytest.approx(want, rel=1e-12)

    def test_reference_value(self, capsys):
        code, out, _ = run_cli(capsys, "kernel", "--which", "K", "--t", "1",
                               "--nu", "1", "--lambda", "1", "--x", "0")
        assert code == 0
        assert float(parse_csv(out)[0]["value"]) == \
            pytest.approx(0.43453030592364549, rel=1e-12)


class TestTwoPointCommand:
    def test_delta_both_methods_agree(self, capsys, delta_file):
        code, out, _ = run_cli(capsys, "two-point", "--measure", delta_file,
                               "--t", "1", "--x1", "0", "--x2", "1",
                               "--method", "both")
        assert code == 0
        row = parse_csv(out)[0]
        assert float(row["rel_diff"]) < 1e-8

    def test_lebesgue_closed_value(self, capsys, lebesgue_file):
        code, out, _ = run_cli(capsys, "two-point", "--measure", lebesgue_file,
                               "--t", "1", "--x1", "0", "--x2", "1",
                               "--method", "closed")
        assert code == 0
        assert float(parse_csv(out)[0]["value"]) == \
            pytest.approx(1.2993006608844514, rel=1e-12)

    def test_second_moment_matches_two_point_diagonal(self, capsys,
                                                      lebesgue_file):
        _, out1, _ = run_cli(capsys, "second-moment", "--measure",
                             lebesgue_file, "--t", "1", "--x", "0.5")
        _, out2, _ = run_cli(capsys, "two-point", "--measure", lebesgue_file,
                             "--t", "1", "--x1", "0.5", "--x2", "0.5")
        assert float(parse_csv(out1)[0]["value"]) == \
            float(parse_csv(out2)[0]["value"])

    def test_unknown_measure_type_exit_4(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"type": "weird"}))
        code, _, err = run_cli(capsys, "two-point", "--measure", str(bad),
                               "--t", "1", "--x1", "0", "--x2", "0")
        assert code == 4
        assert "inadmissible" in err

    def test_missing_file_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "two-point", "--measure", "/nope.json",
                             "--t", "1", "--x1", "0", "--x2", "0")
        assert code == 2

    def test_domain_error_exit_3(self, capsys, lebesgue_file):
        code, _, _ = run_cli(capsys, "two-point", "--measure", lebesgue_file,
                             "--t", "-1", "--x1", "0", "--x2", "0")
        assert code == 3


class TestVerifyCommand:
    def test_laplace_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "laplace")
        assert code == 0
        report = json.loads(out)
        assert report["all_pass"] is True
        assert all(c["status"] == "pass" for c in report["checks"])

    def test_local_time_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "local-time")
        assert code == 0

    def test_unknown_suite_exit_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--suite", "everything"])
        assert info.value.code == 2

    def test_json_keys_sorted(self, capsys):
        _, out, _ = run_cli(capsys, "verify", "--suite", "laplace")
        report = json.loads(out)
        assert list(report.keys()) == sorted(report.keys())


class TestSimulateCommand:
    @pytest.fixture()
    def fk_config(self, tmp_path):
        path = tmp_path / "fk.json"
        path.write_text(json.dumps({
            "t": 1.0, "x1": 0.0, "x2": 0.0, "nu": 1.0, "lambda": 1.0,
            "u0": {"kind": "constant", "value": 1.0},
            "mc": {"n_paths": 20000, "seed": 3, "batch_size": 4096}}))
        return str(path)

    def test_fk_with_oracle(self, capsys, fk_config, tmp_path):
        out_file = tmp_path / "out.json"
        code, _, _ = run_cli(capsys, "simulate", "--engine", "fk",
                             "--config", fk_config, "--oracle",
                             "--out", str(out_file))
        assert code == 0
        result = json.loads(out_file.read_text())
        assert abs(result["oracle"]["z_score"]) <= 4.0
        assert result["n"] == 20000
        assert result["manifest"]["library_version"]

    def test_rerun_identical_minus_timestamp(self, capsys, fk_config,
                                             tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(capsys, "simulate", "--engine", "fk", "--config", fk_config,
                "--out", str(f1))
        run_cli(capsys, "simulate", "--engine", "fk", "--config", fk_config,
                "--workers", "4", "--out", str(f2))
        a, b = json.loads(f1.read_text()), json.loads(f2.read_text())
        for d in (a, b):
            d["manifest"].pop("timestamp")
            d["config_echo"]["mc"].pop("workers")
            d["manifest"]["config_echo"]["mc"].pop("workers")
        assert a == b

    def test_rerun_from_manifest(self, capsys, fk_config, tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(capsys, "simulate", "--engine", "fk", "--config", fk_config,
                "--out", str(f1))
        code, _, _ = run_cli(capsys, "simulate", "--from-manifest", str(f1),
                             "--out", str(f2))
        assert code == 0
        a, b = json.loads(f1.read_text()), json.loads(f2.read_text())
        assert a["value"] == b["value"]
        assert a["std_error"] == b["std_error"]

    def test_spde_zero_coupling(self, capsys, tmp_path):
        cfg = tmp_path / "spde.json"
        cfg.write_text(json.dumps({
            "t": 0.1, "x1": 0.0, "x2": 0.0, "nu": 1.0,
            "measure": {"type": "lebesgue", "scale": 1.0},
            "rho": {"kind": "zero"},
            "grid": {"L": 2.2, "dx": 0.05, "dt": 0.00125,
                     "boundary": "neumann0"},
            "mc": {"n_paths": 8, "seed": 0}}))
        out_file = tmp_path / "out.json"
        code, _, _ = run_cli(capsys, "simulate", "--engine", "spde",
                             "--config", str(cfg), "--out", str(out_file))
        assert code == 0
        result = json.loads(out_file.read_text())
        assert result["value"] == 1.0
        assert result["std_error"] == 0.0

    def test_cfl_violation_exit_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({
            "t": 0.1, "nu": 1.0,
            "measure": {"type": "lebesgue", "scale": 1.0},
            "rho": {"kind": "zero"},
            "grid": {"L": 2.2, "dx": 0.05, "dt": 0.01},
            "mc": {"n_paths": 4, "seed": 0}}))
        code, _, _ = run_cli(capsys, "simulate", "--engine", "spde",
                             "--config", str(cfg))
        assert code == 2

    def test_oracle_requires_linear_rho(self, capsys, tmp_path):
        cfg = tmp_path / "clip.json"
        cfg.write_text(json.dumps({
            "t": 0.1, "nu": 1.0,
            "measure": {"type": "lebesgue", "scale": 1.0},
            "rho": {"kind": "zero"},
            "grid": {"L": 2.2, "dx": 0.05, "dt": 0.00125},
            "mc": {"n_paths": 4, "seed": 0}}))
        code, _, _ = run_cli(capsys, "simulate", "--engine", "spde",
                             "--config", str(cfg), "--oracle")
        assert code == 2


class TestLocalTimeCommand:
    def test_mgf_value(self, capsys):
        code, out, _ = run_cli(capsys, "local-time", "mgf", "--t", "1",
                               "--a", "0", "--lambda", "1")
        assert code == 0
        assert float(parse_csv(out)[0]["value"]) == \
            pytest.approx(mgf_local_time(1.0, 0.0, 1.0), rel=1e-14)

    def test_density_table(self, capsys):
        code, out, _ = run_cli(capsys, "local-time", "density", "--t", "1",
                               "--a", "0", "--y", "-1:1:3", "--v", "0.5:1:2")
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 6
        law_val = (1.5 / np.sqrt(2 * np.pi)) * np.exp(-1.5 ** 2 / 2)
        match = [r for r in rows if r["y"] == "1.0" and r["v"] == "0.5"]
        assert float(match[0]["f"]) == pytest.approx(law_val, rel=1e-12)

    def test_sample_dump(self, capsys):
        code, out, _ = run_cli(capsys, "local-time", "sample", "--t", "1",
                               "--a", "1", "--n", "100", "--seed", "1")
        assert code == 0
        rows = parse_csv(out)
        assert len(rows) == 100
        assert all(float(r["v"]) >= 0.0 for r in rows)

    def test_sample_zero_n_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "local-time", "sample", "--t", "1",
                             "--a", "1", "--n", "0")
        assert code == 2
