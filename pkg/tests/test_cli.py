import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mubext import cli
from mubext.mub_catalog import fourier_matrix, save_hadamard


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSpectrum:
    def test_catalog_d6_m3(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--catalog", "d6-m3")
        assert code == 0
        doc = json.loads(out)
        assert [c["multiplicity"] for c in doc["clusters"]] == [9, 16, 11]
        assert doc["clusters"][1]["value"] == pytest.approx(0.25, abs=1e-12)
        assert doc["has_minus_one"] is True

    def test_group_z3_csv(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--group", "3", "--format", "csv")
        assert code == 0
        clusters = [r for r in rows(out) if r["kind"] == "cluster"]
        assert [(round(float(r["value"]), 12), int(r["multiplicity"])) for r in clusters] == [(-0.5, 4), (1, 5)]

    def test_bad_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run(capsys, "spectrum", "--file", str(bad))
        assert code == 2 and "line 1" in err

    def test_non_hadamard_file(self, capsys, tmp_path):
        p = tmp_path / "id.json"
        save_hadamard([[1, 0], [0, 1]], p)
        assert run(capsys, "spectrum", "--file", str(p))[0] == 2

    def test_good_file(self, capsys, tmp_path):
        p = tmp_path / "f5.json"
        save_hadamard(fourier_matrix(5), p, "mine")
        code, out, _ = run(capsys, "spectrum", "--file", str(p))
        assert code == 0 and json.loads(out)["label"] == "mine"

    def test_exactly_one_source(self, capsys):
        assert run(capsys, "spectrum")[0] == 2
        assert run(capsys, "spectrum", "--group", "3", "--catalog", "d6-m3")[0] == 2

    def test_missing_param(self, capsys):
        assert run(capsys, "spectrum", "--catalog", "d4-f4")[0] == 2

    def test_unknown_catalog(self, capsys):
        with pytest.raises(SystemExit) as ei:
            cli.main(["spectrum", "--catalog", "d9-x"])
        assert ei.value.code == 2

    def test_tolerance_flag_and_env(self, capsys, monkeypatch):
        # a huge clustering width merges everything into one cluster
        code, out, _ = run(capsys, "spectrum", "--group", "3", "--tol-cluster", "2")
        assert len(json.loads(out)["clusters"]) == 1
        monkeypatch.setenv("MUBEXT_TOL_CLUSTER", "2")
        code, out, _ = run(capsys, "spectrum", "--group", "3")
        assert len(json.loads(out)["clusters"]) == 1
        monkeypatch.setenv("MUBEXT_TOL_CLUSTER", "abc")
        assert run(capsys, "spectrum", "--group", "3")[0] == 2

    def test_numerical_failure_exit_3(self, capsys, monkeypatch):
        import mubext.numerics as nm

        monkeypatch.setattr(nm, "MAX_SWEEPS", 0)
        code, _, err = run(capsys, "spectrum", "--group", "3")
        assert code == 3 and "numerical failure" in err


class TestCertify:
    def test_z5_arc_oracle(self, capsys):
        code, out, _ = run(capsys, "certify", "--group", "5", "--arc-param", "0.5", "--oracle")
        doc = json.loads(out)
        assert code == 0 and doc["verdict"] == "extremal" and doc["oracle_agreement"] is True
        assert doc["gram_rank"] == 25

    def test_d7_m1(self, capsys):
        code, out, _ = run(capsys, "certify", "--catalog", "d7-m1", "--arc-param", "0.5")
        assert code == 1 and json.loads(out)["verdict"] == "not_extremal"

    def test_vertex(self, capsys):
        code, out, _ = run(capsys, "certify", "--group", "3", "--vertex")
        assert code == 0 and json.loads(out)["verdict"] == "extremal"
        code, out, _ = run(capsys, "certify", "--group", "4", "--vertex")
        assert code == 1

    def test_branch_b(self, capsys):
        code, out, _ = run(capsys, "certify", "--group", "5", "--arc-param", "-0.2", "--branch", "B", "--format", "csv")
        r = rows(out)[0]
        assert code == 0 and float(r["mu"]) == -0.2 and r["verdict"] == "extremal"

    def test_explicit_point(self, capsys):
        code, out, _ = run(capsys, "certify", "--group", "5", "--lambda", "1", "--mu", "0")
        assert code == 1 and json.loads(out)["verdict"] == "not_extremal"

    @pytest.mark.parametrize("lam,mu", [("0.3", "0.3"), ("1", "1"), ("2", "0")])
    def test_off_arc_is_input_error(self, capsys, lam, mu):
        code, _, err = run(capsys, "certify", "--group", "5", "--lambda", lam, "--mu", mu)
        assert code == 2 and "classification" in err

    def test_qubit(self, capsys):
        code, out, _ = run(capsys, "certify", "--group", "2", "--lambda", "0.6", "--mu", "0.8")
        doc = json.loads(out)
        assert code == 1 and doc["verdict"] == "not_extremal"
        assert doc["reasons"][1]["kind"] == "explicit-decomposition"
        assert run(capsys, "certify", "--group", "2", "--lambda", "0.9", "--mu", "0.9")[0] == 2

    def test_mode_errors(self, capsys):
        assert run(capsys, "certify", "--group", "5")[0] == 2
        assert run(capsys, "certify", "--group", "5", "--vertex", "--arc-param", "0.1")[0] == 2
        assert run(capsys, "certify", "--group", "5", "--lambda", "0.1")[0] == 2
        assert run(capsys, "certify", "--group", "5", "--arc-param", "3")[0] == 2
        assert run(capsys, "certify", "--group", "2", "--arc-param", "0.3")[0] == 2


class TestRegion:
    def test_d2_circle(self, capsys):
        code, out, _ = run(capsys, "region", "-d", "2", "--grid", "101")
        assert code == 0
        pts = rows(out)
        assert len([r for r in pts if r["kind"] == "grid"]) == 101 * 101
        for r in pts:
            if r["classification"] == "on_gamma_arc":
                assert abs(float(r["lambda"]) ** 2 + float(r["mu"]) ** 2 - 1) <= 1e-9

    def test_d5_endpoints_and_vertex(self, capsys):
        code, out, _ = run(capsys, "region", "-d", "5", "--grid", "5")
        arc = [(float(r["lambda"]), float(r["mu"])) for r in rows(out) if r["kind"] == "arc"]
        assert arc[0] == pytest.approx((0.75, -0.25), abs=1e-15)
        assert arc[-1] == pytest.approx((-0.25, 0.75), abs=1e-15)
        vertex = [r for r in rows(out) if r["kind"] == "vertex"]
        assert len(vertex) == 1 and float(vertex[0]["lambda"]) == float(vertex[0]["mu"]) == -0.25

    def test_bad_grid(self, capsys):
        assert run(capsys, "region", "-d", "5", "--grid", "1")[0] == 2
        assert run(capsys, "region", "-d", "1")[0] == 2

    def test_json(self, capsys):
        code, out, _ = run(capsys, "region", "-d", "3", "--grid", "3", "--format", "json")
        doc = json.loads(out)
        assert doc["d"] == 3 and {"kind", "lambda", "mu", "classification"} == set(doc["points"][0])

    def test_deterministic_files(self, tmp_path):
        outs = []
        for i in range(2):
            p = tmp_path / f"r{i}.csv"
            assert cli.main(["region", "-d", "7", "--grid", "21", "--out", str(p)]) == 0
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(capsys, "region", "-d", "4", "--grid", "4")
        values = [r["lambda"] for r in rows(out)]
        assert format(-1 / 3, ".17g") in values
        for v in values:
            assert float(format(float(v), ".17g")) == float(v)


class TestTable1:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "table1")
        assert code == 0
        r = rows(out)
        assert len(r) == 22 and all(x["status"] == "pass" for x in r)

    def test_quartic_residuals_json(self, capsys):
        code, out, _ = run(capsys, "table1", "--format", "json")
        (entry,) = [e for e in json.loads(out) if e["entry"] == "d7-m1"]
        assert code == 0 and len(entry["quartic_residuals"]) == 4
        assert max(abs(r) for r in entry["quartic_residuals"]) < 1e-6

    def test_mismatch_exit_1(self, capsys, monkeypatch):
        import mubext.table1 as t1

        monkeypatch.setattr(t1, "D6_M3", [(-1.0, 9), (0.3, 16), (1.0, 11)])
        code, out, err = run(capsys, "table1", "--format", "json")
        assert code == 1 and "d6-m3" in err
        failing = [e for e in json.loads(out) if not e["passed"]]
        assert [e["entry"] for e in failing] == ["d6-m3"]


class TestFourierSweep:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "fourier-sweep")
        assert code == 0
        r = {x["group"]: x for x in rows(out)}
        assert [x for x in r] == [f"Z{n}" for n in range(2, 11)] + ["Z2xZ2", "Z2xZ2xZ2", "Z2xZ4", "Z3xZ3"]
        assert all(x["agree"] == "True" for x in r.values())
        assert r["Z2xZ2"]["has_minus_one"] == "True"
        assert r["Z3xZ3"]["has_minus_one"] == "False"

    def test_custom_groups(self, capsys):
        code, out, _ = run(capsys, "fourier-sweep", "--max-order", "6", "--groups", "2,3;3,3", "--format", "json")
        doc = json.loads(out)
        # Z3xZ3 has order 9 and is filtered out by --max-order
        assert code == 0 and [g["group"] for g in doc][-2:] == ["Z6", "Z2xZ3"]
        assert all(g["agree"] for g in doc)

    def test_bad_max_order(self, capsys):
        assert run(capsys, "fourier-sweep", "--max-order", "1")[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mubext.cli", "spectrum", "--group", "2", "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "kind,value,multiplicity"
