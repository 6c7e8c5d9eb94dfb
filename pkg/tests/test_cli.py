import csv
import io
import json
import math
import subprocess
import sys

import pytest

from gaussgeom.cli import RunConfig, build_parser, run
from gaussgeom.errors import DomainError


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def invoke_json(*argv):
    code, text = invoke(*argv)
    report = json.loads(text)
    assert set(report) == {"command", "pass", "residuals", "details"}
    assert report["pass"] == (code == 0)
    return code, report


class TestFisher:
    def test_default_grid_passes(self):
        code, rep = invoke_json("fisher")
        assert code == 0
        assert rep["command"] == "fisher"
        assert rep["residuals"]["fisher_abs"] < 1e-10
        assert rep["details"]["grid"] == [10, 10]

    def test_small_sigma_still_passes(self):
        code, rep = invoke_json("fisher", "--sigma-min", "0.01")
        assert code == 0
        assert rep["residuals"]["fisher_scaled"] < 1e-10

    def test_low_order_fails(self):
        code, rep = invoke_json("fisher", "--order", "2")
        assert code == 1
        assert rep["residuals"]["cubic_scaled"] > 1e-9

    def test_bad_order(self):
        assert invoke("fisher", "--order", "0")[0] == 2
        assert invoke("fisher", "--order", "500")[0] == 2


class TestConnection:
    def test_alpha_one_fisher(self):
        code, rep = invoke_json("connection", "--alpha", "1", "--lambda", "1.41421356")
        assert code == 0
        e22 = rep["details"]["frame_table"]["nabla_e2 e2"]
        assert e22["e1"] == 0.0
        assert e22["e2"] == pytest.approx(-math.sqrt(2), abs=1e-7)
        assert rep["details"]["coordinate_table"]["Gamma^y_xx"] == 0.0

    def test_point_flags(self):
        code, rep = invoke_json("connection", "--alpha", "0", "--x", "2", "--y", "3")
        assert code == 0
        assert rep["details"]["coordinate_table"]["Gamma^y_yy"] == pytest.approx(-1 / 3)

    def test_bad_point(self):
        assert invoke("connection", "--y", "-1")[0] == 2


class TestVerify:
    def test_sweep(self):
        code, rep = invoke_json("verify", "--n-structures", "100", "--n-family", "20")
        assert code == 0
        assert rep["details"]["disagreements"] == 0
        assert rep["details"]["in_family_all_true"] == 20
        assert rep["details"]["off_family_all_false"] == 100

    def test_single_alpha(self):
        code, rep = invoke_json("verify", "--alpha", "0.3")
        assert code == 0
        d = rep["details"]
        assert d["alpha"] == pytest.approx(0.3, abs=1e-12)
        assert all(d[k] for k in ("cond1", "cond2", "cond3", "cond4", "cond5"))

    def test_perturbed(self):
        code, rep = invoke_json("verify", "--alpha", "0.3", "--perturb", "1e-3")
        assert code == 0  # all five agree, so the equivalence holds
        d = rep["details"]
        assert d["alpha"] is None
        assert not any(d[k] for k in ("cond1", "cond2", "cond3", "cond4", "cond5"))

    def test_deterministic(self):
        a = invoke("verify", "--n-structures", "20", "--n-family", "4", "--seed", "7")[1]
        b = invoke("verify", "--n-structures", "20", "--n-family", "4", "--seed", "7")[1]
        assert a == b


class TestCharacterize:
    def test_fisher_lambda(self):
        code, rep = invoke_json("characterize", "--lambda", "1.41421356")
        assert code == 0
        d = rep["details"]
        assert d["nullspace_dimension"] == 1
        assert d["generator"] == pytest.approx([0, 1, 0, 2], abs=1e-10)
        assert d["alpha_at_p1"] == pytest.approx(0.7071, abs=1e-4)

    def test_unit_lambda(self):
        code, rep = invoke_json("characterize", "--lambda", "1")
        assert code == 0
        assert rep["details"]["alpha_at_p1"] == 0.5

    @pytest.mark.parametrize("lam", ["0", "-1", "nan", "abc"])
    def test_bad_lambda(self, lam):
        assert invoke("characterize", "--lambda", lam)[0] == 2


class TestGeodesic:
    def test_vertical_csv(self):
        code, text = invoke("geodesic", "--alpha", "0")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == 1001
        assert {r["x"] for r in rows} == {"0.0"}
        assert text.endswith("\n")

    def test_json(self):
        code, rep = invoke_json("geodesic", "--alpha", "0", "--vx", "1", "--steps", "100", "--format", "json")
        assert code == 0
        assert rep["residuals"]["speed_squared_drift"] < 1e-10
        assert len(rep["details"]["trajectory"]) == 101

    def test_boundary_exit_code(self):
        code, _ = invoke("geodesic", "--alpha", "-1", "--vy", "-1", "--step", "0.01", "--steps", "400")
        assert code == 1

    def test_out_file(self, tmp_path):
        f = tmp_path / "traj.csv"
        code, text = invoke("geodesic", "--steps", "5", "--out", str(f))
        assert code == 0 and text == ""
        assert f.read_text().splitlines()[0] == "step,t,x,y,vx,vy"


class TestNatgrad:
    def test_bundled(self):
        code, rep = invoke_json("natgrad")
        assert code == 0
        d = rep["details"]
        assert d["n"] == 100
        assert d["converged"] and d["iterations"] <= 200
        assert rep["residuals"]["mle_error"] < 1e-8
        assert d["gradient_descent_iterations"] is None or d["gradient_descent_iterations"] > d["iterations"]

    def test_data_file(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("-1\n1\n")
        code, rep = invoke_json("natgrad", "--data", str(f), "--mu0", "0.5", "--sigma0", "2")
        assert code == 0
        assert rep["details"]["theta"] == pytest.approx([0, 1], abs=1e-9)

    def test_degenerate_data(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("3 3 3\n")
        assert invoke("natgrad", "--data", str(f))[0] == 1

    def test_too_few_points(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("3\n")
        assert invoke("natgrad", "--data", str(f))[0] == 2

    def test_csv_format(self):
        code, text = invoke("natgrad", "--format", "csv")
        assert code == 0
        assert text.splitlines()[0] == "key,value"


class TestUsage:
    def test_no_command(self):
        assert invoke()[0] == 2

    def test_unknown_flag(self):
        assert invoke("fisher", "--bogus")[0] == 2

    def test_bad_tolerance(self):
        assert invoke("verify", "--tol", "0")[0] == 2

    def test_run_config_validation(self):
        with pytest.raises(DomainError):
            RunConfig("fisher", lam=-1)
        with pytest.raises(DomainError):
            RunConfig("plot")
        assert RunConfig("verify").lam == pytest.approx(math.sqrt(2))

    def test_parser_lists_all_commands(self):
        text = build_parser().format_help()
        for c in ("fisher", "connection", "verify", "characterize", "geodesic", "natgrad"):
            assert c in text

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "gaussgeom", "characterize"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["pass"] is True
