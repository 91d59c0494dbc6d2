import csv
import io
import json
import math

import pytest

from hyperfill.cli import RunConfig, dumps_report, main, validate_report
from hyperfill.errors import InputError
from hyperfill.surfaces import equidistant_surface, write_surface_csv

QUICK_CURVE = ["--length", "2", "--dt", "2e-3"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    report = json.loads(out) if out else None
    if report is not None:
        validate_report(report["command"], report)
    return code, report, err


def test_curve_equidistant():
    code, rep, _ = run_json("curve-check", "--fixture", "equidistant", *QUICK_CURVE)
    assert code == 0
    assert abs(rep["max_kappa"] - 0.4621) < 1e-4
    assert abs(rep["quasi_constant"] - 1.1276) < 1e-4
    assert list(rep)[:3] == ["command", "fixture", "dt"]


def test_curve_geodesic():
    code, rep, _ = run_json("curve-check", "--fixture", "geodesic", *QUICK_CURVE)
    assert code == 0 and rep["lower_violation"] < 1e-9


def test_curve_horocycle_domain_error():
    code, _, err = run("curve-check", "--fixture", "horocycle", *QUICK_CURVE)
    assert code == 3 and "CurvatureTooLarge" in err
    code, rep, _ = run_json("curve-check", "--fixture", "horocycle", "--no-quasi", *QUICK_CURVE)
    assert code == 0 and rep["quasi_constant"] is None


def test_curve_tolerance_failure():
    code, rep, _ = run_json("curve-check", "--fixture", "equidistant", "--k", "1.05",
                            "--length", "20", "--dt", "1e-2")
    assert code == 1 and rep["passed"] is False and rep["lower_violation"] > 0.1


def test_curve_unknown_fixture():
    code, out, err = run("curve-check", "--fixture", "spiral")
    assert code == 2 and out == "" and "spiral" in err


def test_curve_seed_changes_perturbed_path():
    a = run("curve-check", "--fixture", "perturbed-geodesic", "--seed", "1", *QUICK_CURVE)[1]
    b = run("curve-check", "--fixture", "perturbed-geodesic", "--seed", "2", *QUICK_CURVE)[1]
    assert a != b


def test_curve_csv():
    code, out, _ = run("curve-check", "--fixture", "geodesic", "--format", "csv", *QUICK_CURVE)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["t", "kappa", "displacement", "distance_from_start"]
    assert len(rows) == 1 + 1001 - 2


@pytest.mark.parametrize("fixture,lam", [("horosphere", 1.0), ("equidistant", 0.2913)])
def test_surface_fixtures(fixture, lam):
    code, rep, _ = run_json("surface-check", "--fixture", fixture)
    assert code == 0 and rep["gauss_residual"] < 1e-3
    for key in ("lambda1_range", "lambda2_range"):
        assert all(abs(x - lam) < 1e-4 for x in rep[key])


def test_surface_certificates():
    _, rep, _ = run_json("surface-check", "--fixture", "geodesic-plane")
    assert abs(rep["certificate"]["quasi_constant"] - 1) < 1e-6
    _, rep, _ = run_json("surface-check", "--fixture", "horosphere")
    assert rep["certificate"]["quasi_constant"] == "none"


def test_surface_csv_input(tmp_path):
    p = tmp_path / "grid.csv"
    write_surface_csv(equidistant_surface(0.3, 2e-2, 0.2), p)
    code, rep, _ = run_json("surface-check", "--csv", str(p))
    assert code == 0 and rep["source"] == "csv"
    bad = tmp_path / "bad.csv"
    bad.write_text("nu,nv\nfive,5\n")
    assert run("surface-check", "--csv", str(bad))[0] == 2
    assert run("surface-check", "--csv", str(tmp_path / "missing.csv"))[0] == 2


def test_surface_tolerance_failure(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gauss_tol": 1e-12}))
    code, rep, _ = run_json("surface-check", "--fixture", "equidistant", "--config", str(cfg))
    assert code == 1 and rep["passed"] is False


def test_tube_examples(tmp_path):
    code, rep, _ = run_json("tube", "--l", "100")
    assert code == 0 and abs(rep["r0"] + 3.4605) < 1e-4
    assert rep["L_emp"] <= rep["L_formula"]
    code, rep, _ = run_json("tube", "--l", "min")
    assert code == 0 and rep["r0"] == -3.0
    code, _, err = run("tube", "--l", "50")
    assert code == 3 and "MeridianTooShort" in err


def test_tube_curve_csv(tmp_path):
    p = tmp_path / "k.csv"
    code, _, _ = run("tube", "--samples", "2000", "--csv", str(p), "--stride", "10")
    rows = list(csv.reader(p.open()))
    assert code == 0 and rows[0] == ["r", "k_ff", "k_gg", "k_fg"] and len(rows) == 201


def test_surgery_bundled():
    code, rep, _ = run_json("surgery")
    assert code == 0
    assert rep["filling"] == "M((3,-2),(1,-3),(-1,2),(1,3),(1,4),(1,5),(1,-5),(1,-5),(1,6),∞)"
    assert rep["slopes"][-1] is None and rep["normalized"][2] == [1, -2]


def test_surgery_params_and_constraint():
    code, rep, _ = run_json("surgery", "--param", "r5=11")
    assert code == 0 and rep["slopes"][8] == [1, 11]
    assert run("surgery", "--param", "r=0")[0] == 3
    assert run("surgery", "--param", "r5")[0] == 2
    assert run("surgery", "--param", "zz=1")[0] == 2


def test_surgery_script_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"cusps": 3, "moves": []}))
    code, rep, _ = run_json("surgery", str(p))
    assert code == 0 and rep["slopes"] == [[1, 0]] * 3
    p.write_text(json.dumps({"cusps": 3, "moves": [{"kind": "disk"}]}))
    assert run("surgery", str(p))[0] == 2


def test_genus():
    code, rep, _ = run_json("genus", "--p", "7", "--base", "torus", "--branch-points", "2")
    assert code == 0 and rep["genus"] == 7
    code, rep, _ = run_json("genus", "--p", "3", "--branch-points", "4", "--lk", "2")
    assert rep["genus"] == 2 and rep["components"] == 1
    assert run("genus", "--p", "3", "--base", "klein", "--branch-points", "4")[0] == 2


def test_triangle():
    assert run_json("triangle", "2", "3", "inf")[1]["geometry"] == "hyperbolic"
    assert run_json("triangle", "2", "3", "6")[1]["geometry"] == "euclidean"
    assert run_json("triangle", "2", "3", "5")[1]["geometry"] == "spherical"
    assert run("triangle", "2", "x", "5")[0] == 2


def test_argparse_errors_exit_2():
    assert run("no-such-command")[0] == 2
    assert run("tube", "--bump", "boxcar")[0] == 2


def test_out_file(tmp_path):
    p = tmp_path / "r.json"
    code, out, _ = run("triangle", "2", "3", "7", "--out", str(p))
    assert code == 0 and out == ""
    assert json.loads(p.read_text())["geometry"] == "hyperbolic"


def test_config_validation(tmp_path):
    with pytest.raises(InputError):
        RunConfig(dt=-1.0)
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run("triangle", "2", "3", "7", "--config", str(bad))[0] == 2


def test_float_formatting():
    text = dumps_report({"a": 1 / 3, "b": math.inf, "c": [2.0, 7]})
    assert json.loads(text) == {"a": 0.333333333333, "b": None, "c": [2.0, 7]}
