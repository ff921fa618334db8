import json
from pathlib import Path

import numpy as np
import pytest

from skeincat import __version__
from skeincat.cli_io import catalog, catalog_names, load, main, run_command
from skeincat.fusion_core import CategoryError

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code, report = run_command(list(argv))
    out = capsys.readouterr()
    return code, report, out.out, out.err


def test_catalog_listing():
    assert catalog_names() == ["fib", "ising", "rep_z2", "vec", "vec_z2"]


@pytest.mark.parametrize("name, rank, braided", [("fib", 2, True), ("vec_z2", 2, False), ("ising", 3, True)])
def test_catalog_entries(name, rank, braided):
    data = catalog(name)
    assert (data.rank, data.braided) == (rank, braided)


def test_unknown_catalog_entry_lists_available():
    with pytest.raises(CategoryError, match="unknown catalog entry 'nope'; available: fib, ising, rep_z2, vec, vec_z2"):
        catalog("nope")


def test_load_accepts_paths_and_names():
    assert load(str(DATA / "z3_pivotal.json")).name == "z3_pivotal"
    assert load("fib").name == "fib"


def test_validate_catalog_entry(capsys):
    code, report, out, _ = run(capsys, "validate", "ising")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["passed"]
    assert [r["check"] for r in doc["records"]] == ["pentagon", "hexagon", "dimensions"]


def test_validate_broken_file_exits_1(capsys):
    code, report, out, err = run(capsys, "validate", str(DATA / "broken.json"))
    assert code == 1
    assert "pentagon residual" in err
    pent = json.loads(out)["records"][0]
    assert pent["check"] == "pentagon" and not pent["passed"] and pent["max_residual"] > 1e-3


@pytest.mark.parametrize("argv", [
    ["validate"],
    ["frobnicate", "fib"],
    ["surface", "fib", "klein_bottle"],
    ["validate", "nope"],
    ["validate", "/no/such/file.json"],
    ["center", "fib", "--route", "sideways"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, report, _, _ = run(capsys, *argv)
    assert code == 2
    assert report is None


def test_malformed_category_file_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{\"name\": \"x\"")
    code, _, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "malformed" in err


def test_center_vec_z2_both_routes(capsys):
    code, _, out, _ = run(capsys, "center", "vec_z2", "--route", "both")
    assert code == 0
    recs = json.loads(out)["records"]
    assert [r["route"] for r in recs] == ["trace", "center"]
    assert [r["simples"] for r in recs] == [4, 4]


@pytest.mark.parametrize("route", ["trace", "center"])
def test_center_single_route(capsys, route):
    code, _, out, _ = run(capsys, "center", "fib", "--route", route)
    assert code == 0
    assert json.loads(out)["records"][0]["simples"] == 4


def test_surface_fib_sphere(capsys):
    code, _, out, _ = run(capsys, "surface", "fib", "sphere")
    assert code == 0
    (rec,) = json.loads(out)["records"]
    assert rec["simples"] == 1 and rec["end_dims"] == [1]


def test_surface_needs_braiding(capsys):
    code, report, _, err = run(capsys, "surface", "vec_z2", "torus")
    assert code == 1
    assert "needs a braiding" in err


@pytest.mark.parametrize("tag, key", [("muger", "muger_center"), ("tv_circle", "simples"), ("disk", "simples")])
def test_surface_tags(capsys, tag, key):
    code, _, out, _ = run(capsys, "surface", "rep_z2", tag)
    assert code == 0
    assert key in json.loads(out)["records"][0]


def _coupon_file(tmp_path, coeffs):
    coupons = tmp_path / "c.json"
    coupons.write_text(json.dumps({"f": {"src": "tau tau", "tgt": "tau tau", "coeffs": coeffs}}))
    return str(coupons)


def test_eval_with_coupons(tmp_path, capsys):
    from skeincat import diagram_dsl as dsl
    from skeincat.hom_engine import Morph, engine

    data = catalog("fib")
    diagram = tmp_path / "d.txt"
    diagram.write_text("v(f) ; x(tau,tau)\n", encoding="utf-8")
    code, _, out, _ = run(capsys, "eval", "fib", str(diagram), "--coupons", _coupon_file(tmp_path, [[1, 0], [2, 0]]))
    assert code == 0
    value = json.loads(out)["records"][0]["value"]
    assert value["word"] == ["tau"] * 4
    f = Morph.from_vec(engine(data), ((1, 1),), ((1, 1),), np.array([1, 2], dtype=complex))
    expected = dsl.evaluate("v(f) ; x(tau,tau)", data, {"f": f}).value.coeffs
    np.testing.assert_allclose([complex(*c) for c in value["coeffs"]], expected, atol=1e-6)


def test_eval_coupon_with_wrong_length_exits_2(tmp_path, capsys):
    diagram = tmp_path / "d.txt"
    diagram.write_text("v(f)\n", encoding="utf-8")
    code, _, _, err = run(capsys, "eval", "fib", str(diagram), "--coupons", _coupon_file(tmp_path, [1, 0, 2]))
    assert code == 2
    assert "dimension 2, got 3" in err


def test_eval_loop(tmp_path, capsys):
    diagram = tmp_path / "loop.txt"
    diagram.write_text("coev(τ) ; ev'(τ)   # golden ratio\n", encoding="utf-8")
    code, _, out, _ = run(capsys, "eval", "fib", str(diagram))
    assert code == 0
    (re, im), = json.loads(out)["records"][0]["value"]["coeffs"]
    assert re == pytest.approx((1 + 5 ** 0.5) / 2, rel=1e-6) and im == 0


def test_eval_typecheck_failure_exits_1(tmp_path, capsys):
    diagram = tmp_path / "bad.txt"
    diagram.write_text("idw(sigma sigma) ; ev(psi)\n")
    code, _, out, _ = run(capsys, "eval", "ising", str(diagram))
    assert code == 1
    assert "typecheck" in json.loads(out)["records"][0]


def test_eval_parse_error_exits_1_with_position(tmp_path, capsys):
    diagram = tmp_path / "bad.txt"
    diagram.write_text("ev(tau")
    code, _, _, err = run(capsys, "eval", "fib", str(diagram))
    assert code == 1
    assert "line 1, column 7" in err


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, _, out, _ = run(capsys, "surface", "fib", "sphere", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["tool"] == "skeincat"


@pytest.mark.parametrize("argv", [
    ["surface", "fib", "sphere"],
    ["center", "vec_z2", "--route", "both"],
    ["surface", "ising", "annulus", "--seed", "3"],
])
def test_reports_are_byte_stable(capsys, argv):
    _, _, first, _ = run(capsys, *argv)
    _, _, second, _ = run(capsys, *argv)
    assert first == second
    assert first.endswith("\n")


def _mask_roundoff(v, floor=1e-12):
    if isinstance(v, dict):
        return {k: _mask_roundoff(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_mask_roundoff(x) for x in v]
    if isinstance(v, float) and abs(v) < floor:
        return 0.0
    return v


@pytest.mark.parametrize("golden, argv", [
    ("surface_fib_sphere.json", ["surface", "fib", "sphere"]),
    ("center_vec_z2_route_both.json", ["center", "vec_z2", "--route", "both"]),
    ("validate_ising.json", ["validate", "ising"]),
])
def test_golden_reports(capsys, golden, argv):
    _, _, out, _ = run(capsys, *argv)
    expected = json.loads((GOLDEN / golden).read_text())
    got = json.loads(out)
    assert got["version"] == expected["version"] == __version__
    assert _mask_roundoff(got) == _mask_roundoff(expected)


def test_selftest_subset(capsys):
    code, _, out, err = run(capsys, "selftest", "--only", "5")
    assert code == 0
    assert "[PASS] criterion 5" in err
    assert json.loads(out)["records"][0]["criterion"] == 5


def test_main_returns_exit_code(capsys):
    assert main(["validate", "vec"]) == 0
    capsys.readouterr()


def test_report_floats_are_rounded(capsys):
    _, _, out, _ = run(capsys, "validate", "fib")
    dims = json.loads(out)["records"][-1]["dim_left"]
    assert np.allclose([complex(*d) for d in dims], [1, (1 + 5 ** 0.5) / 2], atol=1e-5)
