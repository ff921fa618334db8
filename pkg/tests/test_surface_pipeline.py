import json

import numpy as np
import pytest

import oracles
from conftest import BRAIDED, CATALOG
from skeincat import surface_pipeline as sp
from skeincat.fusion_core import CategoryError

ANNULUS = {"vec": 1, "vec_z2": 4, "rep_z2": 4, "fib": 4, "ising": 9}
SPHERE = {"rep_z2": 2, "fib": 1, "ising": 1}
MODULAR = ("fib", "ising")


def annulus_oracle(data):
    """Independent count of simples of the center."""
    if data.rank == 1:
        return 1
    if all(len(data.channels(a, b)) == 1 for a in range(data.rank) for b in range(data.rank)):
        return oracles.brute_center_count(data)
    # modular: Z(A) = A boxtimes A^rev
    S = oracles.s_matrix(data, data.dim_left.real)
    assert abs(np.linalg.det(S)) > 1e-6
    return data.rank ** 2


@pytest.mark.parametrize("name", CATALOG)
def test_circle_routes_agree(cat, rng, name):
    data = cat(name)
    rt, rc = sp.tv_circle(data, rng)
    assert rt.count == rc.count == ANNULUS[name] == annulus_oracle(data)
    assert all(rt.diagnostics["route_agreement"].values())
    assert max(rt.diagnostics["composition"].values()) < 1e-9
    assert max(rc.diagnostics["composition"].values()) < 1e-9
    assert rt.end_dims == [1] * rt.count


@pytest.mark.parametrize("name", BRAIDED)
def test_annulus_routes_agree(cat, rng, name):
    data = cat(name)
    rt, rc = sp.cy_annulus(data, rng)
    assert rt.count == rc.count == ANNULUS[name]
    assert rt.diagnostics["unit_end_commutator"] < 1e-9
    assert sorted(map(tuple, rt.hom_table)) == sorted(map(tuple, rc.hom_table))


def test_braided_surfaces_need_braiding(cat, rng):
    data = cat("vec_z2")
    for fn in (sp.cy_annulus, sp.cy_sphere, sp.cy_punctured_torus, sp.cy_torus, sp.muger_center):
        with pytest.raises(CategoryError, match="braiding"):
            fn(data, rng) if fn is not sp.muger_center else fn(data)


@pytest.mark.parametrize("name", BRAIDED)
def test_muger_center_matches_s_matrix(cat, name):
    data = cat(name)
    assert sp.muger_center(data) == oracles.transparent_labels(data, data.dim_left.real)


@pytest.mark.parametrize("name", BRAIDED)
def test_sphere_is_muger_center(cat, rng, name):
    data = cat(name)
    res = sp.cy_sphere(data, rng)
    assert res.count == len(sp.muger_center(data)) == SPHERE[name]
    assert res.diagnostics["sealing"]["idempotency"] < 1e-9
    assert res.diagnostics["sealing"]["centrality"] < 1e-9
    if name in MODULAR:
        assert res.end_dims == [1]


@pytest.mark.parametrize("name", CATALOG)
def test_disk_is_the_category(cat, rng, name):
    data = cat(name)
    assert sp.cy_disk(data, rng).count == data.rank


@pytest.mark.parametrize("name, expected", [("rep_z2", 8), ("fib", 2), ("ising", 3)])
def test_punctured_torus_routes_agree(cat, rng, name, expected):
    data = cat(name)
    rt, rc = sp.cy_punctured_torus(data, rng)
    assert rt.count == rc.count == expected
    assert rt.diagnostics["unit_end_dim"] == rt.diagnostics["unit_end_fusion_count"]
    if name == "rep_z2":
        assert expected == oracles.brute_elliptic_count(data)
    else:
        assert expected == data.rank


def test_fib_unit_end_dimension(cat, rng):
    rt, _ = sp.cy_punctured_torus(cat("fib"), rng)
    assert rt.diagnostics["unit_end_dim"] == 5


@pytest.mark.parametrize("name", MODULAR)
def test_torus_collapses_for_modular(cat, rng, name):
    data = cat(name)
    res = sp.cy_torus(data, rng)
    assert res.count == 1
    assert res.end_dims == [1]
    assert res.diagnostics["wrap_policy"] == "commutator_over"


def test_wrong_wrap_policy_is_not_idempotent(cat, rng):
    with pytest.raises(CategoryError, match="not idempotent"):
        sp.cy_torus(cat("fib"), rng, policy="commutator_under")


def test_mirrored_wrap_policy_on_ising_still_collapses(cat, rng):
    """Ising does not distinguish the two wrap policies; fib is the discriminating case."""
    res = sp.cy_torus(cat("ising"), rng, policy="commutator_under")
    assert res.count == 1


@pytest.mark.parametrize("name, counts", [("fib", (2, 2, 1, 1)), ("ising", (3, 3, 1, 1))])
def test_boundary_counts(cat, rng, name, counts):
    chk = sp.boundary_count_check(cat(name), rng)
    assert chk["passed"]
    assert chk["counts"] == counts


@pytest.mark.parametrize("name", CATALOG)
def test_annulus_projectors(cat, rng, name):
    chk = sp.annulus_projector_checks(cat(name), rng)
    assert chk["objects"] == ANNULUS[name]
    for key in ("idempotency", "splitting", "intertwining", "htr_idempotency", "htr_splitting"):
        assert chk[key] < 1e-9, key


@pytest.mark.parametrize("name", ["rep_z2", "fib"])
def test_elliptic_checks(cat, rng, name):
    chk = sp.elliptic_checks(cat(name), rng)
    assert chk["comm"] < 1e-9
    assert chk["projector_idempotency"] < 1e-9
    assert chk["projector_forms"] < 1e-9
    assert chk["compression_mismatch"] == 0


def test_route_mismatch_is_an_error():
    a = sp.SurfaceResult("x", "trace", 2, [1, 1], [[1, 0], [0, 1]], [[1, 0]], [[1]])
    b = sp.SurfaceResult("x", "center", 1, [1], [[1]], [[1]], [[1]])
    with pytest.raises(sp.RouteMismatch, match="disagree"):
        sp._compare(a, b, "x")


def test_records_are_plain_json(cat, rng):
    rt, rc = sp.tv_circle(cat("fib"), rng)
    text = json.dumps(rt.record(), sort_keys=True)
    assert json.loads(text)["simples"] == 4


@pytest.mark.parametrize("name", ["vec_z2", "fib"])
def test_counts_do_not_depend_on_seed(cat, name):
    data = cat(name)
    counts = {sp.tv_circle(data, np.random.default_rng(s))[0].count for s in range(5)}
    assert counts == {ANNULUS[name]}
