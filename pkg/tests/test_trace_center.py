import itertools

import numpy as np
import pytest

from conftest import BRAIDED, CATALOG
from skeincat import trace_center as tc
from skeincat.hom_engine import Morph, Obj, engine, hom_dim


def objects(data):
    return [Obj(((),))] + [Obj(((i,),)) for i in range(data.rank) if not data.is_unit(i)]


def random_htr(data, M1, M2, rng):
    n = tc.htr_dim(data, M1, M2)
    return tc.HtrMorphism.from_vec(data, M1, M2, rng.normal(size=n) + 1j * rng.normal(size=n))


@pytest.mark.parametrize("name", CATALOG)
def test_htr_dims_are_graded_hom_dims(cat, name):
    data = cat(name)
    for M1, M2 in itertools.product(objects(data), repeat=2):
        expected = sum(hom_dim(data, ((i,) + M1.words[0],), (M2.words[0] + (i,),)) for i in range(data.rank))
        assert tc.htr_dim(data, M1, M2) == expected


@pytest.mark.parametrize("name", ["vec_z2", "fib", "ising"])
def test_htr_composition_is_associative_and_unital(cat, name, rng):
    data = cat(name)
    obs = objects(data)
    for A, B, C_, D in itertools.islice(itertools.product(obs, repeat=4), 0, None, 3):
        if not all(tc.htr_dim(data, x, y) for x, y in ((A, B), (B, C_), (C_, D), (A, D))):
            continue
        f, g, h = random_htr(data, A, B, rng), random_htr(data, B, C_, rng), random_htr(data, C_, D, rng)
        lhs = tc.htr_compose(h, tc.htr_compose(g, f))
        rhs = tc.htr_compose(tc.htr_compose(h, g), f)
        assert lhs.dist(rhs) < 1e-9 * max(1.0, np.abs(lhs.vec()).max())
    for A, B in itertools.product(obs, repeat=2):
        if not tc.htr_dim(data, A, B):
            continue
        f = random_htr(data, A, B, rng)
        assert tc.htr_compose(tc.htr_identity(data, B), f).dist(f) < 1e-10
        assert tc.htr_compose(f, tc.htr_identity(data, A)).dist(f) < 1e-10


@pytest.mark.parametrize("name", CATALOG)
def test_induced_half_braiding_is_natural(cat, name, rng):
    data = cat(name)
    for M in objects(data):
        res = tc.halfbraiding_residuals(tc.induce(data, M), rng)
        assert res["naturality"] < 1e-9


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_splitting_form_differs_by_diagonal_gauge(cat, name):
    """Tree-built Gamma_X equals the dual-basis one rescaled by sqrt(d_j / d_i) on each summand."""
    data = cat(name)
    eng = engine(data)
    M = Obj(((),))
    Z = tc.induce(data, M)
    for k in range(data.rank):
        a = Z.gamma[k]
        b = tc.induced_gamma_splitting(data, M, (k,))
        for i, j in itertools.product(range(data.rank), repeat=2):
            va, vb = eng.component(a, i, j).vec(), eng.component(b, i, j).vec()
            scale = np.sqrt(data.dim_right[j] / data.dim_right[i])
            np.testing.assert_allclose(vb, scale * va, atol=1e-12)


@pytest.mark.parametrize("name", CATALOG)
def test_center_hom_dimensions_follow_adjunction(cat, name):
    """dim Hom_Z(I(M), I(N)) = dim Hom(M, (+)_i X_i N X_i*)."""
    data = cat(name)
    for M, N in itertools.product(objects(data), repeat=2):
        ZM, ZN = tc.induce(data, M), tc.induce(data, N)
        expected = sum(hom_dim(data, M.words, ((i,) + N.words[0] + (int(data.dual[i]),),))
                       for i in range(data.rank))
        assert len(tc.center_hom(ZM, ZN)) == expected


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_adjunction_round_trip(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    for M, N in itertools.product(objects(data), repeat=2):
        Z = tc.induce(data, M)
        B = tc.center_hom(Z, tc.induce(data, N))
        if not B:
            continue
        c = rng.normal(size=len(B)) + 1j * rng.normal(size=len(B))
        phi = sum((x * m for x, m in zip(c, B)), eng.zero(Z.host, tc.induce_host(data, N)))
        _, r = tc.adjunction_roundtrip(Z, phi, N)
        assert r < 1e-9 * max(1.0, phi.norm())


@pytest.mark.parametrize("name", CATALOG)
def test_projector_family_on_induced_objects(cat, name):
    data = cat(name)
    for M in objects(data):
        fam = tc.projector_family(tc.induce(data, M))
        assert fam.idempotency < 1e-9
        assert fam.intertwining < 1e-9


@pytest.mark.parametrize("name", BRAIDED)
def test_projector_family_on_braided_objects(cat, name):
    data = cat(name)
    for M in objects(data):
        fam = tc.projector_family(tc.trivial_center_object(data, M))
        assert fam.idempotency < 1e-9
        assert fam.splitting < 1e-9
        assert fam.intertwining < 1e-9


@pytest.mark.parametrize("name", CATALOG)
def test_htr_projector_family(cat, name):
    data = cat(name)
    for M in objects(data):
        fam = tc.htr_projector_family(data, M)
        assert fam.idempotency < 1e-9
        assert fam.splitting < 1e-9


@pytest.mark.parametrize("name", BRAIDED)
def test_elliptic_half_braidings_commute(cat, name):
    data = cat(name)
    for M in objects(data):
        Z = tc.induce_elliptic(data, M)
        assert tc.comm_residual(Z.lam1, Z.lam2) < 1e-9


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_elliptic_projector_forms_agree_and_are_idempotent(cat, name):
    data = cat(name)
    Z = tc.induce_elliptic(data, Obj(((),)))
    P1, P2 = tc.elliptic_projector(Z, 1), tc.elliptic_projector(Z, 2)
    assert P1.dist(P2) < 1e-9
    assert tc.htr2_compose(P1, P1).dist(P1) < 1e-9


@pytest.mark.parametrize("name", ["rep_z2", "fib", "ising"])
def test_puncture_loop_on_unit_is_idempotent(cat, name):
    data = cat(name)
    P = tc.puncture_loop(data, Obj(((),)))
    assert tc.htr2_compose(P, P).dist(P) < 1e-9


@pytest.mark.parametrize("name", BRAIDED)
def test_disk_seal_is_idempotent(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    for i in range(data.rank):
        w = ((i,),)
        n = len(eng.zero(w, w).vec())
        f = Morph.from_vec(eng, w, w, rng.normal(size=n))
        once = tc.disk_seal(data, f)
        assert tc.disk_seal(data, once).dist(once) < 1e-9


def test_split_idempotent(cat, rng):
    data = cat("ising")
    Z = tc.induce(data, Obj(((),)))
    fam = tc.projector_family(Z)
    host, iota, pi = tc.split_idempotent(data, fam.P)
    assert (pi @ iota).dist(engine(data).identity(host)) < 1e-10
    assert (iota @ pi).dist(fam.P) < 1e-10


def test_unknown_policies_rejected(cat):
    with pytest.raises(ValueError):
        tc.BimoduleSpec(left="sideways")
    with pytest.raises(ValueError):
        tc.gamma_from_braiding(cat("fib"), Obj(((),)), "G3")
    with pytest.raises(ValueError):
        tc.puncture_loop(cat("fib"), Obj(((),)), "commutator_sideways")
