import itertools

import numpy as np
import pytest

from conftest import BRAIDED, CATALOG
from skeincat.fusion_core import CategoryError
from skeincat.hom_engine import (Morph, MorphismVector, basis, bend, dual_bases, dual_morph, dual_word,
                                 engine, gram, hom_dim, identity_residual, pair_scalar, parse_word,
                                 rotate_z, tensor, unbend)


def words(data, max_len=3):
    for n in range(1, max_len + 1):
        yield from itertools.product(range(data.rank), repeat=n)


def random_morph(eng, src, tgt, rng):
    n = len(eng.zero(src, tgt).vec())
    return Morph.from_vec(eng, src, tgt, rng.normal(size=n) + 1j * rng.normal(size=n))


def brute_hom_dim(data, w1, w2):
    """Count fusion paths through matching intermediate simples."""
    def paths(w):
        counts = np.zeros(data.rank, dtype=int)
        for path in itertools.product(range(data.rank), repeat=len(w)):
            ok, cur = True, data.unit_components[0]
            for a, nxt in zip(w, path):
                if not data.fusion[cur, a, nxt]:
                    ok = False
                    break
                cur = nxt
            if ok:
                counts[path[-1] if path else cur] += 1
        return counts
    return int(paths(w1) @ paths(w2)) if w1 and w2 else None


@pytest.mark.parametrize("name", CATALOG)
def test_hom_dims_match_path_counting(cat, name):
    data = cat(name)
    eng = engine(data)
    for w1 in words(data, 2):
        for w2 in words(data, 2):
            d = hom_dim(data, (w1,), (w2,))
            assert d == brute_hom_dim(data, w1, w2)
            assert d == len(eng.zero((w1,), (w2,)).vec())


@pytest.mark.parametrize("name", CATALOG)
@pytest.mark.parametrize("mode", ["R", "L", "tree"])
def test_summation_lemma(cat, name, mode):
    data = cat(name)
    worst = max(identity_residual(data, w, mode) for w in words(data))
    assert worst < 1e-9


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_rotation_has_order_word_length(cat, name):
    data = cat(name)
    for w in words(data):
        for phi in basis(data, w):
            back = phi
            for _ in range(len(w)):
                back = rotate_z(back)
            np.testing.assert_allclose(back.coeffs, phi.coeffs, atol=1e-9)


def test_rotate_z_on_words_of_length_one_is_trivial(cat):
    data = cat("fib")
    (phi,) = basis(data, (0,))
    assert rotate_z(phi) is phi


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_pairing_symmetric(cat, name):
    data = cat(name)
    for w in words(data):
        for phi in basis(data, w):
            for psi in basis(data, dual_word(data, w)):
                assert abs(pair_scalar(phi, psi) - pair_scalar(psi, phi)) < 1e-9


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_pairing_adjoint(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    for w in words(data, 2):
        B, Bd = basis(data, w), basis(data, dual_word(data, w))
        if not B:
            continue
        f = random_morph(eng, (w,), (w,), rng)
        fs = dual_morph(f)
        for phi, psi in itertools.product(B, Bd):
            a = pair_scalar(MorphismVector.from_morph(f @ phi.as_morph()), psi)
            b = pair_scalar(phi, MorphismVector.from_morph(fs @ psi.as_morph()))
            assert abs(a - b) < 1e-9


@pytest.mark.parametrize("name", CATALOG)
def test_gram_matrices_are_well_conditioned(cat, name):
    data = cat(name)
    for w in words(data):
        for l in data.unit_components:
            if basis(data, w, l):
                assert np.linalg.cond(gram(data, w, l)) < 1e6


@pytest.mark.parametrize("name", ["fib", "ising"])
def test_dual_bases_are_dual(cat, name):
    data = cat(name)
    for w in words(data, 2):
        for _, B1, B2 in dual_bases(data, w):
            M = np.array([[pair_scalar(a, b) for b in B2] for a in B1])
            np.testing.assert_allclose(M, np.eye(len(B1)), atol=1e-12)


@pytest.mark.parametrize("name", CATALOG)
def test_zigzag_identities(cat, name):
    data = cat(name)
    eng = engine(data)
    for a in range(data.rank):
        ad = int(data.dual[a])
        left = tensor(eng.identity((a,)), eng.ev(a)) @ tensor(eng.coev(a), eng.identity((a,))).retarget(src=((a,),))
        assert left.retarget(src=((a,),), tgt=((a,),)).dist(eng.identity((a,))) < 1e-12
        right = tensor(eng.ev_r(a), eng.identity((ad,))).retarget() @ \
            tensor(eng.identity((ad,)), eng.coev(a)).retarget(src=((ad,),))
        assert right.retarget(src=((ad,),), tgt=((ad,),)).dist(eng.identity((ad,))) < 1e-12


@pytest.mark.parametrize("name", CATALOG)
def test_bend_unbend_inverse(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    for w1, w2 in itertools.product(list(words(data, 2)), repeat=2):
        if not hom_dim(data, (w1,), (w2,)):
            continue
        f = random_morph(eng, (w1,), (w2,), rng)
        assert unbend(bend(f), w1).dist(f) < 1e-10


@pytest.mark.parametrize("name", CATALOG)
def test_tensor_is_associative_and_functorial(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    ws = list(words(data, 1))
    for a, b, c in itertools.product(ws, repeat=3):
        f, g, h = (random_morph(eng, (x,), (x,), rng) for x in (a, b, c))
        lhs = tensor(tensor(f, g), h)
        rhs = tensor(f, tensor(g, h))
        assert lhs.dist(rhs.retarget(src=lhs.src, tgt=lhs.tgt)) < 1e-10
        f2, g2 = random_morph(eng, (a,), (a,), rng), random_morph(eng, (b,), (b,), rng)
        assert tensor(f2 @ f, g2 @ g).dist(tensor(f2, g2) @ tensor(f, g)) < 1e-10


@pytest.mark.parametrize("name", BRAIDED)
def test_braiding_inverse_and_naturality(cat, name, rng):
    data = cat(name)
    eng = engine(data)
    for v, w in itertools.product(list(words(data, 2)), repeat=2):
        c = eng.braid((v,), (w,))
        ci = eng.braid((w,), (v,), inverse=True)
        assert (ci @ c).dist(eng.identity((v + w,))) < 1e-10
        f = random_morph(eng, (v,), (v,), rng)
        g = random_morph(eng, (w,), (w,), rng)
        lhs = c @ tensor(f, g)
        rhs = tensor(g, f) @ c
        assert lhs.dist(rhs) < 1e-10


@pytest.mark.parametrize("name", BRAIDED)
def test_braid_hexagon_on_words(cat, name):
    """c_{U, VW} = (id_V (x) c_{U,W}) o (c_{U,V} (x) id_W) as morphisms."""
    data = cat(name)
    eng = engine(data)
    for u, v, w in itertools.product(range(data.rank), repeat=3):
        lhs = eng.braid(((u,),), ((v, w),))
        rhs = tensor(eng.identity((v,)), eng.braid((u,), (w,))) @ tensor(eng.braid((u,), (v,)), eng.identity((w,)))
        assert lhs.dist(rhs.retarget(src=lhs.src, tgt=lhs.tgt)) < 1e-10


def test_crossing_needs_braiding(cat):
    with pytest.raises(CategoryError):
        engine(cat("vec_z2")).braid((1,), (1,))


@pytest.mark.parametrize("spec, expected", [
    ("tau tau", (1, 1)), (["tau", "1"], (1, 0)), ("tau* tau", (1, 1)), ("", ()),
])
def test_parse_word(cat, spec, expected):
    assert parse_word(cat("fib"), spec) == expected


def test_parse_word_unknown_label(cat):
    with pytest.raises(CategoryError, match="unknown label"):
        parse_word(cat("fib"), "tau sigma")


def test_composition_type_mismatch(cat):
    eng = engine(cat("fib"))
    with pytest.raises(CategoryError):
        eng.identity((1,)) @ eng.identity((1, 1))
