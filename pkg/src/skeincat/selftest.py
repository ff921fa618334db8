"""The acceptance suite: eight criteria, each a callable returning a :class:`Criterion`.

Used by ``skeincat selftest`` and by the test-suite; every criterion reports
its worst residual or its counts next to the tolerance it is judged against.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .fusion_core import FusionData, check_hexagon, check_pentagon, load_category
from .hom_engine import (Morph, MorphismVector, basis, dual_morph, dual_word, engine, identity_residual,
                         pair_scalar, rotate_z)
from . import diagram_dsl as dsl
from . import surface_pipeline as sp
from . import trace_center as tc
from .karoubi import enumerate_simples

__all__ = ["Criterion", "CATALOG", "load_catalog", "CRITERIA", "run_all"]

CATALOG = ("vec", "vec_z2", "rep_z2", "fib", "ising")
EPS = 1e-9


def load_catalog(name: str) -> FusionData:
    text = resources.files("skeincat").joinpath("catalog", f"{name}.json").read_text()
    return load_category(text)


_LOADED: dict = {}


def _cat(name: str) -> FusionData:
    if name not in _LOADED:
        _LOADED[name] = load_catalog(name)
    return _LOADED[name]


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    tolerance: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bits = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] criterion {self.number}: {self.title} ({self.tolerance}) {bits}"

    def record(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": bool(self.passed),
                "tolerance": self.tolerance, "detail": {k: _rec(v) for k, v in self.detail.items()}}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.1e}"
    return str(v)


def _rec(v):
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.1e}")
    if isinstance(v, dict):
        return {str(k): _rec(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_rec(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def _words(data: FusionData, max_len: int = 3):
    out = []
    for n in range(1, max_len + 1):
        out.extend(itertools.product(range(data.rank), repeat=n))
    return out


def _random_endo(eng, w, rng) -> Morph:
    n = sum(eng.dim(w, k) ** 2 for k in range(eng.L))
    return Morph.from_vec(eng, w, w, rng.normal(size=n) + 1j * rng.normal(size=n))


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(rng: np.random.Generator) -> Criterion:
    """Pentagon/hexagon for the catalog; calculus lemmas on words of length <= 3 in fib and ising."""
    res = {"pentagon": 0.0, "hexagon": 0.0}
    for name in CATALOG:
        data = _cat(name)
        res["pentagon"] = max(res["pentagon"], check_pentagon(data).max_residual)
        if data.braided:
            res["hexagon"] = max(res["hexagon"], check_hexagon(data).max_residual)
    lem = {"summation": 0.0, "dashed_circle": 0.0, "pairing": 0.0, "sliding": 0.0, "z_cycle": 0.0}
    for name in ("fib", "ising"):
        data = _cat(name)
        eng = engine(data)
        norm = len(data.unit_components) * data.global_dim
        circ = dsl.dashed_circle(data)
        lem["dashed_circle"] = max(lem["dashed_circle"], circ.__mul__(1.0 / norm).dist(eng.identity(())))
        loops = sum(data.dim_left[i] * dsl.loop_value(data, i, clockwise=True) for i in range(data.rank))
        lem["dashed_circle"] = max(lem["dashed_circle"], abs(loops / norm - 1.0))
        for w in _words(data):
            for mode in ("R", "L"):
                lem["summation"] = max(lem["summation"], identity_residual(data, w, mode))
            B = basis(data, w)
            Bd = basis(data, dual_word(data, w))
            for phi in B:
                back = phi
                for _ in range(len(w)):
                    back = rotate_z(back)
                lem["z_cycle"] = max(lem["z_cycle"], float(np.max(np.abs(back.coeffs - phi.coeffs))))
                for psi in Bd:
                    lem["pairing"] = max(lem["pairing"], abs(pair_scalar(phi, psi) - pair_scalar(psi, phi)))
            if B and Bd:
                f = _random_endo(eng, w, rng)
                fs = dual_morph(f)
                for phi in B:
                    for psi in Bd:
                        a = pair_scalar(MorphismVector.from_morph(f @ phi.as_morph()), psi)
                        b = pair_scalar(phi, MorphismVector.from_morph(fs @ psi.as_morph()))
                        lem["pairing"] = max(lem["pairing"], abs(a - b))
            g = _random_endo(eng, w, rng)
            lem["sliding"] = max(lem["sliding"], dsl.sliding_residual(data, w, coupon=g))
    detail = {**res, **lem}
    return Criterion(1, "calculus suite", all(v < EPS for v in detail.values()), "residuals < 1e-9", detail)


def criterion_2(rng: np.random.Generator, trials: int = 100) -> Criterion:
    """Forward-then-back adjunction on random families of center morphisms into I(M2)."""
    worst = 0.0
    count = 0
    for name in ("fib", "ising"):
        data = _cat(name)
        eng = engine(data)
        obs = sp.base_objects(data)
        Zs = sp.center_objects(data)
        bases = sp.center_category(data).bases
        pairs = [(a, b) for a in range(len(obs)) for b in range(len(obs)) if bases[(a, b)]]
        for t in range(trials):
            a, b = pairs[t % len(pairs)]
            B = bases[(a, b)]
            c = rng.normal(size=len(B)) + 1j * rng.normal(size=len(B))
            phi = sum((x * m for x, m in zip(c, B)), eng.zero(Zs[a].host, Zs[b].host))
            _, r = tc.adjunction_roundtrip(Zs[a], phi, obs[b])
            worst = max(worst, r / max(1.0, phi.norm()))
            count += 1
    return Criterion(2, "center round-trip", worst < EPS, "residual < 1e-9",
                     {"families": count, "residual": worst})


def criterion_3(rng: np.random.Generator) -> Criterion:
    """P^2 = P and P_check o P_hat = id on every simple found by the pipelines."""
    worst = {"annulus_P2": 0.0, "annulus_split": 0.0, "htr_P2": 0.0, "htr_split": 0.0, "elliptic_P2": 0.0}
    objects = 0
    for name in CATALOG:
        data = _cat(name)
        chk = sp.annulus_projector_checks(data, rng)
        worst["annulus_P2"] = max(worst["annulus_P2"], chk["idempotency"])
        worst["annulus_split"] = max(worst["annulus_split"], chk["splitting"])
        worst["htr_P2"] = max(worst["htr_P2"], chk["htr_idempotency"])
        worst["htr_split"] = max(worst["htr_split"], chk["htr_splitting"])
        objects += chk["objects"]
        if data.braided:
            el = sp.elliptic_checks(data, rng)
            worst["elliptic_P2"] = max(worst["elliptic_P2"], el["projector_idempotency"])
            objects += el["objects"]
    return Criterion(3, "projector suite", all(v < EPS for v in worst.values()), "residual < 1e-9",
                     {"objects": objects, **worst})


EXPECTED_ANNULUS = {"vec": 1, "vec_z2": 4, "rep_z2": 4, "fib": 4, "ising": 9}


def criterion_4(rng: np.random.Generator) -> Criterion:
    counts, ok = {}, True
    for name in CATALOG:
        data = _cat(name)
        try:
            rt, rc = sp.tv_circle(data, rng)
            c = [rt.count, rc.count]
            if data.braided:
                at, ac = sp.cy_annulus(data, rng)
                c += [at.count, ac.count]
                ok &= at.diagnostics["unit_end_commutator"] < EPS
        except sp.RouteMismatch as e:
            counts[name] = str(e)
            ok = False
            continue
        counts[name] = c[0]
        ok &= all(x == EXPECTED_ANNULUS[name] for x in c)
    return Criterion(4, "trace route = center route (circle, annulus)", ok, "exact counts 1/4/4/4/9", counts)


EXPECTED_SPHERE = {"rep_z2": 2, "fib": 1, "ising": 1}


def criterion_5(rng: np.random.Generator) -> Criterion:
    detail, ok = {}, True
    for name, exp in EXPECTED_SPHERE.items():
        data = _cat(name)
        r = sp.cy_sphere(data, rng)
        mu = len(sp.muger_center(data))
        detail[name] = f"{r.count}/{mu}"
        ok &= r.count == mu == exp
        if name in ("fib", "ising"):
            ok &= r.end_dims == [1]
    return Criterion(5, "sphere sealing = Muger center", ok, "exact counts 2/1/1", detail)


def criterion_6(rng: np.random.Generator) -> Criterion:
    detail, ok = {}, True
    comm = 0.0
    for name in ("rep_z2", "fib", "ising"):
        data = _cat(name)
        rt, rc = sp.cy_punctured_torus(data, rng)
        for Z in sp.elliptic_objects(data):
            comm = max(comm, tc.comm_residual(Z.lam1, Z.lam2))
        if name in ("fib", "ising"):
            ok &= rt.count == rc.count == data.rank
        ok &= rt.diagnostics["unit_end_dim"] == rt.diagnostics["unit_end_fusion_count"]
        detail[name] = f"{rt.count}/{rc.count} End(1)={rt.diagnostics['unit_end_dim']}"
    detail["comm"] = comm
    ok &= comm < EPS
    return Criterion(6, "punctured torus and elliptic center", ok, "COMM < 1e-9, counts 2/3, End(1)=5 for fib", detail)


def criterion_7(rng: np.random.Generator) -> Criterion:
    detail, ok = {}, True
    for name in ("fib", "ising"):
        data = _cat(name)
        r = sp.cy_torus(data, rng)
        b = sp.boundary_count_check(data, rng)
        detail[name] = f"torus={r.count} boundary={b['counts']}"
        ok &= r.count == 1 and b["passed"]
    return Criterion(7, "closed torus and boundary counts", ok, "exact counts", detail)


def _pipeline_categories(data):
    cats = [sp.htr_category(data), sp.center_category(data), sp.disk_category(data)]
    if data.braided:
        cats += [sp.htr2_category(data), sp.elliptic_category(data)]
    return cats


def criterion_8(rng: np.random.Generator, seeds=range(5)) -> Criterion:
    worst_ratio, split, wed = 1.0, 0.0, 0.0
    counts = {}
    stable = True
    for name in CATALOG:
        data = _cat(name)
        for C in _pipeline_categories(data):
            per_seed = []
            for s in seeds:
                inv = enumerate_simples(C, np.random.default_rng(s))
                per_seed.append(inv.count)
                worst_ratio = min(worst_ratio, inv.radical)
                split = max(split, inv.diagnostics["split"])
                wed = max(wed, inv.diagnostics["wedderburn"])
            stable &= len(set(per_seed)) == 1
            counts[C.name] = per_seed[0]
    ok = stable and worst_ratio > EPS and split < EPS and wed == 0
    return Criterion(8, "semisimplicity and determinism", ok, "radical < 1e-9, 5 seeds",
                     {"trace_form_min": worst_ratio, "split": split, "wedderburn": wed, "stable": stable})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8]


def run_all(seed: int = 0, only=None) -> list[Criterion]:
    out = []
    for fn in CRITERIA:
        n = int(fn.__name__.rsplit("_", 1)[1])
        if only and n not in only:
            continue
        t = time.perf_counter()
        c = fn(np.random.default_rng(seed))
        c.seconds = time.perf_counter() - t
        out.append(c)
    return out
