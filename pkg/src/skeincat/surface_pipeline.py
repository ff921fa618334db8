"""Surface-level computations assembled from traces, centers and Karoubi splitting.

Every surface is computed along two independent routes where the theory
offers two (trace vs. center), and the routes are compared on simple counts,
object-level hom dimensions and multiplicity tables.  Sealing a puncture is
implemented as compression by a central idempotent family ``Pi_A`` (the
dashed loop pushed in from the puncture) on a presented category.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fusion_core import CategoryError, FusionData
from .hom_engine import Morph, Obj, engine
from .karoubi import (PresentedCategory, SimpleInventory, enumerate_simples, present,
                      same_up_to_columns)
from . import trace_center as tc

__all__ = [
    "SurfaceResult", "RouteMismatch", "SealingOperator", "base_objects", "htr_category", "center_category",
    "disk_category", "htr2_category", "elliptic_category", "seal_presented", "tv_circle", "cy_annulus",
    "muger_center", "seal_puncture", "cy_sphere", "cy_punctured_torus", "elliptic_checks", "cy_torus",
    "boundary_count_check", "annulus_projector_checks", "WRAP_POLICY", "COMPOSE_CHIRALITY",
]

#: crossing convention for double-trace composition (strands of the first factor pass over)
COMPOSE_CHIRALITY = 1
#: puncture loop for the torus, paired with COMPOSE_CHIRALITY
WRAP_POLICY = "commutator_over"


class RouteMismatch(CategoryError):
    """Trace and center routes disagree: an engine bug, never averaged away."""


@dataclass
class SurfaceResult:
    surface: str
    route: str
    count: int
    end_dims: list
    hom_table: list
    multiplicities: list
    object_homs: list
    diagnostics: dict = field(default_factory=dict)

    def record(self) -> dict:
        return {
            "surface": self.surface, "route": self.route, "simples": self.count,
            "end_dims": list(map(int, self.end_dims)),
            "hom_table": [list(map(int, r)) for r in self.hom_table],
            "multiplicities": [list(map(int, r)) for r in self.multiplicities],
            "object_homs": [list(map(int, r)) for r in self.object_homs],
            "diagnostics": {k: _clean(v) for k, v in sorted(self.diagnostics.items())},
        }


def _clean(v):
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.3e}")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _result(surface: str, route: str, C: PresentedCategory, inv: SimpleInventory, diag: dict) -> SurfaceResult:
    obj_homs = [[C.dims[(a, b)] for b in C.objects] for a in C.objects]
    d = dict(diag)
    d.update({"radical_min": inv.radical, "wedderburn": inv.diagnostics["wedderburn"],
              "split": inv.diagnostics["split"]})
    return SurfaceResult(surface, route, inv.count, inv.end_dims, inv.hom_table.tolist(),
                         inv.multiplicities.tolist(), obj_homs, d)


# ---------------------------------------------------------------------------
# caches
# ---------------------------------------------------------------------------

_CACHE: dict = {}


def _cached(data: FusionData, key: str, build: Callable):
    k = (id(data), key)
    if k not in _CACHE:
        _CACHE[k] = (data, build())
    return _CACHE[k][1]


def base_objects(data: FusionData) -> list[Obj]:
    """The unit (empty word) followed by the non-unit simples, as one-word objects."""
    out = [Obj(((),))]
    for a in range(data.rank):
        if not data.is_unit(a):
            out.append(Obj(((a,),)))
    return out


def _coords_from(vectors: list[np.ndarray]):
    """Least-squares coordinates against a fixed list of vectors."""
    if not vectors:
        return lambda v: np.zeros(0, dtype=complex)
    B = np.array(vectors).T
    pinv = np.linalg.pinv(B)
    return lambda v: pinv @ v


# ---------------------------------------------------------------------------
# presented categories
# ---------------------------------------------------------------------------

def htr_category(data: FusionData) -> PresentedCategory:
    """htr_A(A) on the base objects (annulus / circle, trace route)."""
    def build():
        obs = base_objects(data)
        idx = list(range(len(obs)))
        return present(
            idx,
            basis=lambda a, b: tc.htr_hom(data, obs[a], obs[b]),
            compose=lambda g, f: tc.htr_compose(g, f),
            coords=lambda a, b, m: m.vec(),
            unit=lambda a: tc.htr_identity(data, obs[a]),
            name=f"htr({data.name})")
    return _cached(data, "htr", build)


def _center_like(data, hosts, hom_fn, name):
    eng = engine(data)
    bases, coords = {}, {}
    for a in range(len(hosts)):
        for b in range(len(hosts)):
            B = hom_fn(hosts[a], hosts[b])
            bases[(a, b)] = B
            coords[(a, b)] = _coords_from([m.vec() for m in B])
    C = present(
        list(range(len(hosts))),
        basis=lambda a, b: bases[(a, b)],
        compose=lambda g, f: g @ f,
        coords=lambda a, b, m: coords[(a, b)](m.vec()),
        unit=lambda a: eng.identity(hosts[a].host),
        name=name)
    C.bases = bases  # concrete morphisms behind the coordinates
    return C


def center_objects(data: FusionData) -> list:
    return _cached(data, "center_objects", lambda: [tc.induce(data, M) for M in base_objects(data)])


def center_category(data: FusionData) -> PresentedCategory:
    """Intertwiner route on the induced objects I(M)."""
    return _cached(data, "center", lambda: _center_like(
        data, center_objects(data), tc.center_hom, f"Z({data.name})"))


def disk_category(data: FusionData) -> PresentedCategory:
    """The disk: A itself on the base objects, with plain composition."""
    def build():
        eng = engine(data)
        obs = base_objects(data)

        def basis(a, b):
            n = sum(eng.dim(obs[a], k) * eng.dim(obs[b], k) for k in range(data.rank))
            return [Morph.from_vec(eng, obs[a], obs[b], e) for e in np.eye(n, dtype=complex)]

        return present(list(range(len(obs))), basis=basis, compose=lambda g, f: g @ f,
                       coords=lambda a, b, m: m.vec(), unit=lambda a: eng.identity(obs[a]),
                       name=f"disk({data.name})")
    return _cached(data, "disk", build)


def htr2_category(data: FusionData, chirality: int = COMPOSE_CHIRALITY) -> PresentedCategory:
    """Double trace htr_A(htr_A(A)) on the base objects (punctured torus, trace route)."""
    def build():
        obs = base_objects(data)
        return present(
            list(range(len(obs))),
            basis=lambda a, b: tc.htr2_hom(data, obs[a], obs[b]),
            compose=lambda g, f: tc.htr2_compose(g, f, chirality),
            coords=lambda a, b, m: m.vec(),
            unit=lambda a: tc.htr2_identity(data, obs[a]),
            name=f"htr2({data.name})")
    return _cached(data, f"htr2/{chirality}", build)


def elliptic_objects(data: FusionData) -> list:
    return _cached(data, "elliptic_objects", lambda: [tc.induce_elliptic(data, M) for M in base_objects(data)])


def elliptic_category(data: FusionData) -> PresentedCategory:
    """Elliptic route: I^el(M) with homs intertwining both half-braidings."""
    return _cached(data, "elliptic", lambda: _center_like(
        data, elliptic_objects(data), tc.elliptic_hom, f"Zel({data.name})"))


# ---------------------------------------------------------------------------
# sealing
# ---------------------------------------------------------------------------

@dataclass
class SealingOperator:
    """Central idempotent family Pi_a (coordinates in End(a)) and its action diagnostics."""

    policy: str
    pi: dict
    idempotency: float = 0.0
    centrality: float = 0.0

    def record(self) -> dict:
        return {"policy": self.policy, "idempotency": float(f"{self.idempotency:.3e}"),
                "centrality": float(f"{self.centrality:.3e}")}


def _action_matrix(C: PresentedCategory, pi_b: np.ndarray, a, b) -> np.ndarray:
    """Matrix of g |-> Pi_b o g on Hom(a, b)."""
    T = C.T[(a, b, b)]
    return np.einsum("rst,s->rt", T, pi_b) if T.size else np.zeros((C.dims[(a, b)],) * 2, dtype=complex)


def _right_action_matrix(C: PresentedCategory, pi_a: np.ndarray, a, b) -> np.ndarray:
    T = C.T[(a, a, b)]
    return np.einsum("rst,t->rs", T, pi_a) if T.size else np.zeros((C.dims[(a, b)],) * 2, dtype=complex)


def seal_presented(C: PresentedCategory, op: SealingOperator) -> PresentedCategory:
    """Replace every hom space by the image of the Pi-action; constants restricted accordingly."""
    Q = {}
    idem, cent = 0.0, 0.0
    for a in C.objects:
        for b in C.objects:
            n = C.dims[(a, b)]
            if n == 0:
                Q[(a, b)] = np.zeros((0, 0), dtype=complex)
                continue
            S = _action_matrix(C, op.pi[b], a, b)
            Sr = _right_action_matrix(C, op.pi[a], a, b)
            idem = max(idem, float(np.max(np.abs(S @ S - S))))
            cent = max(cent, float(np.max(np.abs(S - Sr))))
            U, s, _ = np.linalg.svd(S)
            r = int(np.sum(s > C.eps * max(s[0], 1.0))) if s.size else 0
            Q[(a, b)] = U[:, :r]
    op.idempotency, op.centrality = idem, cent
    if idem > C.eps * 1e3:
        raise CategoryError(f"pi-action is not idempotent (residual {idem:.3e}); wrong wrap policy")
    dims = {k: v.shape[1] for k, v in Q.items()}
    T = {}
    for a, b, c in itertools.product(C.objects, repeat=3):
        Tabc = C.T[(a, b, c)]
        if dims[(a, b)] and dims[(b, c)] and dims[(a, c)]:
            T[(a, b, c)] = np.einsum("ri,rst,sj,tk->ijk", Q[(a, c)].conj(), Tabc, Q[(b, c)], Q[(a, b)])
        else:
            T[(a, b, c)] = np.zeros((dims[(a, c)], dims[(b, c)], dims[(a, b)]), dtype=complex)
    unit = {a: Q[(a, a)].conj().T @ op.pi[a] if dims[(a, a)] else np.zeros(0, dtype=complex)
            for a in C.objects}
    return PresentedCategory(list(C.objects), dims, T, unit, name=f"sealed({C.name})", eps=C.eps)


def _disk_operator(data: FusionData, policy: str) -> SealingOperator:
    eng = engine(data)
    pi = {}
    for a, M in enumerate(base_objects(data)):
        pi[a] = tc.disk_seal(data, eng.identity(M), policy).vec()
    return SealingOperator(policy, pi)


def _torus_operator(data: FusionData, policy: str) -> SealingOperator:
    pi = {a: tc.puncture_loop(data, M, policy).vec() for a, M in enumerate(base_objects(data))}
    return SealingOperator(policy, pi)


def seal_puncture(C: PresentedCategory, op: SealingOperator) -> PresentedCategory:
    """Sealed category: Hom = image of the pi-action (raises if the action is not idempotent)."""
    return seal_presented(C, op)


# ---------------------------------------------------------------------------
# surfaces
# ---------------------------------------------------------------------------

def _compare(res_a: SurfaceResult, res_b: SurfaceResult, what: str) -> dict:
    agree = {
        "counts": res_a.count == res_b.count,
        "hom_tables": sorted(map(tuple, res_a.hom_table)) == sorted(map(tuple, res_b.hom_table)),
        "object_homs": res_a.object_homs == res_b.object_homs,
        "multiplicities": same_up_to_columns(np.array(res_a.multiplicities), np.array(res_b.multiplicities)),
    }
    if not all(agree.values()):
        raise RouteMismatch(f"{what}: trace and center routes disagree: {agree}")
    return agree


def _two_routes(data, surface, rng, trace_cat, center_cat):
    Ct, Cc = trace_cat(data), center_cat(data)
    vt, vc = Ct.validate(rng), Cc.validate(rng)
    inv_t, inv_c = enumerate_simples(Ct, rng), enumerate_simples(Cc, rng)
    rt = _result(surface, "trace", Ct, inv_t, {"composition": vt})
    rc = _result(surface, "center", Cc, inv_c, {"composition": vc})
    agree = _compare(rt, rc, surface)
    rt.diagnostics["route_agreement"] = agree
    rc.diagnostics["route_agreement"] = agree
    return rt, rc, inv_c


def tv_circle(data: FusionData, rng: np.random.Generator) -> tuple[SurfaceResult, SurfaceResult]:
    """Circle in Turaev-Viro theory: Kar(htr_A(A)) vs. the intertwiner center."""
    rt, rc, _ = _two_routes(data, "tv_circle", rng, htr_category, center_category)
    return rt, rc


def cy_annulus(data: FusionData, rng: np.random.Generator) -> tuple[SurfaceResult, SurfaceResult]:
    """Annulus in Crane-Yetter theory; also checks End_htr(1) is commutative."""
    if not data.braided:
        raise CategoryError("braiding required but absent")
    rt, rc, _ = _two_routes(data, "annulus", rng, htr_category, center_category)
    C = htr_category(data)
    T = C.T[(0, 0, 0)]
    rt.diagnostics["unit_end_commutator"] = float(np.max(np.abs(T - T.transpose(0, 2, 1)))) if T.size else 0.0
    return rt, rc


def muger_center(data: FusionData, eps: float = 1e-9) -> list[int]:
    """Labels whose monodromy with every simple is the identity."""
    if not data.braided:
        raise CategoryError("braiding required but absent")
    eng = engine(data)
    out = []
    for i in range(data.rank):
        ok = True
        for j in range(data.rank):
            mono = eng.braid((j,), (i,)) @ eng.braid((i,), (j,))
            if mono.dist(eng.identity((i, j))) > eps:
                ok = False
                break
        if ok:
            out.append(i)
    return out


def cy_sphere(data: FusionData, rng: np.random.Generator, policy: str = "monodromy") -> SurfaceResult:
    """Sphere = disk with its puncture sealed by the monodromy loop."""
    if not data.braided:
        raise CategoryError("braiding required but absent")
    C = disk_category(data)
    op = _disk_operator(data, policy)
    S = seal_puncture(C, op)
    inv = enumerate_simples(S, rng)
    res = _result("sphere", "sealing", S, inv, {"sealing": op.record(), "composition": S.validate(rng)})
    res.diagnostics["transparent"] = len(muger_center(data))
    return res


def cy_disk(data: FusionData, rng: np.random.Generator) -> SurfaceResult:
    C = disk_category(data)
    inv = enumerate_simples(C, rng)
    return _result("disk", "trace", C, inv, {})


def cy_punctured_torus(data: FusionData, rng: np.random.Generator) -> tuple[SurfaceResult, SurfaceResult]:
    """Once-punctured torus: double trace vs. elliptic center."""
    if not data.braided:
        raise CategoryError("braiding required but absent")
    rt, rc, _ = _two_routes(data, "punctured_torus", rng, htr2_category, elliptic_category)
    eng = engine(data)
    # fusion-ring count sum_{i,j} dim Hom(X_i X_j A, A X_j X_i) on the unit
    ring = sum(eng.dim(Obj(((i, j),)), k) * eng.dim(Obj(((j, i),)), k)
               for i in range(data.rank) for j in range(data.rank) for k in range(data.rank))
    rt.diagnostics["unit_end_fusion_count"] = int(ring)
    rt.diagnostics["unit_end_dim"] = int(htr2_category(data).dims[(0, 0)])
    return rt, rc


def cy_torus(data: FusionData, rng: np.random.Generator, policy: str = WRAP_POLICY) -> SurfaceResult:
    """Closed torus: the double-trace category with the puncture loop sealed."""
    if not data.braided:
        raise CategoryError("braiding required but absent")
    C = htr2_category(data)
    op = _torus_operator(data, policy)
    S = seal_puncture(C, op)
    inv = enumerate_simples(S, rng)
    return _result("torus", "sealing", S, inv, {"sealing": op.record(), "composition": S.validate(rng),
                                                   "wrap_policy": policy,
                                                   "compose_chirality": COMPOSE_CHIRALITY})


def elliptic_checks(data: FusionData, rng: np.random.Generator) -> dict:
    """COMM, elliptic projector idempotency, equality of its two forms, and compression dims."""
    C = elliptic_category(data)
    inv = enumerate_simples(C, rng)
    objs = elliptic_objects(data)
    eng = engine(data)
    out = {"comm": 0.0, "projector_idempotency": 0.0, "projector_forms": 0.0,
           "compression_mismatch": 0, "objects": inv.count}
    for s in inv.simples:
        Z = objs[s.host]
        B = C.bases[(s.host, s.host)]
        p = sum((c * m for c, m in zip(s.p, B)), eng.zero(Z.host, Z.host))
        Y = tc.restrict_elliptic(Z, p)
        out["comm"] = max(out["comm"], tc.comm_residual(Y.lam1, Y.lam2))
        P1 = tc.elliptic_projector(Y, 1)
        P2 = tc.elliptic_projector(Y, 2)
        out["projector_forms"] = max(out["projector_forms"], P1.dist(P2))
        PP = tc.htr2_compose(P1, P1, COMPOSE_CHIRALITY)
        out["projector_idempotency"] = max(out["projector_idempotency"], PP.dist(P1))
        # compression: dim of P End_htr2(A) P equals dim End_Zel(A, l1, l2)
        endY = len(tc.elliptic_hom(Y, Y))
        comp = _compressed_dim(data, P1, Y.host, rng, endY + 3)
        if comp != endY:
            out["compression_mismatch"] += 1
    return out


def _compressed_dim(data, P: tc.Htr2Morphism, host: Obj, rng: np.random.Generator, probe: int) -> int:
    """Dimension of P End_htr2(host) P, from the images of ``probe`` random elements.

    The images of random elements span the compressed space almost surely as
    long as ``probe`` exceeds its dimension; a full rank result therefore only
    certifies a lower bound, and callers probe with a margin.
    """
    n = tc.htr2_dim(data, host, host)
    cols = []
    for _ in range(probe):
        g = tc.Htr2Morphism.from_vec(data, host, host, rng.normal(size=n) + 1j * rng.normal(size=n))
        cols.append(tc.htr2_compose(P, tc.htr2_compose(g, P, COMPOSE_CHIRALITY), COMPOSE_CHIRALITY).vec())
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.sum(s > 1e-9 * max(s[0], 1.0))) if s.size else 0


def annulus_projector_checks(data: FusionData, rng: np.random.Generator) -> dict:
    """Projector identities on every simple found in the center route."""
    C = center_category(data)
    inv = enumerate_simples(C, rng)
    objs = center_objects(data)
    eng = engine(data)
    out = {"idempotency": 0.0, "splitting": 0.0, "intertwining": 0.0,
           "htr_idempotency": 0.0, "htr_splitting": 0.0, "objects": inv.count}
    for s in inv.simples:
        Z = objs[s.host]
        B = C.bases[(s.host, s.host)]
        p = sum((c * m for c, m in zip(s.p, B)), eng.zero(Z.host, Z.host))
        Y = tc.restrict_center_object(Z, p)
        pf = tc.projector_family(Y)
        hp = tc.htr_projector_family(data, Y.host)
        out["idempotency"] = max(out["idempotency"], pf.idempotency)
        out["splitting"] = max(out["splitting"], pf.splitting)
        out["intertwining"] = max(out["intertwining"], pf.intertwining)
        out["htr_idempotency"] = max(out["htr_idempotency"], hp.idempotency)
        out["htr_splitting"] = max(out["htr_splitting"], hp.splitting)
    return out


def boundary_count_check(data: FusionData, rng: np.random.Generator) -> dict:
    """(disk, punctured torus, sphere, torus) simple counts against (|Irr|, |Irr|, 1, 1)."""
    disk = cy_disk(data, rng).count
    if data.braided:
        pt = cy_punctured_torus(data, rng)[0].count
        sph = cy_sphere(data, rng).count
        tor = cy_torus(data, rng).count
    else:
        pt = sph = tor = None
    counts = (disk, pt, sph, tor)
    expected = (data.rank, data.rank, 1, 1)
    return {"counts": counts, "expected": expected, "passed": counts == expected}
