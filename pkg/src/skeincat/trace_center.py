"""Horizontal traces and centers of the regular bimodule (and its braided variants).

Everything is expressed with the block morphisms of :mod:`skeincat.hom_engine`.

* ``htr``: hom spaces ``Hom_htr(M1, M2) = (+)_i Hom(X_i M1, M2 X_i)``; a
  morphism in ``ihom_X`` for an arbitrary word X is reduced to this form by
  :func:`htr_project`, which resolves ``id_X`` through simples with
  right-dimension weights.
* centers: objects ``(M, gamma)`` with ``gamma_k : X_k M -> M X_k`` given on
  simples and extended multiplicatively; :func:`induce` builds
  ``I(M) = (+)_i X_i M X_i*`` with its induced half-braiding, and
  :func:`center_hom` solves the intertwiner equations.
* the elliptic data ``(Gamma1, Gamma2)`` on ``(+)_{i,j} X_i X_j M X_j* X_i*``
  and the commutation relation between two half-braidings.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fusion_core import CategoryError, FusionData
from .hom_engine import (HomEngine, Morph, Obj, as_obj, dual_bases, dual_word, engine,
                         resolve_identity, tensor)

__all__ = [
    "BimoduleSpec", "HtrMorphism", "htr_hom", "htr_project", "htr_compose", "htr_identity",
    "CenterObject", "induce", "center_hom", "adjunction_forward", "adjunction_backward",
    "adjunction_roundtrip", "projector_family", "htr_projector_family",
    "gamma_from_braiding", "comm_residual", "halfbraiding_residuals", "null_space",
    "induce_host", "induced_gamma", "induced_gamma_splitting", "vertex_pairs", "trivial_center_object",
    "intertwiner_equations", "split_idempotent", "restrict_center_object", "ProjectorFamily",
    "HtrProjectorFamily", "htr_dim", "htr_from_plain", "Htr2Morphism", "htr2_dim", "htr2_hom",
    "htr2_project", "htr2_compose", "htr2_identity", "EllipticObject", "induce_elliptic", "elliptic_hom",
    "restrict_elliptic", "elliptic_projector", "elliptic_host", "monodromy_loop", "disk_seal",
    "puncture_loop",
]


def null_space(A: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of ker A, rank decided relative to the largest singular value."""
    n = A.shape[1]
    if A.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > max(eps * smax, 1e-13)))
    return vh[rank:].conj().T


# ---------------------------------------------------------------------------
# bimodule descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BimoduleSpec:
    """The regular A-bimodule, optionally with braided actions.

    ``left`` / ``right`` say how an acting strand passes the strands already
    present: ``plain`` (concatenation), ``over`` or ``under`` (through the
    braiding).  Only the plain spec is needed for the annulus; the braided
    policies are used for the punctured-torus constructions.
    """

    left: str = "plain"
    right: str = "plain"

    def __post_init__(self):
        for p in (self.left, self.right):
            if p not in ("plain", "over", "under"):
                raise ValueError(f"unknown action policy {p!r}")


# ---------------------------------------------------------------------------
# horizontal trace
# ---------------------------------------------------------------------------

@dataclass
class HtrMorphism:
    """Element of (+)_i Hom(X_i M1, M2 X_i)."""

    data: FusionData
    src: Obj
    tgt: Obj
    comps: dict  # label -> Morph

    def vec(self) -> np.ndarray:
        eng = engine(self.data)
        parts = []
        for i in range(self.data.rank):
            m = self.comps.get(i)
            if m is None:
                m = eng.zero(eng.tensor_obj((i,), self.src), eng.tensor_obj(self.tgt, (i,)))
            parts.append(m.vec())
        return np.concatenate(parts)

    @classmethod
    def from_vec(cls, data: FusionData, src, tgt, v: np.ndarray) -> "HtrMorphism":
        eng = engine(data)
        src, tgt = as_obj(src), as_obj(tgt)
        comps, o = {}, 0
        for i in range(data.rank):
            s, t = eng.tensor_obj((i,), src), eng.tensor_obj(tgt, (i,))
            n = sum(eng.dim(s, k) * eng.dim(t, k) for k in range(data.rank))
            comps[i] = Morph.from_vec(eng, s, t, v[o:o + n])
            o += n
        return cls(data, src, tgt, comps)

    def __add__(self, other):
        return HtrMorphism.from_vec(self.data, self.src, self.tgt, self.vec() + other.vec())

    def __mul__(self, c):
        return HtrMorphism.from_vec(self.data, self.src, self.tgt, c * self.vec())

    __rmul__ = __mul__

    def dist(self, other) -> float:
        d = self.vec() - other.vec()
        return float(np.max(np.abs(d))) if d.size else 0.0


def htr_dim(data: FusionData, M1, M2) -> int:
    eng = engine(data)
    M1, M2 = as_obj(M1), as_obj(M2)
    return sum(eng.dim(eng.tensor_obj((i,), M1), k) * eng.dim(eng.tensor_obj(M2, (i,)), k)
               for i in range(data.rank) for k in range(data.rank))


def htr_hom(data: FusionData, M1, M2) -> list[HtrMorphism]:
    """Graded basis of (+)_i ihom_{X_i}(M1, M2): elementary block matrices."""
    M1, M2 = as_obj(M1), as_obj(M2)
    n = htr_dim(data, M1, M2)
    return [HtrMorphism.from_vec(data, M1, M2, e) for e in np.eye(n, dtype=complex)]


def _resolve_obj(data: FusionData, X, mode: str):
    """resolve_identity for a direct sum: terms with inclusions/projections folded in."""
    eng = engine(data)
    X = as_obj(X)
    if len(X) == 1:
        return resolve_identity(data, X.words[0], mode)
    out = []
    for s, w in enumerate(X):
        inc, pro = eng.inclusion(X, s), eng.projection(X, s)
        for i, c, top, bot in resolve_identity(data, w, mode):
            out.append((i, c, inc @ top, bot @ pro))
    return out


def htr_project(data: FusionData, psi: Morph, X, M1, M2, mode: str = "R") -> HtrMorphism:
    """Class of psi in Hom(X M1, M2 X) as an element of (+)_i ihom_{X_i}(M1, M2).

    Component i is  sum_alpha c_i (id_M2 (x) bottom_alpha) o psi o (top_alpha (x) id_M1)
    where ``top``/``bottom`` resolve id_X through X_i (right-dimension
    weights and dual bases for ``mode="R"``).
    """
    eng = engine(data)
    X, M1, M2 = as_obj(X), as_obj(M1), as_obj(M2)
    comps = {}
    for i, c, top, bot in _resolve_obj(data, X, mode):
        term = tensor(eng.identity(M2), bot) @ psi @ tensor(top, eng.identity(M1))
        term = term * c
        comps[i] = comps[i] + term if i in comps else term
    for i in range(data.rank):
        if i not in comps:
            comps[i] = eng.zero(eng.tensor_obj((i,), M1), eng.tensor_obj(M2, (i,)))
    return HtrMorphism(data, M1, M2, comps)


def htr_compose(psi: HtrMorphism, phi: HtrMorphism, mode: str = "R") -> HtrMorphism:
    """psi o phi: (psi_j (x) id_i) o (id_j (x) phi_i) in ihom_{X_j X_i}, then reprojected."""
    if psi.src != phi.tgt:
        raise CategoryError("htr_compose: object mismatch")
    data = psi.data
    eng = engine(data)
    total = None
    for j, pj in psi.comps.items():
        if not any(b.size and np.any(b) for b in pj.blocks):
            continue
        for i, pi in phi.comps.items():
            if not any(b.size and np.any(b) for b in pi.blocks):
                continue
            comp = tensor(pj, eng.identity((i,))) @ tensor(eng.identity((j,)), pi)
            proj = htr_project(data, comp, (j, i), phi.src, psi.tgt, mode)
            total = proj if total is None else total + proj
    if total is None:
        return HtrMorphism.from_vec(data, phi.src, psi.tgt, np.zeros(htr_dim(data, phi.src, psi.tgt), dtype=complex))
    return total


def htr_identity(data: FusionData, M) -> HtrMorphism:
    """Image of id_M under the inclusion functor M -> htr(M)."""
    eng = engine(data)
    M = as_obj(M)
    return htr_project(data, eng.identity(M), (), M, M)


def htr_from_plain(data: FusionData, f: Morph) -> HtrMorphism:
    """Image of a plain morphism f : M1 -> M2 under the inclusion functor."""
    return htr_project(data, f, (), f.src, f.tgt)


# ---------------------------------------------------------------------------
# centers
# ---------------------------------------------------------------------------

@dataclass
class CenterObject:
    """A host object with a half-braiding given on simples: gamma[k] : X_k M -> M X_k."""

    data: FusionData
    host: Obj
    gamma: dict
    name: str = ""

    def gamma_word(self, Y: Sequence[int]) -> Morph:
        """Half-braiding on a word, extended multiplicatively."""
        eng = engine(self.data)
        Y = tuple(Y)
        if not Y:
            return eng.identity(self.host)
        if len(Y) == 1:
            return self.gamma[Y[0]]
        head, rest = Y[:1], Y[1:]
        # Y M -> head M rest -> M head rest
        step1 = tensor(eng.identity(head), self.gamma_word(rest))
        step2 = tensor(self.gamma[head[0]], eng.identity(rest))
        return step2 @ step1


def _pivotal_word(data: FusionData, w) -> complex:
    return complex(np.prod([data.pivotal[a] for a in w])) if len(w) else 1.0


def vertex_pairs(data: FusionData, X: tuple, i: int, j: int):
    """Dual-basis vertex pairs for the induced half-braiding.

    Returns a list of (L, R) with ``L : X X_i -> X_j`` bent from
    phi_alpha in <X_i*, X*, X_j> and ``R : X_i* -> X_j* X`` bent from the
    dual vector in <X_j*, X**, X_i**>; the double-dual legs are identified
    with X and X_i via the pivotal structure.
    """
    eng = engine(data)
    dual = data.dual
    ii, jj = int(dual[i]), int(dual[j])
    Xd = dual_word(data, X)
    word = (ii,) + Xd + (j,)
    out = []
    for l, B1, B2 in dual_bases(data, word):
        for phi, phid in zip(B1, B2):
            # L : X X_i -> X X_i X_i* X* X_j -> X_j  via nested ev' on (X X_i)(X_i* X*)
            Lm = tensor(eng.ev_word(X + (i,), right=True), eng.identity((j,))) @ \
                tensor(eng.identity(X + (i,)), phi.as_morph()).retarget(src=(X + (i,),))
            # R : X_i* -> X_j* X X_i X_i* -> X_j* X  via ev_{X_i*} on (X_i** X_i*)
            Rm = tensor(eng.identity((jj,) + X), eng.ev(ii)) @ \
                tensor(phid.as_morph(), eng.identity((ii,))).retarget(src=((ii,),))
            Rm = Rm * (1.0 / _pivotal_word(data, X))
            out.append((Lm, Rm))
    return out


def induced_gamma(data: FusionData, M: Obj, X: tuple, weights: str = "R") -> Morph:
    """Gamma_X on I(M) = (+)_{i,s} X_i M_s X_i*  (summands ordered by i, then s)."""
    eng = engine(data)
    M = as_obj(M)
    host = induce_host(data, M)
    src, tgt = eng.tensor_obj(X, host), eng.tensor_obj(host, X)
    sq = data.sqrt_dim_right if weights == "R" else data.sqrt_dim_left
    comps = {}
    nM = len(M)
    for i in range(data.rank):
        for j in range(data.rank):
            pairs = vertex_pairs(data, X, i, j)
            if not pairs:
                continue
            w = sq[i] * sq[j]
            for s, m in enumerate(M):
                acc = None
                for Lm, Rm in pairs:
                    term = tensor(Lm, eng.identity(m), Rm)
                    acc = term if acc is None else acc + term
                comps[(i * nM + s, j * nM + s)] = acc * w
    return eng.assemble(src, tgt, comps)


def induce_host(data: FusionData, M) -> Obj:
    M = as_obj(M)
    return Obj(tuple((i,) + m + (int(data.dual[i]),) for i in range(data.rank) for m in M))


def induce(data: FusionData, M) -> CenterObject:
    """I(M) = (+)_i X_i M X_i* with the induced half-braiding."""
    M = as_obj(M)
    host = induce_host(data, M)
    gamma = {k: induced_gamma(data, M, (k,)) for k in range(data.rank)}
    for k, g in gamma.items():
        if not g.is_invertible():
            raise CategoryError("induced half-braiding is not invertible")
    return CenterObject(data, host, gamma, name=f"I({M.words})")


def trivial_center_object(data: FusionData, M, braid: str = "over") -> CenterObject:
    """(M, c) with the braiding as half-braiding (``over``: c_{X,M}; ``under``: c^{-1}_{M,X})."""
    eng = engine(data)
    M = as_obj(M)
    gamma = {k: eng.braid((k,), M, inverse=(braid == "under")) for k in range(data.rank)}
    return CenterObject(data, M, gamma, name=f"({M.words},{braid})")


def _linear_map_matrix(fn: Callable[[Morph], np.ndarray], eng: HomEngine, src, tgt) -> np.ndarray:
    n = sum(eng.dim(src, k) * eng.dim(tgt, k) for k in range(eng.L))
    cols = []
    for e in np.eye(n, dtype=complex):
        cols.append(fn(Morph.from_vec(eng, src, tgt, e)))
    return np.array(cols).T if cols else np.zeros((0, 0), dtype=complex)


def intertwiner_equations(Z1: CenterObject, Z2: CenterObject, labels=None) -> np.ndarray:
    """Matrix of f |-> [(f (x) id_k) gamma1_k - gamma2_k (id_k (x) f)]_k on Hom(host1, host2)."""
    data = Z1.data
    eng = engine(data)
    labels = range(data.rank) if labels is None else labels
    rows = []
    for k in labels:
        g1, g2 = Z1.gamma[k], Z2.gamma[k]
        idk = eng.identity((k,))

        def fn(f, g1=g1, g2=g2, idk=idk):
            return (tensor(f, idk) @ g1 - g2 @ tensor(idk, f)).vec()

        rows.append(_linear_map_matrix(fn, eng, Z1.host, Z2.host))
    return np.vstack(rows) if rows else np.zeros((0, 0))


def center_hom(Z1: CenterObject, Z2: CenterObject, eps: float = 1e-9) -> list[Morph]:
    """Basis of {f : host1 -> host2 | f gamma1 = gamma2 f}."""
    eng = engine(Z1.data)
    A = intertwiner_equations(Z1, Z2)
    K = null_space(A, eps)
    return [Morph.from_vec(eng, Z1.host, Z2.host, K[:, n]) for n in range(K.shape[1])]


# ---------------------------------------------------------------------------
# adjunction and projectors
# ---------------------------------------------------------------------------

def adjunction_forward(Z: CenterObject, phi: Morph, M2) -> Morph:
    """Hom_Z((M1, gamma), I(M2)) -> Hom(M1, M2): sum over unit components of the closed loop."""
    data = Z.data
    eng = engine(data)
    M2 = as_obj(M2)
    host2 = induce_host(data, M2)
    nM = len(M2)
    out = eng.zero(Z.host, M2)
    for l in data.unit_components:
        comps = {}
        for s in range(nM):
            comps[(l * nM + s, s)] = eng.identity(host2.words[l * nM + s])
        proj = eng.assemble(host2, Obj(tuple((l,) + m + (l,) for m in M2)), comps)
        phi_l = proj @ phi
        # reinterpret (l M2 l*) as X_l M2 X_l* summand-wise
        piece = _unit_loop_closure_multi(Z, phi_l, l, M2)
        out = out + piece
    return out


def _unit_loop_closure_multi(Z, phi_l, l, M2):
    data = Z.data
    eng = engine(data)
    ld = int(data.dual[l])
    M1 = Z.host
    step = tensor(eng.coev_r(l), eng.identity(M1))
    step = tensor(eng.identity((ld,)), Z.gamma[l]) @ step
    step = tensor(eng.identity((ld,)), phi_l, eng.identity((l,))) @ step
    # target: l* (l M2_s l*) l  summed over s  ->  M2_s
    src = step.tgt
    mats = {}
    for s, m in enumerate(M2):
        mats[(s, s)] = tensor(eng.ev(l), eng.identity(m), eng.ev(l))
    close = eng.assemble(src, M2, mats)
    return close @ step


def adjunction_backward(Z: CenterObject, f: Morph, M2) -> Morph:
    """Hom(M1, M2) -> Hom_Z((M1, gamma), I(M2)): component j is
    sqrt(d_j^R) (id_j f id_j*) o (id_j gamma_{X_j*}) o (coev_j id_M1)."""
    data = Z.data
    eng = engine(data)
    M2 = as_obj(M2)
    host2 = induce_host(data, M2)
    nM = len(M2)
    out = eng.zero(Z.host, host2)
    for j in range(data.rank):
        jd = int(data.dual[j])
        bent = tensor(eng.identity((j,)), Z.gamma[jd]) @ tensor(eng.coev(j), eng.identity(Z.host))
        comp = tensor(eng.identity((j,)), f, eng.identity((jd,))) @ bent
        # comp : M1 -> (+)_s j M2_s j*  ; place into summands (j, s)
        tgt_j = Obj(tuple((j,) + m + (jd,) for m in M2))
        inc = eng.assemble(tgt_j, host2, {(s, j * nM + s): eng.identity(tgt_j.words[s]) for s in range(nM)})
        out = out + (inc @ comp.retarget(tgt=tgt_j)) * data.sqrt_dim_right[j]
    return out


def adjunction_roundtrip(Z: CenterObject, phi: Morph, M2) -> tuple[Morph, float]:
    """Apply forward then backward; returns the result and the residual against phi."""
    f = adjunction_forward(Z, phi, M2)
    back = adjunction_backward(Z, f, M2)
    return back, back.dist(phi)


@dataclass
class ProjectorFamily:
    P: Morph
    P_hat: Morph
    P_check: Morph
    idempotency: float
    splitting: float
    intertwining: float


def projector_family(Z: CenterObject) -> ProjectorFamily:
    """P = P_hat o P_check on I(M) for a center object (M, gamma)."""
    data = Z.data
    eng = engine(data)
    M = Z.host
    I = induce(data, M) if not hasattr(Z, "_induced") else Z._induced
    norm = np.sqrt(len(data.unit_components) * data.global_dim)
    P_hat = adjunction_backward(Z, eng.identity(M), M) * (1.0 / norm)
    # P_check component i : X_i M X_i* -> M = (id_M ev'_i) o (gamma_i id_i*)
    comps = {}
    nM = len(M)
    for i in range(data.rank):
        id_ = int(data.dual[i])
        for s, m in enumerate(M):
            inc = eng.inclusion(M, s)
            piece = tensor(eng.identity(M), eng.ev_r(i)) @ tensor(Z.gamma[i], eng.identity((id_,))) @ \
                tensor(eng.identity((i,)), inc, eng.identity((id_,)))
            comps_key = i * nM + s
            comps[comps_key] = piece * (data.sqrt_dim_right[i] / norm)
    P_check = eng.zero(I.host, M)
    for key, piece in comps.items():
        P_check = P_check + piece @ eng.projection(I.host, key)
    P = P_hat @ P_check
    idem = (P @ P).dist(P)
    split = (P_check @ P_hat).dist(eng.identity(M))
    # both halves must intertwine the half-braidings
    inter = 0.0
    for k in range(data.rank):
        idk = eng.identity((k,))
        inter = max(inter,
                    (tensor(P_hat, idk) @ Z.gamma[k]).dist(I.gamma[k] @ tensor(idk, P_hat)),
                    (tensor(P_check, idk) @ I.gamma[k]).dist(Z.gamma[k] @ tensor(idk, P_check)))
    return ProjectorFamily(P, P_hat, P_check, idem, split, inter)


@dataclass
class HtrProjectorFamily:
    P: HtrMorphism
    P_hat: HtrMorphism
    P_check: HtrMorphism
    idempotency: float
    splitting: float


def htr_projector_family(data: FusionData, M) -> HtrProjectorFamily:
    """Left-dimension weighted projector on (+)_i X_i M X_i* in htr, with its splitting."""
    eng = engine(data)
    M = as_obj(M)
    host = induce_host(data, M)
    nM = len(M)
    norm = np.sqrt(len(data.unit_components) * data.global_dim)
    zero_check = HtrMorphism.from_vec(data, host, M, np.zeros(htr_dim(data, host, M), dtype=complex))
    zero_hat = HtrMorphism.from_vec(data, M, host, np.zeros(htr_dim(data, M, host), dtype=complex))
    check_comps = dict(zero_check.comps)
    hat_comps = dict(zero_hat.comps)
    for i in range(data.rank):
        id_ = int(data.dual[i])
        sq = data.sqrt_dim_left[i] / norm
        # check_i in ihom_{X_i*}(X_i M X_i*, M): ev_i on the first two letters
        acc = None
        for s, m in enumerate(M):
            piece = tensor(eng.ev(i), eng.identity(m), eng.identity((id_,)))
            piece = tensor(eng.inclusion(M, s), eng.identity((id_,))) @ piece @ \
                tensor(eng.identity((id_,)), eng.projection(host, i * nM + s))
            acc = piece if acc is None else acc + piece
        check_comps[id_] = check_comps[id_] + acc * sq
        # hat_i in ihom_{X_i}(M, X_i M X_i*): id_i id_M coev'_i
        acc = None
        for s, m in enumerate(M):
            piece = tensor(eng.identity((i,) + m), eng.coev_r(i))
            piece = tensor(eng.inclusion(host, i * nM + s), eng.identity((i,))) @ piece @ \
                tensor(eng.identity((i,)), eng.projection(M, s))
            acc = piece if acc is None else acc + piece
        hat_comps[i] = hat_comps[i] + acc * sq
    P_check = HtrMorphism(data, host, M, check_comps)
    P_hat = HtrMorphism(data, M, host, hat_comps)
    P = htr_compose(P_hat, P_check)
    idem = htr_compose(P, P).dist(P)
    split = htr_compose(P_check, P_hat).dist(htr_identity(data, M))
    return HtrProjectorFamily(P, P_hat, P_check, idem, split)


# ---------------------------------------------------------------------------
# half-braiding diagnostics
# ---------------------------------------------------------------------------

def halfbraiding_residuals(Z: CenterObject, rng: np.random.Generator, n_checks: int = 3) -> dict:
    """Multiplicativity on pairs of simples and naturality against random vertex maps."""
    data = Z.data
    eng = engine(data)
    L = data.rank
    mult, nat = 0.0, 0.0
    build = getattr(Z, "builder", None)
    for a, b in itertools.product(range(L), repeat=2):
        direct = build((a, b)) if build is not None else None
        via = Z.gamma_word((a, b))
        # naturality against every fusion vertex X_c -> a b and its dual
        for c in range(L):
            if not data.fusion[a, b, c]:
                continue
            v = eng.vertex((a, b), c, 0) * (rng.normal() + 1j * rng.normal())
            lhs = tensor(eng.identity(Z.host), v) @ Z.gamma[c]
            rhs = via @ tensor(v, eng.identity(Z.host))
            nat = max(nat, lhs.dist(rhs))
        if direct is not None:
            mult = max(mult, direct.dist(via))
    return {"multiplicativity": mult, "naturality": nat}


# ---------------------------------------------------------------------------
# elliptic data
# ---------------------------------------------------------------------------

def elliptic_host(data: FusionData, M) -> Obj:
    M = as_obj(M)
    dual = data.dual
    return Obj(tuple((i, j) + m + (int(dual[j]), int(dual[i]))
                     for i in range(data.rank) for j in range(data.rank) for m in M))


def gamma_from_braiding(data: FusionData, M, mode: str, chirality: int = 1) -> CenterObject:
    """Half-braidings used for the elliptic center and the modular comparison.

    * ``"G1"``: the outer induced half-braiding on (+)_{i,j} X_i X_j M X_j* X_i*
      (crossing-free; the inner layer is treated as part of the module object);
    * ``"G2"``: the acting strand passes X_i by a crossing, goes through the
      inner induced half-braiding on the j-layer, and passes X_i* by the
      opposite crossing;
    * ``"Omega"``: on (+)_i X_i M X_i*, the acting strand crosses all of
      X_i, M, X_i*  (c_{-,X_i}, c_{-,M}, c^{-1}_{X_i*,-}).

    ``chirality=-1`` mirrors every crossing.
    """
    eng = engine(data)
    M = as_obj(M)
    L = data.rank
    dual = data.dual
    if mode == "G1":
        inner = induce_host(data, M)
        Z = induce(data, inner)
        host = elliptic_host(data, M)
        assert Z.host == host
        Z.name = f"G1({M.words})"
        return Z
    if data.R is None:
        raise CategoryError("braiding required but absent")
    over = chirality > 0
    if mode == "G2":
        host = elliptic_host(data, M)
        inner_gammas = {k: induced_gamma(data, M, (k,)) for k in range(L)}
        inner_host = induce_host(data, M)
        nI = len(inner_host)
        gamma = {}
        for k in range(L):
            comps = {}
            for i in range(L):
                idd = int(dual[i])
                # k X_i -> X_i k : the acting strand passes under X_i (c^{-1}_{X_i,k}) or over
                left = eng.braid((k,), (i,), inverse=over)
                right = eng.braid((k,), (idd,), inverse=not over)
                block = tensor(eng.identity((i,)), inner_gammas[k], eng.identity((idd,)))
                full = tensor(eng.identity((i,)), eng.identity(inner_host), right) @ block @ \
                    tensor(left, eng.identity(inner_host), eng.identity((idd,)))
                # full : k (i I i*) -> (i I i*) k  on the sub-sum with fixed i
                sub_src = eng.tensor_obj((k,), Obj(tuple((i,) + w + (idd,) for w in inner_host)))
                sub_tgt = eng.tensor_obj(Obj(tuple((i,) + w + (idd,) for w in inner_host)), (k,))
                full = full.retarget(src=sub_src, tgt=sub_tgt)
                for s in range(nI):
                    for t in range(nI):
                        comps[(i * nI + s, i * nI + t)] = eng.component(full, s, t)
            gamma[k] = eng.assemble(eng.tensor_obj((k,), host), eng.tensor_obj(host, (k,)), comps)
        return CenterObject(data, host, gamma, name=f"G2({M.words})")
    if mode == "Omega":
        host = induce_host(data, M)
        gamma = {}
        for k in range(L):
            comps = {}
            nM = len(M)
            for i in range(L):
                idd = int(dual[i])
                for s, m in enumerate(M):
                    a = eng.braid((k,), (i,), inverse=not over)
                    b = eng.braid((k,), m, inverse=not over)
                    c = eng.braid((k,), (idd,), inverse=over)
                    piece = tensor(eng.identity((i,) + m), c) @ tensor(eng.identity((i,)), b, eng.identity((idd,))) @ \
                        tensor(a, eng.identity(m + (idd,)))
                    comps[(i * nM + s, i * nM + s)] = piece
            gamma[k] = eng.assemble(eng.tensor_obj((k,), host), eng.tensor_obj(host, (k,)), comps)
        return CenterObject(data, host, gamma, name=f"Omega({M.words})")
    raise ValueError(f"unknown mode {mode!r}")


def comm_residual(Z1: CenterObject, Z2: CenterObject) -> float:
    """Residual of the commutation relation between two half-braidings on one host.

    For simples X, Y acting on A:
      (id_A c^{-1}_{Y,X})(l1_X id_Y)(id_X l2_Y) = (l2_Y id_X)(id_Y l1_X)(c_{X,Y} id_A).
    """
    data = Z1.data
    eng = engine(data)
    A = Z1.host
    worst = 0.0
    for x, y in itertools.product(range(data.rank), repeat=2):
        X, Y = (x,), (y,)
        # c^{-1}_{Y,X} : X Y -> Y X
        cinv = eng.braid(X, Y, inverse=True)
        lhs = tensor(eng.identity(A), cinv) @ tensor(Z1.gamma[x], eng.identity(Y)) @ tensor(eng.identity(X), Z2.gamma[y])
        rhs = tensor(Z2.gamma[y], eng.identity(X)) @ tensor(eng.identity(Y), Z1.gamma[x]) @ \
            tensor(eng.braid(X, Y), eng.identity(A))
        worst = max(worst, lhs.dist(rhs))
    return worst


def induced_gamma_splitting(data: FusionData, M, X: tuple) -> Morph:
    """Gamma_X on I(M) from splitting trees: sum_alpha b_alpha (x) id_M (x) mate(t_alpha).

    ``t_alpha : X_j -> X X_i`` and ``b_alpha : X X_i -> X_j`` are the canonical
    vertex/covertex pairs resolving id_{X X_i}; the mate is
    (id_{X_j* X} ev'_i)(id_{X_j*} t_alpha id_{X_i*})(coev'_j id_{X_i*}).
    Used as an independent cross-check of :func:`induced_gamma`.
    """
    eng = engine(data)
    M = as_obj(M)
    host = induce_host(data, M)
    nM = len(M)
    comps = {}
    for i in range(data.rank):
        ii = int(data.dual[i])
        w = tuple(X) + (i,)
        for j in range(data.rank):
            n = eng.ntrees(w, j)
            if not n:
                continue
            jj = int(data.dual[j])
            for s, m in enumerate(M):
                acc = None
                for a in range(n):
                    t, b = eng.vertex(w, j, a), eng.covertex(w, j, a)
                    mate = tensor(eng.identity((jj,) + tuple(X)), eng.ev_r(i)) @ \
                        tensor(eng.identity((jj,)), t, eng.identity((ii,))) @ \
                        tensor(eng.coev_r(j), eng.identity((ii,)))
                    term = tensor(b, eng.identity(m), mate.retarget(src=((ii,),)))
                    acc = term if acc is None else acc + term
                comps[(i * nM + s, j * nM + s)] = acc
    return eng.assemble(eng.tensor_obj(X, host), eng.tensor_obj(host, X), comps)


# ---------------------------------------------------------------------------
# compact hosts for Karoubi objects
# ---------------------------------------------------------------------------

def split_idempotent(data: FusionData, p: Morph, eps: float = 1e-9) -> tuple[Obj, Morph, Morph]:
    """Split an idempotent p = iota o pi through a host made of simple words.

    Returns (host, iota : host -> p.src, pi : p.src -> host) with pi o iota = id.
    """
    eng = engine(data)
    words, iotas, pis = [], [], []
    for k in range(data.rank):
        b = p.blocks[k]
        if not b.size:
            iotas.append(np.zeros((b.shape[0], 0), dtype=complex))
            pis.append(np.zeros((0, b.shape[1]), dtype=complex))
            continue
        U, s, _ = np.linalg.svd(b)
        r = int(np.sum(s > eps * max(s[0], 1.0)))
        io = U[:, :r]
        iotas.append(io)
        pis.append(io.conj().T @ b)
        words.extend([(k,)] * r)
    host = Obj(tuple(sorted(words)))
    iota = Morph(eng, host, p.src, iotas)
    pi = Morph(eng, p.src, host, pis)
    return host, iota, pi


def restrict_center_object(Z: CenterObject, p: Morph) -> CenterObject:
    """The image of an idempotent intertwiner p as a center object on a compact host."""
    data = Z.data
    eng = engine(data)
    host, iota, pi = split_idempotent(data, p)
    gamma = {k: tensor(pi, eng.identity((k,))) @ Z.gamma[k] @ tensor(eng.identity((k,)), iota)
             for k in range(data.rank)}
    return CenterObject(data, host, gamma, name=f"im({Z.name})")


# ---------------------------------------------------------------------------
# double horizontal trace (punctured torus)
# ---------------------------------------------------------------------------

@dataclass
class Htr2Morphism:
    """Element of (+)_{i,j} Hom(X_i X_j A, A' X_j X_i)."""

    data: FusionData
    src: Obj
    tgt: Obj
    comps: dict  # (i, j) -> Morph

    def _space(self, i, j):
        eng = engine(self.data)
        return (eng.tensor_obj((i, j), self.src), eng.tensor_obj(self.tgt, (j, i)))

    def vec(self) -> np.ndarray:
        eng = engine(self.data)
        parts = []
        for i in range(self.data.rank):
            for j in range(self.data.rank):
                m = self.comps.get((i, j))
                if m is None:
                    m = eng.zero(*self._space(i, j))
                parts.append(m.vec())
        return np.concatenate(parts)

    @classmethod
    def from_vec(cls, data, src, tgt, v):
        eng = engine(data)
        src, tgt = as_obj(src), as_obj(tgt)
        comps, o = {}, 0
        for i in range(data.rank):
            for j in range(data.rank):
                s, t = eng.tensor_obj((i, j), src), eng.tensor_obj(tgt, (j, i))
                n = sum(eng.dim(s, k) * eng.dim(t, k) for k in range(data.rank))
                comps[(i, j)] = Morph.from_vec(eng, s, t, v[o:o + n])
                o += n
        return cls(data, src, tgt, comps)

    def __add__(self, other):
        return Htr2Morphism.from_vec(self.data, self.src, self.tgt, self.vec() + other.vec())

    def __mul__(self, c):
        return Htr2Morphism.from_vec(self.data, self.src, self.tgt, c * self.vec())

    __rmul__ = __mul__

    def dist(self, other) -> float:
        d = self.vec() - other.vec()
        return float(np.max(np.abs(d))) if d.size else 0.0


def htr2_dim(data: FusionData, A1, A2) -> int:
    eng = engine(data)
    A1, A2 = as_obj(A1), as_obj(A2)
    return sum(eng.dim(eng.tensor_obj((i, j), A1), k) * eng.dim(eng.tensor_obj(A2, (j, i)), k)
               for i in range(data.rank) for j in range(data.rank) for k in range(data.rank))


def htr2_project(data: FusionData, psi: Morph, B1, B2, A1, A2, mode: str = "R") -> Htr2Morphism:
    """Reduce psi : B1 B2 A1 -> A2 B2 B1 to simple-indexed components by resolving B1 and B2."""
    eng = engine(data)
    A1, A2 = as_obj(A1), as_obj(A2)
    comps = {}
    r1 = _resolve_obj(data, B1, mode)
    r2 = _resolve_obj(data, B2, mode)
    idA1, idA2 = eng.identity(A1), eng.identity(A2)
    for i, c1, top1, bot1 in r1:
        for j, c2, top2, bot2 in r2:
            term = tensor(idA2, bot2, bot1) @ psi @ tensor(top1, top2, idA1)
            term = term * (c1 * c2)
            comps[(i, j)] = comps[(i, j)] + term if (i, j) in comps else term
    out = Htr2Morphism.from_vec(data, A1, A2, np.zeros(htr2_dim(data, A1, A2), dtype=complex))
    for key, m in comps.items():
        out.comps[key] = out.comps[key] + m
    return out


def _is_zero(m: Morph) -> bool:
    return not any(b.size and np.any(b) for b in m.blocks)


def htr2_compose(psi: Htr2Morphism, phi: Htr2Morphism, chirality: int = 1) -> Htr2Morphism:
    """psi o phi in the double trace.

    With phi in Hom(B1 B2 A, A' B2 B1) and psi in Hom(B1' B2' A', A'' B2' B1'):
      B1' B1 B2' B2 A -> B1' B2' B1 B2 A -> B1' B2' A' B2 B1 -> A'' B2' B1' B2 B1 -> A'' B2' B2 B1' B1
    where the strands of phi pass over those of psi (``chirality=1``) or under
    (``chirality=-1``), then reprojected with B1tot = B1' B1 and B2tot = B2' B2.
    """
    if psi.src != phi.tgt:
        raise CategoryError("htr2_compose: object mismatch")
    data = psi.data
    eng = engine(data)
    A, A2 = phi.src, psi.tgt
    total = Htr2Morphism.from_vec(data, A, A2, np.zeros(htr2_dim(data, A, A2), dtype=complex))
    for (i, j), f in phi.comps.items():
        if _is_zero(f):
            continue
        for (i2, j2), g in psi.comps.items():
            if _is_zero(g):
                continue
            cross1 = eng.braid((i,), (j2,), inverse=(chirality < 0))
            cross2 = eng.braid((i2,), (j,), inverse=(chirality > 0))
            m = tensor(eng.identity((i2,)), cross1, eng.identity((j,)), eng.identity(A))
            m = tensor(eng.identity((i2, j2)), f) @ m
            m = tensor(g, eng.identity((j, i))) @ m
            m = tensor(eng.identity(A2), eng.identity((j2,)), cross2, eng.identity((i,))) @ m
            total = total + htr2_project(data, m, (i2, i), (j2, j), A, A2)
    return total


def htr2_identity(data: FusionData, A) -> Htr2Morphism:
    eng = engine(data)
    A = as_obj(A)
    return htr2_project(data, eng.identity(A), (), (), A, A)


def htr2_hom(data: FusionData, A1, A2) -> list[Htr2Morphism]:
    n = htr2_dim(data, A1, A2)
    return [Htr2Morphism.from_vec(data, A1, A2, e) for e in np.eye(n, dtype=complex)]


# ---------------------------------------------------------------------------
# elliptic objects
# ---------------------------------------------------------------------------

@dataclass
class EllipticObject:
    """A host with two half-braidings (lambda1, lambda2)."""

    data: FusionData
    host: Obj
    lam1: CenterObject
    lam2: CenterObject
    name: str = ""


def induce_elliptic(data: FusionData, M, chirality: int = 1) -> EllipticObject:
    """I^el(M) = (+)_{i,j} X_i X_j M X_j* X_i* with (Gamma1, Gamma2)."""
    M = as_obj(M)
    g1 = gamma_from_braiding(data, M, "G1")
    g2 = gamma_from_braiding(data, M, "G2", chirality=chirality)
    return EllipticObject(data, g1.host, g1, g2, name=f"Iel({M.words})")


def elliptic_hom(Z1: EllipticObject, Z2: EllipticObject, eps: float = 1e-9) -> list[Morph]:
    """Morphisms of hosts intertwining both half-braidings."""
    eng = engine(Z1.data)
    A = np.vstack([intertwiner_equations(Z1.lam1, Z2.lam1), intertwiner_equations(Z1.lam2, Z2.lam2)])
    K = null_space(A, eps)
    return [Morph.from_vec(eng, Z1.host, Z2.host, K[:, n]) for n in range(K.shape[1])]


def restrict_elliptic(Z: EllipticObject, p: Morph) -> EllipticObject:
    data = Z.data
    eng = engine(data)
    host, iota, pi = split_idempotent(data, p)

    def cut(C):
        return CenterObject(data, host, {k: tensor(pi, eng.identity((k,))) @ C.gamma[k] @ tensor(eng.identity((k,)), iota)
                                         for k in range(data.rank)})

    return EllipticObject(data, host, cut(Z.lam1), cut(Z.lam2), name=f"im({Z.name})")


def elliptic_projector(Z: EllipticObject, form: int = 1) -> Htr2Morphism:
    """P_(A, l1, l2) in End_htr2(A): (1/D^2) sum d_a d_b of the two half-braidings joined by a crossing.

    ``form=1``: (l2_b id_a)(id_b l1_a)(c_{a,b} id_A);
    ``form=2``: (id_A c^{-1}_{b,a})(l1_a id_b)(id_a l2_b).
    """
    data = Z.data
    eng = engine(data)
    A = Z.host
    D = data.global_dim
    out = Htr2Morphism.from_vec(data, A, A, np.zeros(htr2_dim(data, A, A), dtype=complex))
    for a in range(data.rank):
        for b in range(data.rank):
            w = data.dim_right[a] * data.dim_right[b] / D ** 2
            if form == 1:
                m = tensor(Z.lam2.gamma[b], eng.identity((a,))) @ tensor(eng.identity((b,)), Z.lam1.gamma[a]) @ \
                    tensor(eng.braid((a,), (b,)), eng.identity(A))
            else:
                m = tensor(eng.identity(A), eng.braid((a,), (b,), inverse=True)) @ \
                    tensor(Z.lam1.gamma[a], eng.identity((b,))) @ tensor(eng.identity((a,)), Z.lam2.gamma[b])
            out.comps[(a, b)] = out.comps[(a, b)] + m * w
    return out


# ---------------------------------------------------------------------------
# loops pushed in from a puncture
# ---------------------------------------------------------------------------

def monodromy_loop(data: FusionData, f: Morph, k: int, linked: bool = True) -> Morph:
    """A k-colored loop encircling the strand of f : A -> A'.

    The upper arc passes under the strand and the lower arc over it
    (``linked=False`` puts both arcs on the same side).
    """
    eng = engine(data)
    A, A2 = f.src, f.tgt
    kd = int(data.dual[k])
    m = tensor(eng.coev(k), eng.identity(A))
    m = tensor(eng.identity((k,)), eng.braid((kd,), A, inverse=True)) @ m
    m = tensor(eng.identity((k,)), f, eng.identity((kd,))) @ m
    m = tensor(eng.braid((k,), A2, inverse=not linked), eng.identity((kd,))) @ m
    return tensor(eng.identity(A2), eng.ev_r(k)) @ m


def disk_seal(data: FusionData, f: Morph, policy: str = "monodromy") -> Morph:
    """pi-action on a disk morphism: sum_k d_k/D of the loop around f."""
    out = None
    for k in range(data.rank):
        term = monodromy_loop(data, f, k, linked=(policy == "monodromy")) * (data.dim_right[k] / data.global_dim)
        out = term if out is None else out + term
    return out


def puncture_loop(data: FusionData, A, policy: str = "commutator_over") -> Htr2Morphism:
    """The pi loop parallel to the puncture of the torus, acting on id_A in the double trace.

    The k-colored loop meets the two wrapping directions twice each,
    B1 = B2 = (k*, k): a cap on (k, k*) at one corner, a cup at the opposite
    corner, and two arcs through the A strand on opposite sides of it (the
    first arc over A for ``commutator_over``, under for ``commutator_under``).
    """
    eng = engine(data)
    A = as_obj(A)
    total = Htr2Morphism.from_vec(data, A, A, np.zeros(htr2_dim(data, A, A), dtype=complex))
    over = policy == "commutator_over"
    if policy not in ("commutator_over", "commutator_under"):
        raise ValueError(f"unknown wrap policy {policy!r}")
    for k in range(data.rank):
        kd = int(data.dual[k])
        # k* k k* k A -> k* k A  (cap ev'_k on positions 2,3)
        m = tensor(eng.identity((kd,)), eng.ev_r(k), eng.identity((k,)), eng.identity(A))
        # k* k A -> A k* k : the two corner arcs pass A on opposite sides
        m = tensor(eng.identity((kd,)), eng.braid((k,), A, inverse=over)) @ m
        m = tensor(eng.braid((kd,), A, inverse=not over), eng.identity((k,))) @ m
        # A k* k -> A k* (k k*) k
        m = tensor(eng.identity(A), eng.identity((kd,)), eng.coev(k), eng.identity((k,))) @ m
        term = htr2_project(data, m, (kd, k), (kd, k), A, A)
        total = total + term * (data.dim_right[k] / data.global_dim)
    return total
