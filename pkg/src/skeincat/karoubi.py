"""Idempotent completion of small semisimple linear categories.

A :class:`PresentedCategory` is given by hom-space dimensions, composition
structure constants and identity vectors.  Endomorphism algebras are split
numerically (center -> central idempotents -> primitive idempotents inside
each simple block); simples of the Karoubi envelope are then deduplicated by
compressed hom spaces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

__all__ = [
    "KaroubiError", "PresentedCategory", "KarObject", "SplitResult", "split_end_algebra",
    "enumerate_simples", "kar_hom", "SimpleInventory", "present",
]


class KaroubiError(RuntimeError):
    """Raised when a presented category is inconsistent or not semisimple."""


def _rank(A: np.ndarray, eps: float) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > eps * max(s[0], 1.0)))


def _null(A: np.ndarray, eps: float) -> np.ndarray:
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    r = int(np.sum(s > eps * max(s[0], 1.0))) if s.size else 0
    return vh[r:].conj().T


@dataclass
class PresentedCategory:
    """Finite linear category with hom dims and composition constants.

    ``T[(a, b, c)]`` has shape ``(dim(a,c), dim(b,c), dim(a,b))`` and gives
    ``(g o f)_r = sum_{s,t} T[r, s, t] g_s f_t`` for ``f : a -> b`` and
    ``g : b -> c``.
    """

    objects: list
    dims: dict
    T: dict
    unit: dict
    name: str = ""
    eps: float = 1e-9

    def dim(self, a, b) -> int:
        return self.dims[(a, b)]

    def compose(self, g: np.ndarray, f: np.ndarray, a, b, c) -> np.ndarray:
        T = self.T[(a, b, c)]
        if T.size == 0:
            return np.zeros(self.dims[(a, c)], dtype=complex)
        return np.einsum("rst,s,t->r", T, g, f)

    def left_mult(self, x: np.ndarray, a) -> np.ndarray:
        """Matrix of y |-> x o y on End(a)."""
        return np.einsum("rst,s->rt", self.T[(a, a, a)], x)

    def right_mult(self, x: np.ndarray, a) -> np.ndarray:
        """Matrix of y |-> y o x on End(a)."""
        return np.einsum("rst,t->rs", self.T[(a, a, a)], x)

    def validate(self, rng: np.random.Generator, trials: int = 2) -> dict:
        """Associativity and unit residuals on random elements."""
        assoc, unit = 0.0, 0.0
        obs = self.objects
        for a in obs:
            for b in obs:
                if not self.dims[(a, b)]:
                    continue
                f = _rand(rng, self.dims[(a, b)])
                unit = max(unit,
                           np.max(np.abs(self.compose(self.unit[b], f, a, b, b) - f)),
                           np.max(np.abs(self.compose(f, self.unit[a], a, a, b) - f)))
        for a, b, c, d in _triples(obs, rng, trials):
            if not (self.dims[(a, b)] and self.dims[(b, c)] and self.dims[(c, d)]):
                continue
            f, g, h = _rand(rng, self.dims[(a, b)]), _rand(rng, self.dims[(b, c)]), _rand(rng, self.dims[(c, d)])
            lhs = self.compose(h, self.compose(g, f, a, b, c), a, c, d)
            rhs = self.compose(self.compose(h, g, b, c, d), f, a, b, d)
            scale = max(1.0, float(np.max(np.abs(lhs))) if lhs.size else 1.0)
            assoc = max(assoc, float(np.max(np.abs(lhs - rhs))) / scale if lhs.size else 0.0)
        return {"associativity": float(assoc), "unit": float(unit)}


def _rand(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def _triples(obs, rng, trials):
    out = []
    n = len(obs)
    for a in obs:
        for _ in range(trials):
            b, c, d = (obs[int(rng.integers(n))] for _ in range(3))
            out.append((a, b, c, d))
    for a in obs:
        out.append((a, a, a, a))
    return out


def present(objects: Sequence, basis: Callable, compose: Callable, coords: Callable,
            unit: Callable, name: str = "", eps: float = 1e-9) -> PresentedCategory:
    """Build a :class:`PresentedCategory` from a concrete realization.

    ``basis(a, b)`` lists concrete morphisms, ``compose(g, f)`` composes two
    of them, ``coords(a, b, m)`` returns coordinates of a concrete morphism in
    ``basis(a, b)`` and ``unit(a)`` is the concrete identity.
    """
    objects = list(objects)
    B = {(a, b): basis(a, b) for a in objects for b in objects}
    dims = {k: len(v) for k, v in B.items()}
    T = {}
    for a in objects:
        for b in objects:
            for c in objects:
                nab, nbc, nac = dims[(a, b)], dims[(b, c)], dims[(a, c)]
                arr = np.zeros((nac, nbc, nab), dtype=complex)
                if nab and nbc and nac:
                    for s, g in enumerate(B[(b, c)]):
                        for t, f in enumerate(B[(a, b)]):
                            arr[:, s, t] = coords(a, c, compose(g, f))
                T[(a, b, c)] = arr
    units = {a: coords(a, a, unit(a)) for a in objects}
    return PresentedCategory(objects, dims, T, units, name=name, eps=eps)


@dataclass
class KarObject:
    """Object (host, p) of the Karoubi envelope; ``p`` is a coordinate vector in End(host)."""

    host: Hashable
    p: np.ndarray
    label: str = ""

    def record(self) -> dict:
        return {"host": str(self.host), "label": self.label}


@dataclass
class SplitResult:
    """Primitive orthogonal idempotents of an End algebra, grouped by simple block."""

    idempotents: list          # all primitive idempotents (sum = unit)
    blocks: list               # list of (representative primitive idempotent, multiplicity)
    radical: float             # smallest singular value of the trace form / largest
    residuals: dict = field(default_factory=dict)


def _mul_tensor(C: PresentedCategory, a):
    return C.T[(a, a, a)]


def _algebra_mul(T, x, y):
    return np.einsum("rst,s,t->r", T, x, y)


def _spectral_idempotents(T, unit, x, eps, expected=None):
    """Spectral projectors of the element x (polynomials in x) in the algebra with constants T."""
    L = np.einsum("rst,s->rt", T, x)
    ev = np.linalg.eigvals(L)
    # cluster eigenvalues
    scale = max(1.0, float(np.max(np.abs(ev))))
    tol = 1e-6 * scale
    centers: list[complex] = []
    for lam in sorted(ev, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        if not any(abs(lam - c) < tol for c in centers):
            centers.append(complex(lam))
    # refine each center as the mean of its cluster
    refined = []
    for c in centers:
        members = [z for z in ev if abs(z - c) < tol]
        refined.append(complex(np.mean(members)))
    out = []
    for lam in refined:
        e = unit.copy()
        for mu in refined:
            if mu == lam:
                continue
            e = _algebra_mul(T, (x - mu * unit), e) / (lam - mu)
        out.append((lam, e))
    return out


def split_end_algebra(C: PresentedCategory, a, rng: np.random.Generator) -> SplitResult:
    """Primitive orthogonal idempotents of End(a) (numerical Artin-Wedderburn).

    Raises :class:`KaroubiError` if the trace form is degenerate.
    """
    n = C.dims[(a, a)]
    eps = C.eps
    unit = C.unit[a]
    if n == 0:
        return SplitResult([], [], 1.0)
    T = _mul_tensor(C, a)
    # trace form t(x, y) = Tr(L_x L_y)
    Ls = np.einsum("rst->srt", T)  # Ls[s] = matrix of left multiplication by basis element s
    G = np.einsum("sij,tji->st", Ls, Ls)
    sv = np.linalg.svd(G, compute_uv=False)
    radical = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if radical < eps:
        raise KaroubiError("non-semisimple End algebra — category data invalid")
    if n == 1:
        return SplitResult([unit.copy()], [(unit.copy(), 1)], radical)
    # center of the algebra: x with L_x - R_x = 0 on all basis elements
    comm = np.einsum("rst->rst", T) - np.einsum("rts->rst", T)  # (x y - y x)_r as bilinear in (x=s, y=t)
    A = comm.transpose(0, 2, 1).reshape(n * n, n)
    Z = _null(A, eps)
    z = Z @ _rand(rng, Z.shape[1])
    central = _spectral_idempotents(T, unit, z, eps)
    prim_all, blocks = [], []
    for _, e in central:
        # block algebra eE: dimension m^2
        Le = np.einsum("rst,s->rt", T, e)
        dimblock = _rank(Le, eps)
        m = int(round(np.sqrt(dimblock)))
        if m * m != dimblock:
            raise KaroubiError(f"block of dimension {dimblock} is not a full matrix algebra")
        if m == 1:
            prim_all.append(e)
            blocks.append((e, 1))
            continue
        x = _algebra_mul(T, e, _algebra_mul(T, _rand(rng, n), e))
        spec = _spectral_idempotents(T, unit, x, eps)
        prims = [_algebra_mul(T, e, f) for lam, f in spec]
        prims = [f for f in prims if np.linalg.norm(f) > 1e-8]
        if len(prims) != m:
            raise KaroubiError("failed to find primitive idempotents in a matrix block")
        prim_all.extend(prims)
        blocks.append((prims[0], m))
    res = {
        "sum_to_unit": float(np.max(np.abs(sum(prim_all) - unit))),
        "orthogonality": max((float(np.max(np.abs(_algebra_mul(T, p, q) - (p if i == j else 0))))
                              for i, p in enumerate(prim_all) for j, q in enumerate(prim_all)), default=0.0),
    }
    return SplitResult(prim_all, blocks, radical, res)


def kar_hom(C: PresentedCategory, x: KarObject, y: KarObject) -> np.ndarray:
    """Basis (columns, coordinates in Hom(x.host, y.host)) of q o Hom o p."""
    a, b = x.host, y.host
    n = C.dims[(a, b)]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    M = np.zeros((n, n), dtype=complex)
    for t in range(n):
        f = np.zeros(n, dtype=complex)
        f[t] = 1
        M[:, t] = C.compose(y.p, C.compose(f, x.p, a, a, b), a, b, b)
    U, s, _ = np.linalg.svd(M)
    r = int(np.sum(s > C.eps * max(s[0], 1.0))) if s.size else 0
    return U[:, :r]


@dataclass
class SimpleInventory:
    """Simples of Kar(C) with multiplicity tables and diagnostics."""

    simples: list                 # KarObject
    multiplicities: np.ndarray    # objects x simples
    hom_table: np.ndarray         # simples x simples (dims)
    end_dims: list
    radical: float
    diagnostics: dict

    @property
    def count(self) -> int:
        return len(self.simples)


def enumerate_simples(C: PresentedCategory, rng: np.random.Generator) -> SimpleInventory:
    """Split every End algebra and deduplicate primitive idempotents up to isomorphism."""
    simples: list[KarObject] = []
    mult_rows = []
    worst_radical = 1.0
    wedderburn = 0.0
    split_res = 0.0
    for a in C.objects:
        sr = split_end_algebra(C, a, rng)
        if C.dims[(a, a)]:
            worst_radical = min(worst_radical, sr.radical)
        for v in sr.residuals.values():
            split_res = max(split_res, v)
        row: dict[int, int] = {}
        for p, m in sr.blocks:
            cand = KarObject(a, p)
            idx = None
            for n, s in enumerate(simples):
                if kar_hom(C, cand, s).shape[1] > 0:
                    idx = n
                    break
            if idx is None:
                cand.label = f"S{len(simples)}"
                simples.append(cand)
                idx = len(simples) - 1
            row[idx] = row.get(idx, 0) + m
        mult_rows.append(row)
        wedderburn = max(wedderburn, abs(sum(m * m for m in row.values()) - C.dims[(a, a)]))
    mult = np.zeros((len(C.objects), len(simples)), dtype=int)
    for r, row in enumerate(mult_rows):
        for k, m in row.items():
            mult[r, k] = m
    hom = np.array([[kar_hom(C, s, t).shape[1] for t in simples] for s in simples], dtype=int)
    end_dims = [int(hom[i, i]) for i in range(len(simples))]
    diag = {"wedderburn": float(wedderburn), "split": float(split_res),
            "schur": int(np.sum(np.abs(hom - np.eye(len(simples), dtype=int))))}
    return SimpleInventory(simples, mult, hom, end_dims, worst_radical, diag)


def same_up_to_columns(M1: np.ndarray, M2: np.ndarray) -> bool:
    """True if two multiplicity tables agree up to a permutation of simples."""
    if M1.shape != M2.shape:
        return False
    cols1 = sorted(map(tuple, M1.T.tolist()))
    cols2 = sorted(map(tuple, M2.T.tolist()))
    return cols1 == cols2
