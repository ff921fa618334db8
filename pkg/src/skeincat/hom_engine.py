"""Hom spaces of a skeletal fusion category in the fusion-tree basis.

Objects are finite direct sums of *words*.  A word is a tuple of simple
labels (integers); the dual X_i* of a simple is identified with the simple
``dual[i]``, so an oriented strand labelled i* is the same as the strand
labelled by the dual label.  A direct sum is an :class:`Obj`, i.e. a tuple
of words; the basis of a sum is the concatenation of the bases of its
summands.

For a word ``w`` and a simple ``k`` the splitting trees ``X_k -> w`` are
right-nested,

    k -> w1 (x) c1,  c1 -> w2 (x) c2,  ...,  c_{n-2} -> w_{n-1} (x) w_n ,

enumerated with internal labels in lexicographic label order.  A morphism
V -> W is stored channel-wise: ``blocks[k]`` is the matrix sending the
splitting trees of V in channel k to combinations of those of W.  All
structure maps (associativity, braiding, (co)evaluations) are realised on
these blocks; composition is blockwise matrix multiplication.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fusion_core import CategoryError, FusionData

__all__ = [
    "Word", "Obj", "as_obj", "parse_word", "dual_word", "HomEngine", "engine",
    "Morph", "MorphismVector",
    "hom_dim", "basis", "compose_at", "pair", "dual_bases", "rotate_z", "resolve_identity",
    "tensor", "compose",
]

Word = tuple  # tuple[int, ...]


@dataclass(frozen=True)
class Obj:
    """Formal direct sum of words."""

    words: tuple

    def __iter__(self):
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __add__(self, other: "Obj") -> "Obj":
        return Obj(self.words + as_obj(other).words)


def as_obj(x) -> Obj:
    """Accept an Obj, a word (tuple of ints) or a list of words."""
    if isinstance(x, Obj):
        return x
    x = tuple(x)
    if all(isinstance(t, (int, np.integer)) for t in x):
        return Obj((tuple(int(t) for t in x),))
    return Obj(tuple(tuple(int(t) for t in w) for w in x))


def parse_word(data: FusionData, spec: str | Sequence) -> Word:
    """Turn ``"tau,tau*"``, ``["sigma", "psi*"]`` or label indices into a word.

    A trailing ``*`` denotes the dual object and is resolved through the
    duality involution.
    """
    if isinstance(spec, str):
        items = [s.strip() for s in spec.replace(" ", ",").split(",") if s.strip()]
    else:
        items = list(spec)
    out = []
    for it in items:
        if isinstance(it, (int, np.integer)):
            out.append(data.index(int(it)))
            continue
        it = str(it)
        flip = 0
        while it.endswith("*"):
            it, flip = it[:-1], flip ^ 1
        i = data.index(it)
        out.append(int(data.dual[i]) if flip else i)
    return tuple(out)


def dual_word(data: FusionData, w: Word) -> Word:
    """Orientation-reversed dual word: (V1 ... Vn)* = Vn* ... V1*."""
    return tuple(int(data.dual[a]) for a in reversed(w))


# ---------------------------------------------------------------------------
# engine with caches
# ---------------------------------------------------------------------------

class HomEngine:
    """Tree bookkeeping and structure maps for one category."""

    def __init__(self, data: FusionData):
        self.data = data
        self.L = data.rank
        self.N = data.fusion
        self._trees: dict = {}
        self._U: dict = {}
        self._braid: dict = {}
        self._dims: dict = {}
        self._layouts: dict = {}

    # -- trees ---------------------------------------------------------
    def trees(self, w: Word, k: int) -> list[tuple]:
        key = (w, k)
        got = self._trees.get(key)
        if got is not None:
            return got
        n = len(w)
        if n == 0:
            out = [()] if self.data.is_unit(k) else []
        elif n == 1:
            out = [()] if w[0] == k else []
        elif n == 2:
            out = [()] if self.N[w[0], w[1], k] else []
        else:
            out = []
            for c in range(self.L):
                if self.N[w[0], c, k]:
                    out.extend((c,) + t for t in self.trees(w[1:], c))
        self._trees[key] = out
        return out

    def ntrees(self, w: Word, k: int) -> int:
        return len(self.trees(w, k))

    def tree_index(self, w: Word, k: int) -> dict:
        return {t: n for n, t in enumerate(self.trees(w, k))}

    def dim(self, X, k: int) -> int:
        key = (X, k)
        try:
            return self._dims[key]
        except (KeyError, TypeError):
            pass
        d = sum(self.ntrees(w, k) for w in as_obj(X))
        try:
            self._dims[key] = d
        except TypeError:
            pass
        return d

    def offsets(self, X, k: int) -> list[int]:
        offs, o = [], 0
        for w in as_obj(X):
            offs.append(o)
            o += self.ntrees(w, k)
        return offs

    # -- basic morphisms ----------------------------------------------
    def zero(self, src, tgt) -> "Morph":
        src, tgt = as_obj(src), as_obj(tgt)
        return Morph(self, src, tgt,
                     [np.zeros((self.dim(tgt, k), self.dim(src, k)), dtype=complex) for k in range(self.L)])

    def identity(self, X) -> "Morph":
        X = as_obj(X)
        return Morph(self, X, X, [np.eye(self.dim(X, k), dtype=complex) for k in range(self.L)])

    def scalar_map(self, src, tgt, values: dict) -> "Morph":
        """Morphism between words with at most one tree per channel, given channel -> scalar."""
        m = self.zero(src, tgt)
        for k, v in values.items():
            m.blocks[k][...] = v
        return m

    # -- re-association -------------------------------------------------
    def _expand(self, v: Word, w: Word, k: int, a: int, b: int, tv: tuple, tw: tuple) -> dict:
        """Coordinates of |k -> a b, a -> tree tv of v, b -> tree tw of w> on canonical trees of v+w."""
        return self._expand_cached(v, w, k, a, b, tv, tw)

    @functools.lru_cache(maxsize=None)
    def _expand_cached(self, v, w, k, a, b, tv, tw):
        F = self.data.F
        vw = v + w
        if len(v) == 0:
            return {tw: 1.0}
        if len(w) == 0:
            return {tv: 1.0}
        if len(v) == 1:
            t = ((b,) + tw) if len(vw) >= 3 else ()
            return {t: 1.0}
        # v = v0 v', a -> v0 (x) a1 with a1 -> tree of v'
        v0, rest = v[0], v[1:]
        if len(v) == 2:
            a1, tv_rest = v[1], ()
        else:
            a1, tv_rest = tv[0], tv[1:]
        out: dict = {}
        for f in range(self.L):
            coef = F[v0, a1, b, k, a, f]
            if coef == 0:
                continue
            sub = self._expand_cached(rest, w, f, a1, b, tv_rest, tw)
            for t, c in sub.items():
                tt = (f,) + t if len(vw) >= 3 else ()
                out[tt] = out.get(tt, 0.0) + coef * c
        return out

    def _product_layout(self, V: Obj, W: Obj, k: int):
        """Ordered product basis of V (x) W in channel k: (a, b, offset, nV_a, nW_b)."""
        key = (V, W, k)
        got = self._layouts.get(key)
        if got is not None:
            return got
        layout, o = [], 0
        for a in range(self.L):
            for b in range(self.L):
                if self.N[a, b, k]:
                    na, nb = self.dim(V, a), self.dim(W, b)
                    if na and nb:
                        layout.append((a, b, o, na, nb))
                        o += na * nb
        self._layouts[key] = (layout, o)
        return layout, o

    def tensor_obj(self, V, W) -> Obj:
        V, W = as_obj(V), as_obj(W)
        return Obj(tuple(v + w for v in V for w in W))

    def U(self, V, W, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Change of basis (product basis -> canonical basis of V(x)W) and its inverse."""
        V, W = as_obj(V), as_obj(W)
        key = (V, W, k)
        got = self._U.get(key)
        if got is not None:
            return got
        layout, n_prod = self._product_layout(V, W, k)
        VW = self.tensor_obj(V, W)
        n_can = self.dim(VW, k)
        if n_can != n_prod:
            raise CategoryError("fusion rules inconsistent: tree counts do not factor")
        M = np.zeros((n_can, n_prod), dtype=complex)
        row_offs = self.offsets(VW, k)
        for (a, b, o, na, nb) in layout:
            offV, offW = self.offsets(V, a), self.offsets(W, b)
            for s, v in enumerate(V):
                tv_list = self.trees(v, a)
                for t, w in enumerate(W):
                    tw_list = self.trees(w, b)
                    if not tv_list or not tw_list:
                        continue
                    idx = self.tree_index(v + w, k)
                    r0 = row_offs[s * len(W) + t]
                    for iv, tv in enumerate(tv_list):
                        for iw, tw in enumerate(tw_list):
                            col = o + (offV[s] + iv) * nb + offW[t] + iw
                            for tt, c in self._expand(v, w, k, a, b, tv, tw).items():
                                M[r0 + idx[tt], col] += c
        Minv = np.linalg.inv(M) if n_can else M.T.copy()
        self._U[key] = (M, Minv)
        return M, Minv

    # -- monoidal product of morphisms ---------------------------------------
    def tensor(self, f: "Morph", g: "Morph") -> "Morph":
        src = self.tensor_obj(f.src, g.src)
        tgt = self.tensor_obj(f.tgt, g.tgt)
        blocks = []
        for k in range(self.L):
            lay_s, ns = self._product_layout(f.src, g.src, k)
            lay_t, nt = self._product_layout(f.tgt, g.tgt, k)
            mid = np.zeros((nt, ns), dtype=complex)
            tpos = {(a, b): o for (a, b, o, _, _) in lay_t}
            for (a, b, o, na, nb) in lay_s:
                if (a, b) not in tpos:
                    continue
                ot = tpos[(a, b)]
                blk = np.kron(f.blocks[a], g.blocks[b])
                mid[ot:ot + blk.shape[0], o:o + blk.shape[1]] = blk
            if ns == 0 or nt == 0:
                blocks.append(np.zeros((nt, ns), dtype=complex))
                continue
            Ut, _ = self.U(f.tgt, g.tgt, k)
            _, Usinv = self.U(f.src, g.src, k)
            blocks.append(Ut @ mid @ Usinv)
        return Morph(self, src, tgt, blocks)

    # -- direct sums -------------------------------------------------------
    def assemble(self, src, tgt, components: dict) -> "Morph":
        """Block morphism from ``{(s, t): Morph(src_s -> tgt_t)}`` between summands."""
        src, tgt = as_obj(src), as_obj(tgt)
        out = self.zero(src, tgt)
        for k in range(self.L):
            so, to = self.offsets(src, k), self.offsets(tgt, k)
            for (s, t), m in components.items():
                b = m.blocks[k]
                if b.size:
                    out.blocks[k][to[t]:to[t] + b.shape[0], so[s]:so[s] + b.shape[1]] += b
        return out

    def component(self, f: "Morph", s: int, t: int) -> "Morph":
        """Restriction of f to summand s of the source and summand t of the target."""
        src, tgt = Obj((f.src.words[s],)), Obj((f.tgt.words[t],))
        blocks = []
        for k in range(self.L):
            so, to = self.offsets(f.src, k), self.offsets(f.tgt, k)
            ns, nt = self.dim(src, k), self.dim(tgt, k)
            blocks.append(f.blocks[k][to[t]:to[t] + nt, so[s]:so[s] + ns].copy())
        return Morph(self, src, tgt, blocks)

    def inclusion(self, X, s: int) -> "Morph":
        X = as_obj(X)
        return self.assemble(Obj((X.words[s],)), X, {(0, s): self.identity(X.words[s])})

    def projection(self, X, s: int) -> "Morph":
        X = as_obj(X)
        return self.assemble(X, Obj((X.words[s],)), {(s, 0): self.identity(X.words[s])})

    # -- duality -------------------------------------------------------------
    def coev_scalar(self, a: int) -> complex:
        d = self.data
        return 1.0 / d.F[a, d.dual[a], a, a, d.sector[a][0], d.sector[a][1]]

    def ev(self, a: int) -> "Morph":
        """ev_a : a* a -> 1."""
        d = self.data
        return self.scalar_map((int(d.dual[a]), a), (), {d.sector[a][1]: 1.0})

    def coev(self, a: int) -> "Morph":
        """coev_a : 1 -> a a*."""
        d = self.data
        return self.scalar_map((), (a, int(d.dual[a])), {d.sector[a][0]: self.coev_scalar(a)})

    def ev_r(self, a: int) -> "Morph":
        """Right evaluation ev'_a : a a* -> 1 (uses the pivotal structure)."""
        d = self.data
        return self.scalar_map((a, int(d.dual[a])), (), {d.sector[a][0]: d.pivotal[a]})

    def coev_r(self, a: int) -> "Morph":
        """Right coevaluation coev'_a : 1 -> a* a."""
        d = self.data
        return self.scalar_map((), (int(d.dual[a]), a),
                               {d.sector[a][1]: self.coev_scalar(int(d.dual[a])) / d.pivotal[a]})

    def ev_word(self, w: Word, right: bool = False) -> "Morph":
        """Nested evaluation w* w -> 1 (or w w* -> 1 when ``right``), innermost pair first."""
        w = tuple(w)
        if not w:
            return self.identity(())
        if right:
            # (V W)(W* V*) -> 1 : ev'_V o (id_V ev'_W id_V*)
            v, rest = w[0], w[1:]
            inner = self.ev_word(rest, right=True)
            mid = self.tensor(self.tensor(self.identity((v,)), inner), self.identity((int(self.data.dual[v]),)))
            return self.ev_r(v) @ mid
        # (W* V*)(V W) -> 1 : ev_W o (id_W* ev_V id_W) with V = w[:-1], W = w[-1]
        v, last = w[:-1], w[-1]
        inner = self.ev_word(v)
        mid = self.tensor(self.tensor(self.identity((int(self.data.dual[last]),)), inner), self.identity((last,)))
        return self.ev(last) @ mid

    def coev_word(self, w: Word, right: bool = False) -> "Morph":
        """Nested coevaluation 1 -> w w* (or 1 -> w* w when ``right``)."""
        w = tuple(w)
        if not w:
            return self.identity(())
        dual = self.data.dual
        if right:
            # 1 -> (W* V*)(V W) with V = w[:-1], W = w[-1]
            v, last = w[:-1], w[-1]
            inner = self.coev_word(v, right=True)
            mid = self.tensor(self.tensor(self.identity((int(dual[last]),)), inner), self.identity((last,)))
            return mid @ self.coev_r(last)
        v, rest = w[0], w[1:]
        inner = self.coev_word(rest)
        mid = self.tensor(self.tensor(self.identity((v,)), inner), self.identity((int(dual[v]),)))
        return mid @ self.coev(v)

    # -- braiding -----------------------------------------------------------
    def braid(self, V, W, inverse: bool = False) -> "Morph":
        """c_{V,W} : V W -> W V, or c^{-1}_{W,V} : V W -> W V when ``inverse``."""
        if self.data.R is None:
            raise CategoryError("braiding requested but category has no R-symbols")
        V, W = as_obj(V), as_obj(W)
        key = (V, W, inverse)
        got = self._braid.get(key)
        if got is not None:
            return got
        if len(V) == 1 and len(W) == 1:
            out = self._braid_words(V.words[0], W.words[0], inverse)
        else:
            comps = {}
            nW = len(W)
            for s, v in enumerate(V):
                for t, w in enumerate(W):
                    comps[(s * nW + t, t * len(V) + s)] = self._braid_words(v, w, inverse)
            out = self.assemble(self.tensor_obj(V, W), self.tensor_obj(W, V), comps)
        self._braid[key] = out
        return out

    def _braid_words(self, v: Word, w: Word, inverse: bool) -> "Morph":
        key = (Obj((v,)), Obj((w,)), inverse)
        got = self._braid.get(key)
        if got is not None:
            return got
        R = self.data.R
        if not v or not w:
            out = self.identity(v + w)
            out = Morph(self, Obj((v + w,)), Obj((w + v,)), out.blocks)
        elif len(v) == 1 and len(w) == 1:
            a, b = v[0], w[0]
            if inverse:
                vals = {k: 1.0 / R[b, a, k] for k in range(self.L) if self.N[a, b, k]}
            else:
                vals = {k: R[a, b, k] for k in range(self.L) if self.N[a, b, k]}
            out = self.scalar_map((a, b), (b, a), vals)
        elif len(v) > 1:
            # c_{A B, C} = (c_{A,C} id_B)(id_A c_{B,C})
            A, B = v[:1], v[1:]
            step1 = self.tensor(self.identity(A), self._braid_words(B, w, inverse))
            step2 = self.tensor(self._braid_words(A, w, inverse), self.identity(B))
            out = step2 @ step1
        else:
            # c_{A, B C} = (id_B c_{A,C})(c_{A,B} id_C)
            B, C = w[:1], w[1:]
            step1 = self.tensor(self._braid_words(v, B, inverse), self.identity(C))
            step2 = self.tensor(self.identity(B), self._braid_words(v, C, inverse))
            out = step2 @ step1
        self._braid[key] = out
        return out

    # -- splitting vertices ----------------------------------------------------
    def vertex(self, w: Word, k: int, n: int) -> "Morph":
        """The n-th canonical splitting tree X_k -> w as a morphism."""
        m = self.zero((k,), w)
        m.blocks[k][n, 0] = 1.0
        return m

    def covertex(self, w: Word, k: int, n: int) -> "Morph":
        """The fusion map w -> X_k dual to :meth:`vertex` (covertex_m o vertex_n = delta_{mn})."""
        m = self.zero(w, (k,))
        m.blocks[k][0, n] = 1.0
        return m


def engine(data: FusionData) -> HomEngine:
    """The (cached) engine attached to a category."""
    eng = getattr(data, "_engine", None)
    if eng is None:
        eng = HomEngine(data)
        data._engine = eng  # type: ignore[attr-defined]
    return eng


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

class Morph:
    """Morphism between direct sums of words, stored channel by channel."""

    __slots__ = ("eng", "src", "tgt", "blocks")

    def __init__(self, eng: HomEngine, src, tgt, blocks: list):
        self.eng = eng
        self.src = as_obj(src)
        self.tgt = as_obj(tgt)
        self.blocks = blocks

    # algebra
    def __matmul__(self, other: "Morph") -> "Morph":
        if other.tgt != self.src:
            raise CategoryError(f"cannot compose: {other.tgt} != {self.src}")
        return Morph(self.eng, other.src, self.tgt, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other: "Morph") -> "Morph":
        self._check_same(other)
        return Morph(self.eng, self.src, self.tgt, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "Morph") -> "Morph":
        self._check_same(other)
        return Morph(self.eng, self.src, self.tgt, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, c) -> "Morph":
        return Morph(self.eng, self.src, self.tgt, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def __neg__(self) -> "Morph":
        return self * -1.0

    def _check_same(self, other: "Morph") -> None:
        if other.src != self.src or other.tgt != self.tgt:
            raise CategoryError("morphisms live in different hom spaces")

    def tensor(self, other: "Morph") -> "Morph":
        return self.eng.tensor(self, other)

    def retarget(self, src=None, tgt=None) -> "Morph":
        """Relabel source/target with an object having identical channel dimensions."""
        src = self.src if src is None else as_obj(src)
        tgt = self.tgt if tgt is None else as_obj(tgt)
        for k in range(self.eng.L):
            if self.eng.dim(src, k) != self.blocks[k].shape[1] or self.eng.dim(tgt, k) != self.blocks[k].shape[0]:
                raise CategoryError("retarget: channel dimensions differ")
        return Morph(self.eng, src, tgt, self.blocks)

    # numerics
    def vec(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks]) if self.blocks else np.zeros(0)

    @classmethod
    def from_vec(cls, eng: HomEngine, src, tgt, v: np.ndarray) -> "Morph":
        src, tgt = as_obj(src), as_obj(tgt)
        blocks, o = [], 0
        for k in range(eng.L):
            shape = (eng.dim(tgt, k), eng.dim(src, k))
            n = shape[0] * shape[1]
            blocks.append(np.asarray(v[o:o + n], dtype=complex).reshape(shape))
            o += n
        return cls(eng, src, tgt, blocks)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks)))

    def dist(self, other: "Morph") -> float:
        self._check_same(other)
        return max((float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks) if a.size),
                   default=0.0)

    def is_invertible(self, tol: float = 1e-10) -> bool:
        for b in self.blocks:
            if b.shape[0] != b.shape[1]:
                return False
            if b.size and np.linalg.svd(b, compute_uv=False).min() < tol:
                return False
        return True

    def inverse(self) -> "Morph":
        return Morph(self.eng, self.tgt, self.src, [np.linalg.inv(b) if b.size else b.T.copy() for b in self.blocks])

    def __repr__(self) -> str:
        return f"Morph({self.src.words} -> {self.tgt.words})"


def tensor(*fs: Morph) -> Morph:
    out = fs[0]
    for f in fs[1:]:
        out = out.eng.tensor(out, f)
    return out


def compose(*fs: Morph) -> Morph:
    """compose(f, g, h) = f o g o h."""
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = f @ out
    return out


# ---------------------------------------------------------------------------
# invariant vectors <V1, ..., Vn>
# ---------------------------------------------------------------------------

@dataclass
class MorphismVector:
    """Element of <word> (or its unit-sector piece) in the canonical tree basis."""

    data: FusionData
    word: Word
    coeffs: np.ndarray
    sector: int | None = None

    def as_morph(self) -> Morph:
        """The morphism 1 -> word (1 the full, possibly multi-component, unit)."""
        eng = engine(self.data)
        m = eng.zero((), self.word)
        o = 0
        for l in self.data.unit_components:
            n = eng.ntrees(self.word, l)
            if self.sector is None:
                m.blocks[l][:, 0] = self.coeffs[o:o + n]
                o += n
            elif l == self.sector:
                m.blocks[l][:, 0] = self.coeffs
        return m

    @classmethod
    def from_morph(cls, m: Morph, sector: int | None = None) -> "MorphismVector":
        """Read off the invariant vector of a morphism 1 -> word."""
        eng = m.eng
        if m.src != Obj(((),)) or len(m.tgt) != 1:
            raise CategoryError("expected a morphism from the unit to a single word")
        units = eng.data.unit_components
        if sector is None:
            parts = []
            for l in units:
                blk = m.blocks[l]
                parts.append(blk[:, 0] if blk.shape[1] else np.zeros(blk.shape[0], dtype=complex))
            coeffs = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
        else:
            coeffs = m.blocks[sector][:, 0].copy()
        return cls(eng.data, m.tgt.words[0], np.asarray(coeffs, dtype=complex), sector)

    def __add__(self, other):
        return MorphismVector(self.data, self.word, self.coeffs + other.coeffs, self.sector)

    def __mul__(self, c):
        return MorphismVector(self.data, self.word, c * self.coeffs, self.sector)

    __rmul__ = __mul__

    def record(self) -> dict:
        return {"word": [self.data.labels[a] for a in self.word],
                "sector": None if self.sector is None else self.data.labels[self.sector],
                "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs]}


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def hom_dim(data: FusionData, w1, w2) -> int:
    """dim Hom(w1, w2) computed from fusion-matrix products."""
    w1, w2 = as_obj(w1), as_obj(w2)
    N = data.fusion

    def multiplicities(w: Word) -> np.ndarray:
        vec = np.zeros(data.rank, dtype=np.int64)
        for u in data.unit_components:
            vec[u] = 1
        for a in w:
            vec = np.einsum("i,ik->k", vec, N[:, a, :])
        return vec

    tot1 = sum(multiplicities(w) for w in w1)
    tot2 = sum(multiplicities(w) for w in w2)
    return int(np.dot(tot1, tot2))


def basis(data: FusionData, w: Word, sector: int | None = None) -> list[MorphismVector]:
    """Canonical tree basis of <w> (or of <w>_l), unit components in label order."""
    eng = engine(data)
    units = data.unit_components if sector is None else (sector,)
    total = sum(eng.ntrees(w, l) for l in units)
    out, o = [], 0
    for l in units:
        for _ in eng.trees(w, l):
            c = np.zeros(total, dtype=complex)
            c[o] = 1.0
            out.append(MorphismVector(data, tuple(w), c, sector))
            o += 1
    return out


def compose_at(phi: MorphismVector, psi: MorphismVector, X: Word) -> MorphismVector:
    """phi o_X psi: contract the trailing X of phi with the leading X* of psi."""
    data = phi.data
    eng = engine(data)
    X = tuple(X)
    n = len(X)
    if tuple(phi.word[len(phi.word) - n:]) != X or tuple(psi.word[:n]) != dual_word(data, X):
        raise CategoryError("word mismatch at the contraction interface")
    v, w = phi.word[:len(phi.word) - n], psi.word[n:]
    prod = eng.tensor(phi.as_morph(), psi.as_morph())
    contract = tensor(eng.identity(v), eng.ev_word(X, right=True), eng.identity(w))
    res = (contract @ prod.retarget(src=((),)))
    return MorphismVector.from_morph(res)


def _unit_to_unit(m: Morph) -> Morph:
    return m.retarget(src=((),))


def pair(phi: MorphismVector, psi: MorphismVector) -> np.ndarray:
    """Full closure of phi in <V1..Vn> against psi in <Vn*..V1*>, as a vector over Irr_0."""
    data = phi.data
    if tuple(psi.word) != dual_word(data, phi.word):
        raise CategoryError("pair: words are not reversal-duals of each other")
    res = compose_at(phi, psi, phi.word)
    out = np.zeros(len(data.unit_components), dtype=complex)
    m = res.as_morph()
    for n, l in enumerate(data.unit_components):
        if m.blocks[l].size:
            out[n] = m.blocks[l][0, 0]
    return out


def pair_scalar(phi: MorphismVector, psi: MorphismVector) -> complex:
    return complex(np.sum(pair(phi, psi)))


def gram(data: FusionData, w: Word, sector: int) -> np.ndarray:
    """Gram matrix of the sector-restricted pairing between tree bases."""
    B1 = basis(data, w, sector)
    B2 = basis(data, dual_word(data, w), sector)
    return np.array([[pair_scalar(a, b) for b in B2] for a in B1], dtype=complex)


_DUAL_CACHE: dict = {}


def dual_bases(data: FusionData, w: Word) -> list[tuple[int, list[MorphismVector], list[MorphismVector]]]:
    """Per unit component l: tree basis of <w>_l and the dual basis of <w*>_l."""
    key = (id(data), tuple(w))
    if key in _DUAL_CACHE:
        return _DUAL_CACHE[key]
    out = []
    wd = dual_word(data, w)
    for l in data.unit_components:
        B1 = basis(data, w, l)
        if not B1:
            continue
        G = gram(data, w, l)
        s = np.linalg.svd(G, compute_uv=False)
        if s.min() < 1e-12 * s.max():
            raise CategoryError("Gram matrix of the pairing is numerically singular")
        # want duals b^beta with pair(b_alpha, b^beta) = delta: b^beta = sum_c X[c, beta] e_c, G X = I
        Xm = np.linalg.inv(G)
        B2 = basis(data, wd, l)
        duals = []
        for beta in range(len(B1)):
            c = sum(Xm[cidx, beta] * B2[cidx].coeffs for cidx in range(len(B2)))
            duals.append(MorphismVector(data, wd, c, l))
        out.append((l, B1, duals))
    _DUAL_CACHE[key] = out
    return out


def rotate_z(phi: MorphismVector, times: int = 1) -> MorphismVector:
    """Cyclic rotation <V1..Vn> -> <Vn, V1..V_{n-1}> built from coev and ev'."""
    data = phi.data
    eng = engine(data)
    times %= max(len(phi.word), 1)
    for _ in range(times):
        w = phi.word
        if len(w) <= 1:
            return phi
        head, last = w[:-1], w[-1]
        lastd = int(data.dual[last])
        # f : last* -> head,  f = (id_head (x) ev'_last) o (phi (x) id_last*)
        f = tensor(eng.identity(head), eng.ev_r(last)) @ tensor(phi.as_morph(), eng.identity((lastd,))).retarget(src=((lastd,),))
        res = tensor(eng.identity((last,)), f) @ eng.coev(last)
        phi = MorphismVector.from_morph(res)
    return phi


def dual_morph(f: Morph) -> Morph:
    """The mate f*: W* -> V* of f: V -> W, built from ev' and coev'.

    It is characterized by ev'_W o (f (x) id_W*) = ev'_V o (id_V (x) f*),
    which is what makes the pairing of invariant vectors adjoint.
    """
    eng = f.eng
    data = eng.data
    (v,), (w,) = f.src.words, f.tgt.words
    vd, wd = dual_word(data, v), dual_word(data, w)
    m = tensor(eng.coev_word(v, right=True), eng.identity(wd)).retarget(src=(wd,))
    m = tensor(eng.identity(vd), f, eng.identity(wd)) @ m
    return tensor(eng.identity(vd), eng.ev_word(w, right=True)) @ m


def bend(f: Morph) -> MorphismVector:
    """Hom(w1, w2) -> <w2, w1*> via right coevaluation on w1."""
    eng = f.eng
    (w1,) = f.src.words
    wd = dual_word(eng.data, w1)
    # coev'_{w1*}: 1 -> w1 w1*  is coev_word(w1)
    res = tensor(f, eng.identity(wd)) @ eng.coev_word(w1)
    return MorphismVector.from_morph(res)


def unbend(vec: MorphismVector, w1: Word) -> Morph:
    """Inverse of :func:`bend`: <w2, w1*> -> Hom(w1, w2) via ev'."""
    data = vec.data
    eng = engine(data)
    n = len(w1)
    w2 = vec.word[:len(vec.word) - n]
    wd = vec.word[len(vec.word) - n:]
    if wd != dual_word(data, w1):
        raise CategoryError("unbend: word does not end in the dual of the source")
    # w1 -> (w2 w1*) w1 -> w2 using ev on (w1* w1)
    step = tensor(vec.as_morph(), eng.identity(w1)).retarget(src=(tuple(w1),))
    return tensor(eng.identity(w2), eng.ev_word(w1)) @ step


def resolve_identity(data: FusionData, w: Word, mode: str = "R") -> list[tuple[int, complex, Morph, Morph]]:
    """Terms (i, c_i, top, bottom) with  sum c_i * top o bottom = id_w.

    ``top: X_i -> w`` and ``bottom: w -> X_i``.  In mode ``"R"`` the weights
    are right dimensions and the vertices are bent from dual bases of
    <X_i*, w> and <w*, X_i>; in mode ``"L"`` the weights are left dimensions
    and the vertices come from <w, X_i*> and <X_i, w*>.  Mode ``"tree"`` uses
    the canonical splitting/fusion trees with unit weights.
    """
    eng = engine(data)
    w = tuple(w)
    cache = eng.__dict__.setdefault("_resolutions", {})
    if (w, mode) in cache:
        return list(cache[(w, mode)])
    dual = data.dual
    out = []
    if mode == "tree":
        for i in range(data.rank):
            for n in range(eng.ntrees(w, i)):
                out.append((i, 1.0, eng.vertex(w, i, n), eng.covertex(w, i, n)))
        return out
    for i in range(data.rank):
        if eng.ntrees(w, i) == 0:
            continue
        idd = int(dual[i])
        if mode == "R":
            weight = data.dim_right[i]
            for l, B1, B2 in dual_bases(data, (idd,) + w):
                for phi, phid in zip(B1, B2):
                    # top: X_i -> w = (ev'_i (x) id_w) o (id_i (x) phi)
                    top = tensor(eng.ev_r(i), eng.identity(w)) @ tensor(eng.identity((i,)), phi.as_morph()).retarget(src=((i,),))
                    # bottom: w -> X_i = (ev'_{w} (x) id_i) o (id_w (x) phi^alpha)
                    bot = tensor(eng.ev_word(w, right=True), eng.identity((i,))) @ \
                        tensor(eng.identity(w), phid.as_morph()).retarget(src=(w,))
                    # the last leg of phi^alpha is X_i** in the pairing; back to X_i via the pivotal map
                    bot = bot * (1.0 / data.pivotal[i])
                    out.append((i, weight, top, bot))
        elif mode == "L":
            weight = data.dim_left[i]
            for l, B1, B2 in dual_bases(data, w + (idd,)):
                for phi, phid in zip(B1, B2):
                    # top: X_i -> w = (id_w (x) ev_{i}) o (phi (x) id_i)
                    top = tensor(eng.identity(w), eng.ev(i)) @ tensor(phi.as_morph(), eng.identity((i,))).retarget(src=((i,),))
                    # bottom: w -> X_i = (id_i (x) ev_w) o (phi^alpha (x) id_w)
                    bot = tensor(eng.identity((i,)), eng.ev_word(w)) @ tensor(phid.as_morph(), eng.identity(w)).retarget(src=(w,))
                    bot = bot * (1.0 / data.pivotal[i])
                    out.append((i, weight, top, bot))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    cache[(w, mode)] = out
    return list(out)


def identity_residual(data: FusionData, w: Word, mode: str = "R") -> float:
    """max |sum c_i top o bottom - id_w| for :func:`resolve_identity`."""
    eng = engine(data)
    acc = eng.zero(w, w)
    for _, c, top, bot in resolve_identity(data, w, mode):
        acc = acc + c * (top @ bot)
    return acc.dist(eng.identity(w))
