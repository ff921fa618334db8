"""A small textual language for planar (and braided) string diagrams.

A diagram is read top to bottom as a sequence of *slices*; each slice is a
horizontal list of generators.  Slices are separated by ``;`` or by a line
break, generators inside a slice by ``|``::

    coev(tau) ; ev'(tau)                 # a closed tau loop
    id(sigma) | coev(psi) ; x(sigma,psi) | id(psi*)

Generators
    ``id(l)``          identity on one strand (``l*`` for the dual)
    ``idw(l1 l2 ...)`` identity on a word
    ``ev(l)``          l* l -> 1            ``coev(l)``   1 -> l l*
    ``ev'(l)``         l l* -> 1            ``coev'(l)``  1 -> l* l
    ``x(a,b)``         a b -> b a, the ``\\`` strand (a) over the ``/`` strand
    ``xi(a,b)``        a b -> b a, the ``/`` strand (b) over
    ``pivotal(l)``     the pivotal isomorphism l -> l** = l
    ``dash(n)``        identity on the dashed strand ``~n``
    ``v(name)``        coupon bound through the sidecar table

Labels are category labels (or their indices), optionally followed by ``*``.
A label ``~n`` names a dashed edge: at evaluation every dashed edge is
expanded as the sum over simples ``i`` weighted by ``d_i^R``.  ``#`` starts a
comment.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fusion_core import CategoryError, FusionData
from .hom_engine import Morph, MorphismVector, bend, engine, tensor

__all__ = [
    "DiagramError", "ParseError", "Dashed", "Generator", "Diagram", "EvalResult",
    "parse", "typecheck", "evaluate", "evaluate_sum", "reslice", "to_text",
    "loop_value", "dashed_circle", "sliding_residual",
]

GREEK = {"τ": "tau", "σ": "sigma", "ψ": "psi", "ε": "eps", "φ": "phi", "𝟙": "1"}


class DiagramError(CategoryError):
    """Evaluation or binding error for a diagram."""


class ParseError(DiagramError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line, self.col = line, col


@dataclass(frozen=True)
class Dashed:
    """A dashed edge ``~name`` (``dual`` for the reversed orientation)."""

    name: str
    dual: bool = False

    def flip(self) -> "Dashed":
        return Dashed(self.name, not self.dual)

    def __str__(self) -> str:
        return f"~{self.name}" + ("*" if self.dual else "")


@dataclass
class Generator:
    kind: str
    args: tuple
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.args))})"


@dataclass
class Diagram:
    slices: list
    source: str = ""

    @property
    def depth(self) -> int:
        return len(self.slices)


@dataclass
class EvalResult:
    value: MorphismVector
    morph: Morph


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) |
    (?P<comment>\#[^\n]*) |
    (?P<nl>\n) |
    (?P<semi>;) |
    (?P<bar>\|) |
    (?P<lp>\() |
    (?P<rp>\)) |
    (?P<comma>,) |
    (?P<name>~?[^\s;|(),#*~']+'?\**)
""", re.VERBOSE)

GENERATORS = {
    "id": 1, "idw": None, "ev": 1, "coev": 1, "ev'": 1, "coev'": 1,
    "x": 2, "xi": 2, "cross_over": 2, "cross_under": 2, "pivotal": 1, "dash": 1, "v": 1,
}


def _tokens(text: str):
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, m.group(), line, col
        if kind == "nl":
            line, col = line + 1, 1
        else:
            col += len(m.group())
        pos = m.end()
    yield "eof", "", line, col


def parse(text: str) -> Diagram:
    """Parse DSL text into a :class:`Diagram` (labels are resolved later)."""
    toks = list(_tokens(text))
    pos = 0
    slices: list[list[Generator]] = []
    current: list[Generator] = []
    expect_gen = True

    def peek():
        return toks[pos]

    while True:
        kind, val, line, col = peek()
        if kind == "eof":
            if current:
                slices.append(current)
            elif not expect_gen or (slices and not current and toks[pos - 1][0] == "bar"):
                pass
            if pos > 0 and toks[pos - 1][0] == "bar":
                raise ParseError("syntax error at EOF: generator expected after '|'", line, col)
            break
        if kind in ("semi", "nl"):
            if current:
                slices.append(current)
            elif kind == "semi" and pos > 0 and toks[pos - 1][0] == "bar":
                raise ParseError("generator expected after '|'", line, col)
            current, expect_gen = [], True
            pos += 1
            continue
        if kind == "bar":
            if not current or expect_gen:
                raise ParseError("'|' must separate two generators", line, col)
            expect_gen = True
            pos += 1
            continue
        if kind != "name":
            raise ParseError(f"unexpected {val!r}", line, col)
        if not expect_gen:
            raise ParseError("missing '|' between generators", line, col)
        gname = val
        if gname not in GENERATORS:
            raise ParseError(f"unknown generator {gname!r}", line, col)
        pos += 1
        k2, v2, l2, c2 = peek()
        if k2 == "eof":
            raise ParseError("syntax error at EOF: '(' expected", l2, c2)
        if k2 != "lp":
            raise ParseError(f"'(' expected after {gname}", l2, c2)
        pos += 1
        args: list[str] = []
        while True:
            k3, v3, l3, c3 = peek()
            if k3 == "eof":
                raise ParseError("syntax error at EOF: unclosed '('", l3, c3)
            if k3 == "rp":
                pos += 1
                break
            if k3 == "comma":
                pos += 1
                continue
            if k3 != "name":
                raise ParseError(f"label expected, got {v3!r}", l3, c3)
            args.append(v3)
            pos += 1
        arity = GENERATORS[gname]
        if arity is not None and len(args) != arity:
            raise ParseError(f"{gname} takes {arity} argument(s), got {len(args)}", line, col)
        if arity is None and not args:
            raise ParseError(f"{gname} needs at least one label", line, col)
        current.append(Generator(gname, tuple(args), line, col))
        expect_gen = False
    return Diagram(slices, text)


def to_text(d: Diagram) -> str:
    """Render a diagram back to DSL text (one slice per line)."""
    def g2s(g: Generator) -> str:
        return f"{g.kind}({','.join(str(a) for a in g.args)})"
    return "\n".join(" | ".join(g2s(g) for g in s) for s in d.slices) + "\n"


# ---------------------------------------------------------------------------
# typing
# ---------------------------------------------------------------------------

def _label(data: FusionData, tok, g: Generator):
    if isinstance(tok, (int, np.integer, Dashed)):
        return tok
    s = str(tok)
    flip = False
    while s.endswith("*"):
        s, flip = s[:-1], not flip
    if s.startswith("~"):
        return Dashed(s[1:], flip)
    s = GREEK.get(s, s)
    try:
        i = data.index(int(s)) if s.isdigit() and s not in data.labels else data.index(s)
    except CategoryError:
        raise ParseError(f"unknown label {tok!r}; known labels: {', '.join(data.labels)}", g.line, g.col) from None
    return int(data.dual[i]) if flip else i


def _dual(data, a):
    return a.flip() if isinstance(a, Dashed) else int(data.dual[a])


def _signature(data: FusionData, g: Generator, coupons: Mapping | None):
    """(source word, target word) of a generator, with Dashed symbols allowed."""
    k = g.kind
    if k == "v":
        name = g.args[0]
        if coupons is None or name not in coupons:
            raise DiagramError(f"unbound coupon {name!r} (line {g.line}, column {g.col})")
        m = _coupon_morph(data, coupons[name])
        return tuple(m.src.words[0]), tuple(m.tgt.words[0])
    if k == "dash":
        d = Dashed(str(g.args[0]).lstrip("~").rstrip("*"), str(g.args[0]).endswith("*"))
        return (d,), (d,)
    labs = [_label(data, a, g) for a in g.args]
    if k in ("id", "pivotal", "idw"):
        return tuple(labs), tuple(labs)
    a = labs[0]
    if k == "ev":
        return (_dual(data, a), a), ()
    if k == "coev":
        return (), (a, _dual(data, a))
    if k == "ev'":
        return (a, _dual(data, a)), ()
    if k == "coev'":
        return (), (_dual(data, a), a)
    if k in ("x", "xi", "cross_over", "cross_under"):
        b = labs[1]
        return (a, b), (b, a)
    raise DiagramError(f"unknown generator {k!r}")


def _coupon_morph(data: FusionData, c) -> Morph:
    if isinstance(c, Morph):
        return c
    if isinstance(c, MorphismVector):
        return c.as_morph()
    raise DiagramError(f"coupon must be a Morph or MorphismVector, got {type(c).__name__}")


def _slice_signature(data, sl, coupons):
    src, tgt = (), ()
    for g in sl:
        s, t = _signature(data, g, coupons)
        src, tgt = src + s, tgt + t
    return src, tgt


def _fmt(data, w):
    return "[" + ", ".join(str(a) if isinstance(a, Dashed) else data.labels[a] for a in w) + "]"


def typecheck(d: Diagram, data: FusionData, coupons: Mapping | None = None) -> list[str]:
    """List of interface mismatches (empty list means the diagram is well typed)."""
    problems = []
    prev = None
    for n, sl in enumerate(d.slices):
        try:
            src, tgt = _slice_signature(data, sl, coupons)
        except CategoryError as e:
            problems.append(f"slice {n + 1}: {e}")
            prev = None
            continue
        if prev is not None and prev != src:
            g = sl[0]
            problems.append(f"slice {n + 1} (line {g.line}): expects {_fmt(data, src)} "
                            f"but receives {_fmt(data, prev)}")
        prev = tgt
    return problems


def boundary(d: Diagram, data: FusionData, coupons: Mapping | None = None) -> tuple[tuple, tuple]:
    if not d.slices:
        return (), ()
    return _slice_signature(data, d.slices[0], coupons)[0], _slice_signature(data, d.slices[-1], coupons)[1]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _dashed_names(data, d: Diagram, coupons) -> list[str]:
    names = []
    for sl in d.slices:
        for g in sl:
            s, t = _signature(data, g, coupons)
            for a in s + t:
                if isinstance(a, Dashed) and a.name not in names:
                    names.append(a.name)
    return names


def _subst(data, w, colors):
    out = []
    for a in w:
        if isinstance(a, Dashed):
            i = colors[a.name]
            out.append(int(data.dual[i]) if a.dual else i)
        else:
            out.append(a)
    return tuple(out)


def _gen_morph(data: FusionData, g: Generator, coupons, colors) -> Morph:
    eng = engine(data)
    k = g.kind
    if k == "v":
        return _coupon_morph(data, coupons[g.args[0]])
    src, _ = _signature(data, g, coupons)
    src = _subst(data, src, colors)
    if k in ("id", "idw", "dash"):
        return eng.identity(src)
    if k == "pivotal":
        return eng.identity(src) * data.pivotal[src[0]]
    if k == "ev":
        return eng.ev(src[1])
    if k == "coev":
        return eng.coev(_subst(data, (_label(data, g.args[0], g),), colors)[0])
    if k == "ev'":
        return eng.ev_r(src[0])
    if k == "coev'":
        return eng.coev_r(_subst(data, (_label(data, g.args[0], g),), colors)[0])
    if k in ("x", "xi", "cross_over", "cross_under"):
        if not data.braided:
            raise DiagramError(f"crossing {g} in a category without braiding (line {g.line})")
        return eng.braid((src[0],), (src[1],), inverse=k in ("xi", "cross_under"))
    raise DiagramError(f"unknown generator {k!r}")


def _evaluate_colored(data, d: Diagram, coupons, colors) -> Morph:
    eng = engine(data)
    total = None
    for sl in d.slices:
        layer = tensor(*[_gen_morph(data, g, coupons, colors) for g in sl])
        total = layer if total is None else layer @ total
    if total is None:
        total = eng.identity(())
    return total


def evaluate(d: Diagram | str, data: FusionData, coupons: Mapping | None = None) -> EvalResult:
    """Evaluate a diagram to a morphism and to its vector in <target, source*>."""
    if isinstance(d, str):
        d = parse(d)
    problems = typecheck(d, data, coupons)
    if problems:
        raise DiagramError("diagram does not typecheck: " + "; ".join(problems))
    names = _dashed_names(data, d, coupons)
    total = None
    for cols in itertools.product(range(data.rank), repeat=len(names)):
        colors = dict(zip(names, cols))
        w = np.prod([data.dim_right[i] for i in cols]) if cols else 1.0
        m = _evaluate_colored(data, d, coupons, colors) * w
        total = m if total is None else total + m
    return EvalResult(_as_vector(total), total)


def _as_vector(m: Morph) -> MorphismVector:
    (w1,), _ = m.src.words, m.tgt.words
    if not w1:
        return MorphismVector.from_morph(m)
    return bend(m)


def evaluate_sum(terms: Sequence[tuple[complex, Diagram]], data: FusionData,
                 coupons: Mapping | None = None) -> EvalResult:
    """Evaluate a formal linear combination of diagrams with a common boundary."""
    total = None
    for c, d in terms:
        m = evaluate(d, data, coupons).morph * c
        total = m if total is None else total + m
    return EvalResult(_as_vector(total), total)


# ---------------------------------------------------------------------------
# re-slicing
# ---------------------------------------------------------------------------

def _width(data, g, coupons):
    s, t = _signature(data, g, coupons)
    return len(s), len(t)


def _id_gens(data, word) -> list[Generator]:
    out = []
    for a in word:
        if isinstance(a, Dashed):
            out.append(Generator("dash", (str(a)[1:],)))
        else:
            out.append(Generator("id", (data.labels[int(a)],)))
    return out


def reslice(d: Diagram, data: FusionData, rng: np.random.Generator, coupons: Mapping | None = None,
            moves: int = 3) -> tuple[list[tuple[complex, Diagram]], dict]:
    """A random re-slicing of ``d`` as a linear combination of diagrams.

    Two kinds of moves are applied: splitting a slice into two by the
    interchange law, and inserting an (F-move, inverse F-move) pair, i.e. a
    sum over fusion channels of a splitting vertex under its fusion vertex, on
    two adjacent strands.  Returns the terms and an enlarged coupon table.
    """
    eng = engine(data)
    coupons = dict(coupons or {})
    terms: list[tuple[complex, Diagram]] = [(1.0, Diagram([list(s) for s in d.slices]))]
    for mv in range(moves):
        kind = int(rng.integers(2))
        new_terms = []
        if kind == 0:
            # all terms share one slice structure, so a single random split applies to each
            base = terms[0][1]
            cands = [n for n, s in enumerate(base.slices) if len(s) >= 2]
            if not cands:
                continue
            n = cands[int(rng.integers(len(cands)))]
            cut = int(rng.integers(1, len(base.slices[n])))
            for c, dd in terms:
                sl = dd.slices[n]
                src, tgt = _slice_signature(data, sl, coupons)
                left_tgt = _slice_signature(data, sl[:cut], coupons)[1]
                right_src = _slice_signature(data, sl[cut:], coupons)[0]
                first = sl[:cut] + _id_gens(data, right_src)
                second = _id_gens(data, left_tgt) + sl[cut:]
                if not first:
                    first = _id_gens(data, src)
                new = dd.slices[:n] + [x for x in (first, second) if x] + dd.slices[n + 1:]
                new_terms.append((c, Diagram(new)))
            terms = new_terms
            continue
        # insert an F-move pair on two adjacent colored strands at a random cut
        base = terms[0][1]
        cuts = []
        for n in range(len(base.slices) + 1):
            w = _slice_signature(data, base.slices[n], coupons)[0] if n < len(base.slices) else \
                _slice_signature(data, base.slices[-1], coupons)[1] if base.slices else ()
            for p in range(len(w) - 1):
                if not isinstance(w[p], Dashed) and not isinstance(w[p + 1], Dashed):
                    cuts.append((n, p, w))
        if not cuts:
            continue
        n, p, w = cuts[int(rng.integers(len(cuts)))]
        pair = (int(w[p]), int(w[p + 1]))
        for c, dd in terms:
            for k in range(data.rank):
                for t in range(eng.ntrees(pair, k)):
                    top = f"_f{mv}_{k}_{t}_up"
                    bot = f"_f{mv}_{k}_{t}_dn"
                    coupons[bot] = eng.covertex(pair, k, t)
                    coupons[top] = eng.vertex(pair, k, t)
                    pre = _id_gens(data, w[:p])
                    post = _id_gens(data, w[p + 2:])
                    s1 = pre + [Generator("v", (bot,))] + post
                    s2 = pre + [Generator("v", (top,))] + post
                    new_terms.append((c, Diagram(dd.slices[:n] + [s1, s2] + dd.slices[n:])))
        terms = new_terms
    return terms, coupons


# ---------------------------------------------------------------------------
# standard pictures
# ---------------------------------------------------------------------------

def loop_value(data: FusionData, label, clockwise: bool = False) -> complex:
    """Value of a closed loop colored by a simple; the two orientations give d^L and d^R."""
    i = data.labels[data.index(label)]
    text = f"coev'({i}) ; ev({i})" if clockwise else f"coev({i}) ; ev'({i})"
    m = evaluate(text, data).morph
    return complex(sum(b[0, 0] for l, b in enumerate(m.blocks) if b.size and data.is_unit(l))
                   / len(data.unit_components))


def dashed_circle(data: FusionData, clockwise: bool = False) -> Morph:
    """The d^R-weighted dashed circle as an endomorphism of the unit."""
    text = "coev'(~a) ; ev(~a)" if clockwise else "coev(~a) ; ev'(~a)"
    return evaluate(text, data).morph


def sliding_residual(data: FusionData, word, clockwise: bool = False,
                     coupon: Morph | None = None) -> float:
    """Slide a strand (colored by ``word``) across a dashed circle with shaded contents.

    The left picture has the strand to the left of the circle, the right
    picture to its right.  After sliding, the circle is traversed from the
    other side, so it is evaluated with the opposite bending (the circle's
    orientation relative to the strand is preserved).  The two pictures
    agree for the counter-clockwise circle; for the clockwise one they agree
    only when the category is spherical.  ``coupon`` fills the shaded slot
    on the strand.
    """
    eng = engine(data)
    w = tuple(word)
    g = coupon if coupon is not None else eng.identity(w)
    inner = "coev(~a) ; ev'(~a)" if not clockwise else "coev'(~a) ; ev(~a)"
    mirrored = "coev'(~a) ; ev(~a)" if not clockwise else "coev(~a) ; ev'(~a)"
    circ_l = evaluate(inner, data).morph
    circ_r = evaluate(mirrored if clockwise else inner, data).morph
    left = tensor(g, circ_l)
    right = tensor(circ_r, g)
    # both are endomorphisms of w; compare
    return left.dist(right.retarget(src=left.src, tgt=left.tgt))
