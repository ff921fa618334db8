"""Skeletal fusion-category data: loading, validation and dimensions.

A category is stored skeletally.  Simple objects are integer indices into
``FusionData.labels``, and the associator is given by F-symbols acting on
fusion trees with the convention

    |d -> e c, e -> a b>  =  sum_f  F[a,b,c,d,e,f] |d -> a f, f -> b c>

that is, ``F[a,b,c,d]`` is the matrix re-associating ((a b) c -> d via e) to
(a (b c) -> d via f).  R-symbols give the braiding on a fusion vertex,

    c_{a,b} |c -> a b>  =  R[a,b,c] |c -> b a>.

Multiplicity indices are accepted in the file format, but the engine only
works with multiplicity-free data and refuses anything else.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "CategoryError",
    "FusionData",
    "ResidualReport",
    "load_category",
    "category_to_document",
    "check_pentagon",
    "check_hexagon",
    "compute_dimensions",
    "DEFAULT_EPS",
]

DEFAULT_EPS = 1e-9


class CategoryError(ValueError):
    """Raised for malformed or inconsistent category data."""


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of a polynomial-identity check over all admissible instances."""

    name: str
    max_residual: float
    worst_instance: tuple | None
    n_instances: int
    eps: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual < self.eps)

    def as_record(self) -> dict:
        return {
            "check": self.name,
            "max_residual": float(self.max_residual),
            "worst_instance": None if self.worst_instance is None else list(self.worst_instance),
            "instances": int(self.n_instances),
            "passed": self.passed,
        }


@dataclass(eq=False)
class FusionData:
    """Immutable skeletal (multi)fusion category, optionally braided.

    Attributes mirror the on-disk format; derived quantities (sector map,
    dimension arrays, global dimension) are filled in by
    :func:`load_category`.
    """

    name: str
    labels: tuple[str, ...]
    unit_components: tuple[int, ...]
    dual: np.ndarray                 # int array, i -> i*
    fusion: np.ndarray               # N[i, j, k]
    F: np.ndarray                    # complex, shape (L,)*6
    R: np.ndarray | None             # complex, shape (L,)*3, or None
    pivotal: np.ndarray              # delta_i
    dim_left: np.ndarray
    dim_right: np.ndarray
    sqrt_dim_left: np.ndarray = field(default=None)   # type: ignore[assignment]
    sqrt_dim_right: np.ndarray = field(default=None)  # type: ignore[assignment]
    sector: tuple[tuple[int, int], ...] = ()          # (k_i, l_i) per label
    global_dim: complex = 1.0
    source_hash: str = ""

    # -- basic accessors -------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def braided(self) -> bool:
        return self.R is not None

    @property
    def is_fusion(self) -> bool:
        return len(self.unit_components) == 1

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= int(label) < self.rank:
                raise CategoryError(f"label index {label} out of range")
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise CategoryError(
                f"unknown label {label!r}; known labels: {', '.join(self.labels)}") from None

    def is_unit(self, i: int) -> bool:
        return i in self.unit_components

    def Nijk(self, i: int, j: int, k: int) -> int:
        return int(self.fusion[i, j, k])

    def channels(self, i: int, j: int) -> list[int]:
        """Simple labels k with N[i, j, k] > 0, in label order."""
        return [k for k in range(self.rank) if self.fusion[i, j, k]]

    def F_matrix(self, a: int, b: int, c: int, d: int) -> tuple[np.ndarray, list[int], list[int]]:
        """The admissible block of F[a,b,c,d] together with its row/column labels."""
        es = [e for e in range(self.rank) if self.fusion[a, b, e] and self.fusion[e, c, d]]
        fs = [f for f in range(self.rank) if self.fusion[b, c, f] and self.fusion[a, f, d]]
        return self.F[a, b, c, d][np.ix_(es, fs)], es, fs

    def fingerprint(self) -> str:
        return self.source_hash


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _cplx(rec: Mapping[str, Any]) -> complex:
    try:
        return complex(float(rec["re"]), float(rec.get("im", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise CategoryError(f"malformed complex number record {rec!r}") from exc


def load_category(document: str | Mapping[str, Any], *, eps: float = DEFAULT_EPS) -> FusionData:
    """Parse and validate a category document (JSON text or an already-parsed mapping).

    Structural invariants (shapes, involutive duality, unit axioms, sectors)
    and the stored dimensions are verified; pentagon/hexagon residuals are
    left to :func:`check_pentagon` / :func:`check_hexagon`.
    """
    if isinstance(document, (str, bytes)):
        text = document.decode() if isinstance(document, bytes) else document
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CategoryError(f"malformed document: {exc}") from exc
    else:
        doc = dict(document)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()[:16]

    for key in ("name", "labels", "unit", "dual", "fusion", "pivotal", "dims"):
        if key not in doc:
            raise CategoryError(f"malformed document: missing key {key!r}")
    labels = tuple(str(x) for x in doc["labels"])
    if len(set(labels)) != len(labels) or not labels:
        raise CategoryError("labels must be a non-empty list of distinct strings")
    L = len(labels)
    idx = {lab: n for n, lab in enumerate(labels)}

    def lab(x: Any) -> int:
        if str(x) not in idx:
            raise CategoryError(f"unknown label {x!r}")
        return idx[str(x)]

    units = tuple(sorted(lab(u) for u in doc["unit"]))
    if not units:
        raise CategoryError("at least one unit component is required")

    dual = np.full(L, -1, dtype=int)
    for k, v in doc["dual"].items():
        dual[lab(k)] = lab(v)
    if (dual < 0).any():
        raise CategoryError("dual not involution-compatible with fusion: map must be defined on every label")
    if not np.array_equal(dual[dual], np.arange(L)):
        raise CategoryError("dual not involution-compatible with fusion: map is not an involution")

    N = np.zeros((L, L, L), dtype=int)
    for key, out in doc["fusion"].items():
        parts = [p.strip() for p in str(key).split(",")]
        if len(parts) != 2:
            raise CategoryError(f"fusion key {key!r} must have the form 'i,j'")
        i, j = lab(parts[0]), lab(parts[1])
        if not isinstance(out, Mapping):
            raise CategoryError(f"fusion entry {key!r} must map labels to multiplicities")
        for k, m in out.items():
            m = int(m)
            if m < 0:
                raise CategoryError("fusion multiplicities must be non-negative")
            N[i, j, lab(k)] = m
    if N.max() > 1:
        raise CategoryError("fusion multiplicities > 1 are not supported by this engine")

    braided = bool(doc.get("braided", False))
    F = np.zeros((L,) * 6, dtype=complex)
    for rec in doc.get("F", []):
        if any(int(rec.get(m, 0)) != 0 for m in ("mu", "nu", "rho", "sigma")):
            raise CategoryError("nonzero multiplicity index in F record; multiplicity-free data required")
        a, b, c, d, e, f = (lab(rec[k]) for k in "abcdef")
        F[a, b, c, d, e, f] = _cplx(rec)
    R = None
    if braided:
        if "R" not in doc:
            raise CategoryError("missing R-symbols for a category declared braided")
        R = np.zeros((L,) * 3, dtype=complex)
        for rec in doc["R"]:
            if any(int(rec.get(m, 0)) != 0 for m in ("mu", "nu")):
                raise CategoryError("nonzero multiplicity index in R record")
            R[lab(rec["a"]), lab(rec["b"]), lab(rec["c"])] = _cplx(rec)

    pivotal = np.zeros(L, dtype=complex)
    for k, v in doc["pivotal"].items():
        pivotal[lab(k)] = _cplx(v)
    dl = np.zeros(L, dtype=complex)
    dr = np.zeros(L, dtype=complex)
    for k, v in doc["dims"].items():
        dl[lab(k)] = _cplx(v["left"])
        dr[lab(k)] = _cplx(v["right"])

    data = FusionData(name=str(doc["name"]), labels=labels, unit_components=units,
                      dual=dual, fusion=N, F=F, R=R, pivotal=pivotal,
                      dim_left=dl, dim_right=dr, source_hash=digest)
    _validate_structure(data)
    _fill_derived(data, eps)
    return data


def _validate_structure(data: FusionData) -> None:
    N, dual, L = data.fusion, data.dual, data.rank
    units = data.unit_components
    for l in units:
        if dual[l] != l:
            raise CategoryError("unit components must be self-dual")
    # unit axiom: each unit component acts as identity on the simples it touches
    for e in units:
        for j in range(L):
            if N[e, j].sum() and not (N[e, j, j] == 1 and N[e, j].sum() == 1):
                raise CategoryError("unit axiom violated in fusion tensor")
            if N[j, e].sum() and not (N[j, e, j] == 1 and N[j, e].sum() == 1):
                raise CategoryError("unit axiom violated in fusion tensor")
    for j in range(L):
        left = [e for e in units if N[e, j, j]]
        right = [e for e in units if N[j, e, j]]
        if len(left) != 1 or len(right) != 1:
            raise CategoryError(f"label {data.labels[j]!r} must lie in exactly one unit sector")
    # duality: N[i,j,k] = N[j*, i*, k*] and 1 in i (x) i*
    for i, j, k in itertools.product(range(L), repeat=3):
        if N[i, j, k] != N[dual[j], dual[i], dual[k]]:
            raise CategoryError("dual not involution-compatible with fusion")
    for i in range(L):
        if not any(N[i, dual[i], l] for l in units):
            raise CategoryError("dual not involution-compatible with fusion")


def _fill_derived(data: FusionData, eps: float) -> None:
    N, units, L = data.fusion, data.unit_components, data.rank
    sector = []
    for i in range(L):
        (k,) = [e for e in units if N[e, i, i]]
        (l,) = [e for e in units if N[i, e, i]]
        sector.append((k, l))
    for i in range(L):
        if sector[data.dual[i]][0] != sector[i][1]:
            raise CategoryError("sector data inconsistent with duality (k_{i*} != l_i)")
    data.sector = tuple(sector)
    # the engine assumes F-symbols with a unit leg are trivial (unit vertices are gauge-fixed)
    for a, b, c, d in itertools.product(range(L), repeat=4):
        if not (data.is_unit(a) or data.is_unit(b) or data.is_unit(c)):
            continue
        blk, es, fs = data.F_matrix(a, b, c, d)
        if blk.size and not np.allclose(blk, np.eye(len(es)), atol=1e-12):
            raise CategoryError("F-symbols with a unit leg must be trivial")
    if np.any(np.abs(data.pivotal) < 1e-14):
        raise CategoryError("pivotal coefficients must be nonzero")
    for i in range(L):
        if abs(data.pivotal[data.dual[i]] * data.pivotal[i] - 1) > 1e-9:
            raise CategoryError("pivotal coefficients must satisfy delta_{i*} = 1/delta_i")
    dl, dr, D = compute_dimensions(data)
    if np.any(np.abs(dl) < 1e-14) or np.any(np.abs(dr) < 1e-14):
        raise CategoryError("a computed dimension is zero (invalid pivotal data)")
    tol = max(eps, 1e-9)
    if not (np.allclose(dl, data.dim_left, atol=tol) and np.allclose(dr, data.dim_right, atol=tol)):
        raise CategoryError(
            "stored dimensions disagree with loop evaluation: "
            f"left {np.round(dl, 12).tolist()} right {np.round(dr, 12).tolist()}")
    data.global_dim = D
    # fixed square-root branch: principal root of d^L, then sqrt(d_i^R) := sqrt(d_{i*}^L)
    sq_l = np.sqrt(data.dim_left.astype(complex))
    data.sqrt_dim_left = sq_l
    data.sqrt_dim_right = sq_l[data.dual]


def category_to_document(data: FusionData) -> dict:
    """Serialise a FusionData back to the documented mapping format."""
    L, lab = data.rank, data.labels

    def c(z: complex) -> dict:
        return {"re": float(np.real(z)), "im": float(np.imag(z))}

    fusion = {}
    for i, j in itertools.product(range(L), repeat=2):
        out = {lab[k]: int(data.fusion[i, j, k]) for k in range(L) if data.fusion[i, j, k]}
        if out:
            fusion[f"{lab[i]},{lab[j]}"] = out
    Frecs = []
    for idx in zip(*np.nonzero(data.F)):
        rec = dict(zip("abcdef", (lab[t] for t in idx)))
        rec.update(mu=0, nu=0, rho=0, sigma=0, **c(data.F[idx]))
        Frecs.append(rec)
    doc = {
        "name": data.name, "labels": list(lab),
        "unit": [lab[u] for u in data.unit_components],
        "dual": {lab[i]: lab[data.dual[i]] for i in range(L)},
        "fusion": fusion, "braided": data.braided, "F": Frecs,
        "pivotal": {lab[i]: c(data.pivotal[i]) for i in range(L)},
        "dims": {lab[i]: {"left": c(data.dim_left[i]), "right": c(data.dim_right[i])}
                 for i in range(L)},
    }
    if data.R is not None:
        doc["R"] = [dict(a=lab[a], b=lab[b], c=lab[cc], mu=0, nu=0, **c(data.R[a, b, cc]))
                    for a, b, cc in zip(*np.nonzero(data.R))]
    return doc


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------

def check_pentagon(data: FusionData, *, eps: float = DEFAULT_EPS) -> ResidualReport:
    """Maximum pentagon residual over all admissible labelled instances.

    For fusion trees of four incoming legs a, b, c, d into T the identity is

        F[f,c,d,T,g,h] F[a,b,h,T,f,l] = sum_m F[a,b,c,g,f,m] F[a,m,d,T,g,l] F[b,c,d,l,m,h]
    """
    N, F, L = data.fusion, data.F, data.rank
    worst, worst_inst, count = 0.0, None, 0
    rng = range(L)
    for a, b, c, d, T in itertools.product(rng, repeat=5):
        for f in rng:
            if not N[a, b, f]:
                continue
            for g in rng:
                if not (N[f, c, g] and N[g, d, T]):
                    continue
                for h in rng:
                    if not (N[c, d, h] and N[f, h, T]):
                        continue
                    for l in rng:
                        if not (N[b, h, l] and N[a, l, T]):
                            continue
                        lhs = F[f, c, d, T, g, h] * F[a, b, h, T, f, l]
                        rhs = sum(F[a, b, c, g, f, m] * F[a, m, d, T, g, l] * F[b, c, d, l, m, h]
                                  for m in rng if N[b, c, m] and N[a, m, g] and N[m, d, l])
                        r = abs(lhs - rhs)
                        count += 1
                        if r > worst or worst_inst is None:
                            worst, worst_inst = max(worst, r), (a, b, c, d, T, f, g, h, l)
    return ResidualReport("pentagon", worst, worst_inst, count, eps)


def _F_inverse(data: FusionData, a: int, b: int, c: int, d: int) -> np.ndarray:
    """Full-size inverse of F[a,b,c,d] (indexed [f, e]), zero off the admissible block."""
    blk, es, fs = data.F_matrix(a, b, c, d)
    out = np.zeros((data.rank, data.rank), dtype=complex)
    if blk.size:
        if blk.shape[0] != blk.shape[1]:
            raise CategoryError("non-square F block: fusion rules are not associative")
        out[np.ix_(fs, es)] = np.linalg.inv(blk)
    return out


def check_hexagon(data: FusionData, *, eps: float = DEFAULT_EPS) -> ResidualReport:
    """Maximum residual over both hexagon families.

    With ``Finv[a,y,z,k]`` the inverse of ``F[a,y,z,k]`` the first family reads

        sum_e Finv[a,y,z,k][f,e] R[a,y,e] F[y,a,z,k,e,g] R[a,z,g] = R[a,f,k] F[y,z,a,k,f,g]

    and the second one is the same identity for the reverse braiding
    ``R'[x,y,e] = 1 / R[y,x,e]``.
    """
    if data.R is None:
        raise CategoryError("R-symbols absent: category is not braided")
    N, F, L = data.fusion, data.F, data.rank
    worst, worst_inst, count = 0.0, None, 0
    Rrev = np.zeros_like(data.R)
    for x, y, e in itertools.product(range(L), repeat=3):
        if N[x, y, e]:
            if abs(data.R[y, x, e]) < 1e-15:
                return ResidualReport("hexagon", float("inf"), (y, x, e), 0, eps)
            Rrev[x, y, e] = 1.0 / data.R[y, x, e]
    for fam, R in ((1, data.R), (2, Rrev)):
        for a, y, z, k in itertools.product(range(L), repeat=4):
            Finv = _F_inverse(data, a, y, z, k)
            for f in range(L):
                if not (N[y, z, f] and N[a, f, k]):
                    continue
                for g in range(L):
                    if not (N[a, z, g] and N[y, g, k]):
                        continue
                    lhs = sum(Finv[f, e] * R[a, y, e] * F[y, a, z, k, e, g] * R[a, z, g]
                              for e in range(L) if N[a, y, e] and N[e, z, k])
                    rhs = R[a, f, k] * F[y, z, a, k, f, g]
                    r = abs(lhs - rhs)
                    count += 1
                    if r > worst or worst_inst is None:
                        worst, worst_inst = max(worst, r), (fam, a, y, z, k, f, g)
    return ResidualReport("hexagon", worst, worst_inst, count, eps)


# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------

def coev_scalar(data: FusionData, a: int) -> complex:
    """Scalar of coev_a : 1 -> a a* in the tree basis, fixed by the zigzag identity."""
    l = data.sector[a][0]
    return 1.0 / data.F[a, data.dual[a], a, a, l, data.sector[a][1]]


def compute_dimensions(data: FusionData) -> tuple[np.ndarray, np.ndarray, complex]:
    """Left/right dimensions from loop closures and the global dimension.

    ``d^L_a = ev'_a o coev_a`` and ``d^R_a = ev_a o coev'_a`` where the primed
    maps are the right (co)evaluations built from the pivotal coefficients.
    ``D = sum_{i in Irr(C_kl)} d^R_i d^L_i`` must be the same for every
    sector (k, l).
    """
    L = data.rank
    dl = np.zeros(L, dtype=complex)
    dr = np.zeros(L, dtype=complex)
    for a in range(L):
        dl[a] = data.pivotal[a] * coev_scalar(data, a)
        dr[a] = coev_scalar(data, data.dual[a]) / data.pivotal[a]
    if np.any(np.abs(dl) < 1e-14) or np.any(np.abs(dr) < 1e-14):
        raise CategoryError("a computed dimension is zero (invalid pivotal data)")
    sectors = sorted(set(data.sector)) if data.sector else None
    if sectors is None:
        return dl, dr, complex(np.sum(dl * dr))
    totals = {}
    for k in data.unit_components:
        for l in data.unit_components:
            totals[(k, l)] = complex(sum(dr[i] * dl[i] for i in range(L) if data.sector[i] == (k, l)))
    vals = list(totals.values())
    if any(abs(v - vals[0]) > 1e-9 * max(1.0, abs(vals[0])) for v in vals) or abs(vals[0]) < 1e-14:
        raise CategoryError(f"global dimension differs between sectors: {totals}")
    D = vals[0]
    if abs(D.imag) < 1e-13:
        D = complex(D.real, 0.0)
    return dl, dr, D
