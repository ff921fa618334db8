"""Independent reference computations used to cross-check the package.

Nothing here imports the engine beyond the raw arrays of a loaded category:
the pentagon/hexagon equations are re-derived from scratch and solved
numerically, dimensions come from Perron-Frobenius eigenvalues of the fusion
matrices, and small centers are enumerated by brute force over scalar
half-braidings.
"""
from __future__ import annotations

import itertools

import numpy as np


# ---------------------------------------------------------------------------
# pentagon / hexagon as polynomial systems
# ---------------------------------------------------------------------------

def admissible_F(N, units):
    """Keys (a,b,c,d,e,f) of F entries that are allowed by the fusion rules."""
    L = N.shape[0]
    keys = []
    for a, b, c, d, e, f in itertools.product(range(L), repeat=6):
        if N[a, b, e] and N[e, c, d] and N[b, c, f] and N[a, f, d]:
            keys.append((a, b, c, d, e, f))
    return keys


def pentagon_system(N):
    """Pentagon equations as polynomials in the F-symbols.

    Each equation is a list of ``(coefficient, (key, key, ...))`` monomials
    whose keys are admissible F six-tuples; the equation reads sum = 0.
    """
    L = N.shape[0]
    eqs = []
    for a, b, c, d, T in itertools.product(range(L), repeat=5):
        for f, g, h, l in itertools.product(range(L), repeat=4):
            if not (N[a, b, f] and N[f, c, g] and N[g, d, T] and N[c, d, h]
                    and N[f, h, T] and N[b, h, l] and N[a, l, T]):
                continue
            terms = [(1.0, (("F", (f, c, d, T, g, h)), ("F", (a, b, h, T, f, l))))]
            for m in range(L):
                if N[b, c, m] and N[a, m, g] and N[m, d, l]:
                    terms.append((-1.0, (("F", (a, b, c, g, f, m)), ("F", (a, m, d, T, g, l)),
                                         ("F", (b, c, d, l, m, h)))))
            eqs.append(terms)
    return eqs


def _F_block_inverse(N, F, a, b, c, d):
    L = N.shape[0]
    es = [e for e in range(L) if N[a, b, e] and N[e, c, d]]
    fs = [f for f in range(L) if N[b, c, f] and N[a, f, d]]
    M = np.array([[F.get((a, b, c, d, e, f), 0) for f in fs] for e in es], dtype=complex)
    inv = np.linalg.inv(M) if M.size else M
    return {(f, e): inv[i, j] for i, f in enumerate(fs) for j, e in enumerate(es)}


def hexagon_system(N, F):
    """Both hexagon families as polynomials in R and in S[(x,y,e)] = 1 / R[(y,x,e)].

    ``F`` is fixed (a dict keyed by admissible six-tuples).  The reverse
    braiding is encoded by the auxiliary variables S together with the
    equations S R - 1 = 0.
    """
    L = N.shape[0]
    eqs = []
    for x, y, e in itertools.product(range(L), repeat=3):
        if N[x, y, e]:
            eqs.append([(1.0, (("S", (x, y, e)), ("R", (y, x, e)))), (-1.0, ())])
    for fam in ("R", "S"):
        for a, y, z, k in itertools.product(range(L), repeat=4):
            Finv = _F_block_inverse(N, F, a, y, z, k)
            for f, g in itertools.product(range(L), repeat=2):
                if not (N[y, z, f] and N[a, f, k] and N[a, z, g] and N[y, g, k]):
                    continue
                terms = [(Finv[(f, e)] * F[(y, a, z, k, e, g)], ((fam, (a, y, e)), (fam, (a, z, g))))
                         for e in range(L) if N[a, y, e] and N[e, z, k]]
                terms.append((-F[(y, z, a, k, f, g)], ((fam, (a, f, k)),)))
                eqs.append(terms)
    return eqs


class PolySystem:
    """A polynomial system compiled to index arrays, with an exact Jacobian."""

    def __init__(self, eqs, free, fixed):
        self.free = list(free)
        self.fixed = dict(fixed)
        names = self.free + list(self.fixed)
        self.pos = {k: i for i, k in enumerate(names)}
        self.n_free = len(self.free)
        self.consts = np.array([self.fixed[k] for k in self.fixed], dtype=complex)
        self.n_eq = len(eqs)
        by_deg = {}
        for i, terms in enumerate(eqs):
            for coef, mono in terms:
                by_deg.setdefault(len(mono), []).append((i, coef, [self.pos[v] for v in mono]))
        self.groups = []
        for deg, ts in by_deg.items():
            eq = np.array([t[0] for t in ts])
            coef = np.array([t[1] for t in ts], dtype=complex)
            var = np.array([t[2] for t in ts], dtype=int).reshape(len(ts), deg)
            self.groups.append((eq, coef, var))

    def _full(self, x):
        return np.concatenate([x, self.consts])

    def residual(self, x):
        v = self._full(x)
        r = np.zeros(self.n_eq, dtype=complex)
        for eq, coef, var in self.groups:
            np.add.at(r, eq, coef * np.prod(v[var], axis=1))
        return r

    def jacobian(self, x):
        v = self._full(x)
        J = np.zeros((self.n_eq, len(v)), dtype=complex)
        for eq, coef, var in self.groups:
            deg = var.shape[1]
            for p in range(deg):
                others = np.prod(v[np.delete(var, p, axis=1)], axis=1) if deg > 1 else 1.0
                np.add.at(J, (eq, var[:, p]), coef * others)
        return J[:, :self.n_free]

    def solve(self, x0, steps=200, tol=1e-13):
        """Levenberg-Marquardt; the minimum-norm steps absorb the gauge directions."""
        x = np.array(x0, dtype=complex)
        r = self.residual(x)
        cost = np.vdot(r, r).real
        mu = 1e-3
        for _ in range(steps):
            if np.max(np.abs(r), initial=0.0) < tol:
                break
            J = self.jacobian(x)
            A = J.conj().T @ J
            g = J.conj().T @ r
            step = np.linalg.solve(A + mu * np.eye(len(x)) * max(1.0, np.max(np.abs(np.diag(A)))), -g)
            xn = x + step
            rn = self.residual(xn)
            cn = np.vdot(rn, rn).real
            if cn < cost:
                x, r, cost, mu = xn, rn, cn, max(mu / 10, 1e-15)
            else:
                mu *= 10
                if mu > 1e8:
                    break
        return x, float(np.max(np.abs(r), initial=0.0))


def pentagon_residuals(N, F):
    """Residual vector of the pentagon for a complete F dict."""
    sys_ = PolySystem(pentagon_system(N), [], {("F", k): v for k, v in F.items()})
    return sys_.residual(np.zeros(0))


def solve_pentagon(N, units, rng, starts=20):
    """Numerical solutions of the pentagon for fusion rules ``N``.

    Entries with a unit among the first three legs are fixed to 1; the rest
    are free.  Returns a list of dicts F whose F-matrices are invertible.
    """
    keys = admissible_F(N, units)
    free = [k for k in keys if not any(k[i] in units for i in range(3))]
    fixed = {("F", k): 1.0 for k in keys if k not in free}
    system = PolySystem(pentagon_system(N), [("F", k) for k in free], fixed)
    sols = []
    for _ in range(starts):
        x, r = system.solve(rng.normal(size=len(free)) + 1j * rng.normal(size=len(free)))
        if r > 1e-10:
            continue
        F = {k: 1.0 for k in keys if k not in free}
        F.update(zip(free, x))
        if _invertible(N, F):
            sols.append(F)
    return sols


def _invertible(N, F):
    L = N.shape[0]
    for a, b, c, d in itertools.product(range(L), repeat=4):
        es = [e for e in range(L) if N[a, b, e] and N[e, c, d]]
        fs = [f for f in range(L) if N[b, c, f] and N[a, f, d]]
        if not es:
            continue
        M = np.array([[F.get((a, b, c, d, e, f), 0) for f in fs] for e in es])
        if abs(np.linalg.det(M)) < 1e-6:
            return False
    return True


def solve_hexagon(N, F, units, rng, starts=30):
    """Numerical R-symbols solving both hexagons for fixed F; unit-legged R fixed to 1."""
    L = N.shape[0]
    keys = [(a, b, c) for a, b, c in itertools.product(range(L), repeat=3) if N[a, b, c]]
    free_keys = [k for k in keys if k[0] not in units and k[1] not in units]
    fixed = {}
    for k in keys:
        if k not in free_keys:
            fixed[("R", k)] = 1.0
            fixed[("S", (k[1], k[0], k[2]))] = 1.0
    free = [("R", k) for k in free_keys] + [("S", (k[1], k[0], k[2])) for k in free_keys]
    system = PolySystem(hexagon_system(N, F), free, fixed)
    sols = []
    for _ in range(starts):
        z = np.exp(2j * np.pi * rng.random(len(free_keys)))
        x, r = system.solve(np.concatenate([z, 1.0 / z[[free_keys.index((k[1], k[0], k[2])) for k in free_keys]]]))
        if r > 1e-10:
            continue
        R = {k: 1.0 for k in keys if k not in free_keys}
        R.update(zip(free_keys, x[:len(free_keys)]))
        sols.append(R)
    return sols


# ---------------------------------------------------------------------------
# gauge invariants
# ---------------------------------------------------------------------------

def _vertex_gauge_exponent(key, units, vertices):
    """Exponent vector of the vertex gauge factor picked up by an F entry."""
    a, b, c, d, e, f = key
    v = np.zeros(len(vertices), dtype=int)
    for sign, vert in ((1, (a, b, e)), (1, (e, c, d)), (-1, (b, c, f)), (-1, (a, f, d))):
        if vert[0] in units or vert[1] in units:
            continue
        v[vertices[vert]] += sign
    return v


def F_invariants(N, units, F):
    """Gauge-invariant monomials: single entries, products and ratios of pairs.

    Returns a dict from a symbolic description to its value.  Unit-legged
    vertices are held fixed, as in both the catalog and :func:`solve_pentagon`.
    """
    L = N.shape[0]
    vertices = {}
    for a, b, c in itertools.product(range(L), repeat=3):
        if N[a, b, c] and a not in units and b not in units:
            vertices[(a, b, c)] = len(vertices)
    keys = sorted(k for k in admissible_F(N, units) if not any(k[i] in units for i in range(3)))
    ex = {k: _vertex_gauge_exponent(k, units, vertices) for k in keys}
    out = {}
    for k in keys:
        if not ex[k].any():
            out[("single", k)] = complex(F[k])
    for k1, k2 in itertools.combinations(keys, 2):
        if ex[k1].any() and not (ex[k1] + ex[k2]).any():
            out[("product", k1, k2)] = complex(F[k1] * F[k2])
        if ex[k1].any() and not (ex[k1] - ex[k2]).any() and abs(F[k2]) > 1e-12:
            out[("ratio", k1, k2)] = complex(F[k1] / F[k2])
    return out


def R_invariants(N, units, R):
    """R[a,a,c] and monodromies R[a,b,c] R[b,a,c]; unchanged by vertex gauge."""
    L = N.shape[0]
    out = {}
    for a, b, c in itertools.product(range(L), repeat=3):
        if not N[a, b, c] or a in units or b in units:
            continue
        if a == b:
            out[("diag", a, c)] = complex(R[(a, a, c)])
        elif a < b:
            out[("mono", a, b, c)] = complex(R[(a, b, c)] * R[(b, a, c)])
    return out


def same_invariants(x, y, tol=1e-7):
    return x.keys() == y.keys() and all(abs(x[k] - y[k]) < tol for k in x)


def catalog_F_dict(data):
    return {k: complex(data.F[k]) for k in admissible_F(data.fusion, data.unit_components)}


def catalog_R_dict(data):
    N = data.fusion
    L = data.rank
    return {(a, b, c): complex(data.R[a, b, c])
            for a, b, c in itertools.product(range(L), repeat=3) if N[a, b, c]}


# ---------------------------------------------------------------------------
# dimensions, S-matrix, Muger center
# ---------------------------------------------------------------------------

def pf_dimensions(N):
    """Perron-Frobenius eigenvalue of each left-multiplication matrix N_a."""
    return np.array([max(abs(np.linalg.eigvals(N[a].astype(float)))) for a in range(N.shape[0])])


def twists(data, d):
    L = data.rank
    return np.array([sum(d[c] / d[a] * data.R[a, a, c] for c in range(L) if data.fusion[a, a, c])
                     for a in range(L)])


def s_matrix(data, d):
    """Unnormalised S_ab = sum_c N_{a* b}^c theta_c / (theta_a theta_b) d_c."""
    L = data.rank
    th = twists(data, d)
    S = np.zeros((L, L), dtype=complex)
    for a, b in itertools.product(range(L), repeat=2):
        S[a, b] = sum(data.fusion[data.dual[a], b, c] * th[c] / (th[a] * th[b]) * d[c] for c in range(L))
    return S


def transparent_labels(data, d, tol=1e-9):
    S = s_matrix(data, d)
    return [a for a in range(data.rank)
            if all(abs(S[a, b] - d[a] * d[b]) < tol for b in range(data.rank))]


# ---------------------------------------------------------------------------
# brute-force centers of pointed categories with trivial associator
# ---------------------------------------------------------------------------

def _group_of(data):
    """Multiplication table of a pointed category (every fusion product is simple)."""
    L = data.rank
    mult = np.zeros((L, L), dtype=int)
    for a, b in itertools.product(range(L), repeat=2):
        (c,) = data.channels(a, b)
        mult[a, b] = c
    return mult


def scalar_half_braidings(data):
    """All scalar families lam(h), lam(e)=1, compatible with tensor products.

    With trivial F-symbols the half-braiding condition on a simple host is
    lam(h k) = lam(h) lam(k); candidate values are |G|-th roots of unity,
    enumerated exhaustively.
    """
    L = data.rank
    mult = _group_of(data)
    roots = np.exp(2j * np.pi * np.arange(L) / L)
    (e,) = data.unit_components
    found = []
    for vals in itertools.product(roots, repeat=L):
        lam = np.array(vals)
        if abs(lam[e] - 1) > 1e-12:
            continue
        if all(abs(lam[mult[h, k]] - lam[h] * lam[k]) < 1e-12 for h in range(L) for k in range(L)):
            found.append(lam)
    return found


def brute_center_count(data):
    """Simple objects of the center of a pointed category with trivial F: (host, character) pairs."""
    return data.rank * len(scalar_half_braidings(data))


def brute_elliptic_count(data):
    """Pairs of scalar half-braidings on each simple host satisfying the braided commutation rule.

    For scalars the rule reads lam1(h) lam2(k) R[h,k] R[k,h] = lam2(k) lam1(h),
    which with a symmetric braiding imposes nothing beyond the monodromies
    being trivial.
    """
    mult = _group_of(data)
    chars = scalar_half_braidings(data)
    count = 0
    for _host in range(data.rank):
        for l1, l2 in itertools.product(chars, repeat=2):
            ok = all(abs(l1[h] * l2[k] * data.R[h, k, mult[h, k]] * data.R[k, h, mult[h, k]]
                         - l2[k] * l1[h]) < 1e-12
                     for h in range(data.rank) for k in range(data.rank))
            count += ok
    return count
