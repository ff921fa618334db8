"""Regenerate the embedded category catalog (src/skeincat/catalog/*.json).

The symbols written here are the standard closed-form solutions in the
gauge where every vertex with a unit leg is trivial.  They were matched
against the numeric pentagon/hexagon solvers in ``tests/oracles.py``
(gauge invariants agree); run ``pytest tests/test_oracles.py`` after any
edit.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "skeincat" / "catalog"


def c(z: complex) -> dict:
    z = complex(z)
    return {"re": round(z.real, 17), "im": round(z.imag, 17)}


def build(name, labels, dual, fusion, special_F, R=None, pivotal=None):
    """Fill every admissible F entry with 1 unless listed in ``special_F``."""
    N = {}
    for (i, j), outs in fusion.items():
        for k in outs:
            N[(i, j, k)] = 1

    def n(i, j, k):
        return N.get((i, j, k), 0)

    Frecs = []
    for a, b, cc, d in itertools.product(labels, repeat=4):
        for e, f in itertools.product(labels, repeat=2):
            if n(a, b, e) and n(e, cc, d) and n(b, cc, f) and n(a, f, d):
                val = special_F.get((a, b, cc, d, e, f), 1.0)
                if abs(val) > 0:
                    Frecs.append(dict(a=a, b=b, c=cc, d=d, e=e, f=f, mu=0, nu=0, rho=0, sigma=0, **c(val)))
    pivotal = pivotal or {l: 1.0 for l in labels}
    doc = {
        "name": name,
        "labels": labels,
        "unit": [labels[0]],
        "dual": dual,
        "fusion": {f"{i},{j}": {k: 1 for k in outs} for (i, j), outs in fusion.items()},
        "braided": R is not None,
        "F": Frecs,
        "pivotal": {l: c(pivotal[l]) for l in labels},
        "dims": {},
    }
    if R is not None:
        doc["R"] = [dict(a=a, b=b, c=k, mu=0, nu=0, **c(R.get((a, b, k), 1.0)))
                    for (a, b), outs in fusion.items() for k in outs]
    return doc


def with_dims(doc, dims):
    doc["dims"] = {l: {"left": c(dl), "right": c(dr)} for l, (dl, dr) in dims.items()}
    return doc


def catalog() -> dict[str, dict]:
    out = {}
    out["vec"] = with_dims(build("vec", ["1"], {"1": "1"}, {("1", "1"): ["1"]}, {}, R={}),
                           {"1": (1, 1)})
    out["vec"]["braided"] = False
    out["vec"].pop("R")

    z2 = {("1", "1"): ["1"], ("1", "g"): ["g"], ("g", "1"): ["g"], ("g", "g"): ["1"]}
    out["vec_z2"] = with_dims(build("vec_z2", ["1", "g"], {"1": "1", "g": "g"}, z2, {}),
                              {"1": (1, 1), "g": (1, 1)})
    out["rep_z2"] = with_dims(build("rep_z2", ["1", "g"], {"1": "1", "g": "g"}, z2, {}, R={}),
                              {"1": (1, 1), "g": (1, 1)})

    phi = (1 + math.sqrt(5)) / 2
    fibF = {
        ("tau", "tau", "tau", "tau", "1", "1"): 1 / phi,
        ("tau", "tau", "tau", "tau", "1", "tau"): 1 / math.sqrt(phi),
        ("tau", "tau", "tau", "tau", "tau", "1"): 1 / math.sqrt(phi),
        ("tau", "tau", "tau", "tau", "tau", "tau"): -1 / phi,
    }
    fib_fusion = {("1", "1"): ["1"], ("1", "tau"): ["tau"], ("tau", "1"): ["tau"],
                  ("tau", "tau"): ["1", "tau"]}
    fibR = {("tau", "tau", "1"): cmath.exp(4j * math.pi / 5),
            ("tau", "tau", "tau"): cmath.exp(-3j * math.pi / 5)}
    out["fib"] = with_dims(build("fib", ["1", "tau"], {"1": "1", "tau": "tau"}, fib_fusion, fibF, R=fibR),
                           {"1": (1, 1), "tau": (phi, phi)})

    s2 = 1 / math.sqrt(2)
    isF = {
        ("sigma", "sigma", "sigma", "sigma", "1", "1"): s2,
        ("sigma", "sigma", "sigma", "sigma", "1", "psi"): s2,
        ("sigma", "sigma", "sigma", "sigma", "psi", "1"): s2,
        ("sigma", "sigma", "sigma", "sigma", "psi", "psi"): -s2,
        ("psi", "sigma", "psi", "sigma", "sigma", "sigma"): -1.0,
        ("sigma", "psi", "sigma", "psi", "sigma", "sigma"): -1.0,
    }
    is_fusion = {("1", "1"): ["1"], ("1", "sigma"): ["sigma"], ("1", "psi"): ["psi"],
                 ("sigma", "1"): ["sigma"], ("psi", "1"): ["psi"],
                 ("sigma", "sigma"): ["1", "psi"], ("sigma", "psi"): ["sigma"],
                 ("psi", "sigma"): ["sigma"], ("psi", "psi"): ["1"]}
    isR = {("sigma", "sigma", "1"): cmath.exp(1j * math.pi / 8),
           ("sigma", "sigma", "psi"): cmath.exp(-3j * math.pi / 8),
           ("sigma", "psi", "sigma"): 1j, ("psi", "sigma", "sigma"): 1j,
           ("psi", "psi", "1"): -1.0}
    out["ising"] = with_dims(build("ising", ["1", "sigma", "psi"],
                                   {"1": "1", "sigma": "sigma", "psi": "psi"}, is_fusion, isF, R=isR),
                             {"1": (1, 1), "sigma": (math.sqrt(2), math.sqrt(2)), "psi": (1, 1)})
    return out


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in catalog().items():
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print("wrote", OUT / f"{name}.json")


if __name__ == "__main__":
    main()
