"""Built-in catalog, command-line interface and machine-readable reports.

    skeincat validate <file|name>
    skeincat eval <file|name> <diagram-file> [--coupons <json>]
    skeincat center <file|name> [--route trace|center|both]
    skeincat surface <file|name> <tag>
    skeincat selftest [--only N ...]

Common flags: ``--eps``, ``--seed``, ``--out``.  Exit status is 0 when every
assertion passes, 1 on an assertion failure and 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .fusion_core import CategoryError, FusionData, check_hexagon, check_pentagon, load_category
from .hom_engine import Morph, engine, parse_word
from .karoubi import KaroubiError

__all__ = ["catalog", "catalog_names", "load", "Report", "build_parser", "run_command", "main"]

SCHEMA = 1
SURFACES = ("tv_circle", "disk", "annulus", "sphere", "punctured_torus", "torus", "muger", "elliptic")


class UsageError(Exception):
    """Bad command line or unreadable input (exit status 2)."""


def catalog_names() -> list[str]:
    root = resources.files("skeincat").joinpath("catalog")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def catalog(name: str, eps: float = 1e-9) -> FusionData:
    """A validated category from the embedded catalog."""
    names = catalog_names()
    if name not in names:
        raise CategoryError(f"unknown catalog entry {name!r}; available: {', '.join(names)}")
    text = resources.files("skeincat").joinpath("catalog", f"{name}.json").read_text()
    return load_category(text, eps=eps)


def load(spec: str, eps: float = 1e-9) -> FusionData:
    """A catalog name or a path to a category file."""
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        try:
            text = p.read_text()
        except OSError as e:
            raise UsageError(f"cannot read {spec}: {e}") from None
        return load_category(text, eps=eps)
    return catalog(spec, eps=eps)


class Report:
    """Ordered list of records plus a pass/fail summary; serialized byte-stably."""

    def __init__(self, command: str, data: FusionData | None, eps: float, seed: int):
        self.command = command
        self.data = data
        self.eps = eps
        self.seed = seed
        self.records: list[dict] = []
        self.failures: list[str] = []

    def add(self, record: dict) -> None:
        self.records.append(record)

    def fail(self, message: str) -> None:
        self.failures.append(message)

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        cat = None
        if self.data is not None:
            cat = {"name": self.data.name, "hash": self.data.fingerprint()}
        return {
            "schema": SCHEMA, "tool": "skeincat", "version": __version__, "command": self.command,
            "category": cat, "eps": self.eps, "seed": self.seed, "records": self.records,
            "summary": {"passed": self.passed, "failures": self.failures},
        }

    def dumps(self) -> str:
        return json.dumps(_jsonable(self.as_dict()), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(f"{float(v):.6e}")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args, report: Report) -> None:
    data = report.data
    checks = [check_pentagon(data, eps=args.eps)]
    if data.braided:
        checks.append(check_hexagon(data, eps=args.eps))
    for c in checks:
        report.add(c.as_record())
        if not c.passed:
            report.fail(f"{c.name} residual {c.max_residual:.3e} at {c.worst_instance}")
    report.add({"check": "dimensions", "dim_left": [complex(x) for x in data.dim_left],
                "dim_right": [complex(x) for x in data.dim_right], "global_dim": complex(data.global_dim)})


def _load_coupons(data: FusionData, path: str | None) -> dict:
    """Sidecar table: name -> {"src": word, "tgt": word, "coeffs": [[re, im], ...]}."""
    if not path:
        return {}
    try:
        table = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read coupon table {path}: {e}") from None
    eng = engine(data)
    out = {}
    for name, rec in table.items():
        src = parse_word(data, rec.get("src", []))
        tgt = parse_word(data, rec["tgt"])
        v = np.array([complex(*c) if isinstance(c, list) else complex(c) for c in rec["coeffs"]])
        n = len(eng.zero((src,), (tgt,)).vec())
        if len(v) != n:
            raise UsageError(f"coupon '{name}': hom space has dimension {n}, got {len(v)} coefficients")
        out[name] = Morph.from_vec(eng, (src,), (tgt,), v)
    return out


def cmd_eval(args, report: Report) -> None:
    from . import diagram_dsl as dsl

    try:
        text = Path(args.diagram).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read diagram {args.diagram}: {e}") from None
    data = report.data
    coupons = _load_coupons(data, args.coupons)
    d = dsl.parse(text)
    problems = dsl.typecheck(d, data, coupons)
    if problems:
        report.add({"typecheck": problems})
        report.fail("diagram does not typecheck")
        return
    res = dsl.evaluate(d, data, coupons)
    report.add({"diagram": args.diagram, "slices": d.depth, "value": res.value.record()})


def cmd_center(args, report: Report) -> None:
    from . import surface_pipeline as sp

    rng = np.random.default_rng(args.seed)
    data = report.data
    if args.route == "both":
        rt, rc = sp.tv_circle(data, rng)
        report.add(rt.record())
        report.add(rc.record())
    else:
        C = sp.htr_category(data) if args.route == "trace" else sp.center_category(data)
        from .karoubi import enumerate_simples
        inv = enumerate_simples(C, rng)
        report.add(sp._result("tv_circle", args.route, C, inv, {"composition": C.validate(rng)}).record())


def cmd_surface(args, report: Report) -> None:
    from . import surface_pipeline as sp

    rng = np.random.default_rng(args.seed)
    data = report.data
    tag = args.tag
    braided_only = {"annulus", "sphere", "punctured_torus", "torus", "muger", "elliptic"}
    if tag in braided_only and not data.braided:
        raise CategoryError(f"surface {tag!r} needs a braiding; {data.name} has none")
    if tag == "tv_circle":
        for r in sp.tv_circle(data, rng):
            report.add(r.record())
    elif tag == "disk":
        report.add(sp.cy_disk(data, rng).record())
    elif tag == "annulus":
        for r in sp.cy_annulus(data, rng):
            report.add(r.record())
    elif tag == "sphere":
        r = sp.cy_sphere(data, rng)
        report.add(r.record())
        mu = len(sp.muger_center(data))
        if r.count != mu:
            report.fail(f"sphere has {r.count} simples but {mu} transparent simples")
    elif tag == "punctured_torus":
        for r in sp.cy_punctured_torus(data, rng):
            report.add(r.record())
    elif tag == "torus":
        r = sp.cy_torus(data, rng)
        report.add(r.record())
    elif tag == "muger":
        report.add({"muger_center": [data.labels[i] for i in sp.muger_center(data, args.eps)]})
    elif tag == "elliptic":
        chk = sp.elliptic_checks(data, rng)
        report.add({"elliptic_checks": chk})
        for k in ("comm", "projector_idempotency", "projector_forms"):
            if chk[k] > args.eps:
                report.fail(f"elliptic {k} residual {chk[k]:.3e}")
        if chk["compression_mismatch"]:
            report.fail("P-compression does not reproduce an elliptic simple")
    for rec in report.records:
        for key, val in rec.get("diagnostics", {}).items():
            if key in ("composition",) and max(val.values()) > args.eps:
                report.fail(f"{rec['surface']}/{rec['route']}: {key} residual {max(val.values()):.3e}")


def cmd_selftest(args, report: Report) -> None:
    from .selftest import run_all

    for c in run_all(args.seed, only=set(args.only) if args.only else None):
        print(c.line(), file=sys.stderr)
        report.add(c.record())
        if not c.passed:
            report.fail(c.line())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skeincat", description="Skein-category computations over fusion categories.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, default=1e-9, help="numerical tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--out", type=str, default=None, help="write the JSON report here")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common], help="pentagon/hexagon checks")
    s.add_argument("category")
    s = sub.add_parser("eval", parents=[common], help="evaluate a diagram file")
    s.add_argument("category")
    s.add_argument("diagram")
    s.add_argument("--coupons", default=None, help="JSON coupon table")
    s = sub.add_parser("center", parents=[common], help="simples of the Drinfeld center")
    s.add_argument("category")
    s.add_argument("--route", choices=("trace", "center", "both"), default="both")
    s = sub.add_parser("surface", parents=[common], help="surface category computation")
    s.add_argument("category")
    s.add_argument("tag", choices=SURFACES)
    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", type=int, nargs="*", default=None)
    return p


COMMANDS = {"validate": cmd_validate, "eval": cmd_eval, "center": cmd_center,
            "surface": cmd_surface, "selftest": cmd_selftest}


def run_command(argv: Sequence[str]) -> tuple[int, Report | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return (2 if e.code else 0), None
    data = None
    try:
        if hasattr(args, "category"):
            data = load(args.category, eps=args.eps)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2, None
    except CategoryError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2, None
    report = Report(args.command, data, args.eps, args.seed)
    try:
        COMMANDS[args.command](args, report)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2, None
    except (CategoryError, KaroubiError) as e:
        report.fail(str(e))
    text = report.dumps()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for f in report.failures:
        print(f"FAILED: {f}", file=sys.stderr)
    return (0 if report.passed else 1), report


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run_command(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
