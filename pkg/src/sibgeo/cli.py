"""Command-line interface: ``sibgeo verify | curvature | geodesic | gallery list``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import KNOWN_CHECKS, STRATEGIES, RunConfig, gallery_config, load_config
from .errors import ConfigError, SibgeoError
from .gallery import BUILDERS, DEFAULTS, build
from .geometry import integrate_geodesic, riemann_at
from .runner import build_subject, run

EXIT_USAGE = 125
MAX_ORDINAL = 124


def _source(arg: str) -> RunConfig:
    if Path(arg).is_file():
        return load_config(arg)
    if arg in BUILDERS:
        return gallery_config(arg)
    raise ConfigError("<source>", f"{arg!r} is neither a readable config file nor a gallery name")


def _vector(text: str, n: int, what: str) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(what, f"cannot read numbers from {text!r}") from None
    if len(vals) != n:
        raise ConfigError(what, f"expected {n} components, got {len(vals)}")
    return np.array(vals)


def _metric(sub, which: str):
    return sub.pair.g if which == "riemannian" else sub.pair.gL


def cmd_verify(args) -> int:
    cfg = _source(args.source)
    overrides = {}
    if args.tolerance is not None:
        if not args.tolerance > 0:
            raise ConfigError("--tolerance", "must be > 0")
        overrides["tolerance"] = args.tolerance
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("--samples", "must be >= 1")
        overrides["count"] = args.samples
    if args.strategy is not None:
        overrides["strategy"] = args.strategy
    if args.checks is not None:
        names = tuple(dict.fromkeys(c.strip() for c in args.checks.split(",") if c.strip()))
        bad = [c for c in names if c not in KNOWN_CHECKS]
        if bad or not names:
            raise ConfigError("--checks", f"unknown check(s): {', '.join(bad) or '(none given)'}")
        overrides["checks"] = names
    if args.lam is not None:
        overrides["lam"] = args.lam
    cfg = replace(cfg, **overrides)
    report = run(cfg)
    timing = not args.no_timing
    if args.report:
        Path(args.report).write_text(report.to_json(timing), encoding="utf-8")
    sys.stdout.write(report.to_json(timing) if args.json else report.to_text())
    return min(report.first_failure(), MAX_ORDINAL)


def _geometry_dict(pg) -> dict:
    return {
        "point": pg.point.tolist(),
        "g": pg.g.tolist(),
        "g_inv": pg.g_inv.tolist(),
        "christoffel": pg.christoffel.tolist(),
        "riemann": pg.riemann.tolist(),
        "ricci": pg.ricci.tolist(),
        "scalar": float(pg.scalar),
    }


def cmd_curvature(args) -> int:
    sub = build_subject(_source(args.source))
    p = _vector(args.at, sub.pair.dim, "--at")
    which = ("riemannian", "lorentzian") if args.metric == "both" else (args.metric,)
    out = {w: _geometry_dict(riemann_at(_metric(sub, w), p)) for w in which}
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_geodesic(args) -> int:
    sub = build_subject(_source(args.source))
    n = sub.pair.dim
    p0 = _vector(getattr(args, "from"), n, "--from")
    v0 = _vector(args.velocity, n, "--velocity")
    if args.steps < 0 or not args.step > 0:
        raise ConfigError("--steps/--step", "need steps >= 0 and step > 0")
    traj = integrate_geodesic(_metric(sub, args.metric), p0, v0, args.step, args.steps)
    out = sys.stdout
    for k in range(len(traj.s)):
        cells = [traj.s[k], *traj.x[k], *traj.v[k], traj.speed[k]]
        out.write("\t".join(repr(float(c)) for c in cells) + "\n")
    if traj.stopped_early:
        print(f"stopped after {len(traj.s) - 1} steps: {traj.reason}", file=sys.stderr)
    return 0


def cmd_gallery(args) -> int:
    for name in BUILDERS:
        entry = build(name)
        params = ", ".join(f"{k}={v}" for k, v in DEFAULTS[name].items()) or "-"
        print(f"{name}\t{params}\t{entry.chart.dim}\t{','.join(entry.checks)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sibgeo", description="Verify curvature identities of sibling metric pairs.")
    sp = ap.add_subparsers(dest="command", required=True)

    v = sp.add_parser("verify", help="run the verification suite")
    v.add_argument("source", help="JSON config file or gallery name")
    v.add_argument("--tolerance", type=float)
    v.add_argument("--samples", type=int, help="sample count")
    v.add_argument("--strategy", choices=STRATEGIES)
    v.add_argument("--checks", help="comma-separated check names")
    v.add_argument("--lambda", dest="lam", type=float)
    v.add_argument("--report", help="also write the JSON report to this file")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    v.add_argument("--no-timing", action="store_true", help="omit wall times from the report")
    v.set_defaults(func=cmd_verify)

    c = sp.add_parser("curvature", help="dump metric and curvature at a point as JSON")
    c.add_argument("source")
    c.add_argument("--at", required=True, help="point, e.g. '0.5,1,1'")
    c.add_argument("--metric", choices=("riemannian", "lorentzian", "both"), default="both")
    c.set_defaults(func=cmd_curvature)

    g = sp.add_parser("geodesic", help="integrate a geodesic, tab-separated output")
    g.add_argument("source")
    g.add_argument("--from", required=True)
    g.add_argument("--velocity", required=True)
    g.add_argument("--steps", type=int, default=1000)
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--metric", choices=("riemannian", "lorentzian"), default="lorentzian")
    g.set_defaults(func=cmd_geodesic)

    gl = sp.add_parser("gallery", help="list built-in geometries")
    gl.add_argument("action", choices=("list",))
    gl.set_defaults(func=cmd_gallery)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SibgeoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
