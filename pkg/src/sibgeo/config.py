"""Run configuration: JSON ingestion and validation.

The grammar is documented in docs/formats.md.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, ExprSyntaxError
from .expr import parse
from .gallery import BUILDERS, DEFAULTS

KNOWN_CHECKS = (
    "t-properties",
    "sibling-invariants",
    "proposition",
    "theorem-eq1",
    "constant-curvature",
    "ricci-relation",
    "ricci-equality",
    "einstein",
    "connection-relations",
    "bochner",
    "riccati",
    "remark1-sectionals",
    "remark3-ricci",
    "big3",
    "bakry-emery",
)

STRATEGIES = ("halton", "grid")
SIGNATURES = ("riemannian", "lorentzian")


@dataclass(frozen=True)
class GallerySource:
    name: str
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"gallery": self.name, "parameters": dict(self.parameters)}


@dataclass(frozen=True)
class InlineSource:
    coordinates: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]
    metric: tuple[tuple[str, ...], ...]
    T: tuple[str, ...]
    signature: str
    potential: str | None = None
    N: float | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "coordinates": list(self.coordinates),
            "bounds": [list(b) for b in self.bounds],
            "metric": [list(r) for r in self.metric],
            "T": list(self.T),
            "signature": self.signature,
        }
        if self.potential is not None:
            out["potential"] = self.potential
            out["N"] = self.N
        return {"inline": out}


@dataclass(frozen=True)
class RunConfig:
    source: GallerySource | InlineSource
    strategy: str = "halton"
    count: int = 100
    tolerance: float = 1e-8
    checks: tuple[str, ...] | None = None
    lam: float | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "samples": {"strategy": self.strategy, "count": self.count},
            "tolerance": self.tolerance,
            "checks": None if self.checks is None else list(self.checks),
            "lambda": self.lam,
        }


def _real(value, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(where, "must be finite")
    if positive and x <= 0:
        raise ConfigError(where, "must be > 0")
    return x


def _expr(source, coords, where: str) -> str:
    if not isinstance(source, str):
        raise ConfigError(where, f"expected an expression string, got {source!r}")
    try:
        parse(source, coords)
    except ExprSyntaxError as exc:
        raise ConfigError(where, f"{exc} (byte {exc.offset})") from exc
    return source


def _gallery_source(name, params) -> GallerySource:
    if name not in BUILDERS:
        raise ConfigError("source", f"unknown gallery entry {name!r}; known: {', '.join(BUILDERS)}")
    if not isinstance(params, dict):
        raise ConfigError("parameters", "must be an object")
    unknown = set(params) - set(DEFAULTS[name])
    if unknown:
        raise ConfigError("parameters", f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    return GallerySource(name, dict(params))


def _inline_source(d) -> InlineSource:
    if not isinstance(d, dict):
        raise ConfigError("source.inline", "must be an object")
    for key in ("coordinates", "bounds", "metric", "T"):
        if key not in d:
            raise ConfigError(f"source.inline.{key}", "missing")
    coords = d["coordinates"]
    if not (isinstance(coords, list) and len(coords) >= 2 and all(isinstance(c, str) for c in coords)):
        raise ConfigError("source.inline.coordinates", "need a list of at least two names")
    if len(set(coords)) != len(coords):
        raise ConfigError("source.inline.coordinates", "duplicate names")
    n = len(coords)

    bounds = d["bounds"]
    if not (isinstance(bounds, list) and len(bounds) == n):
        raise ConfigError("source.inline.bounds", f"need {n} [lo, hi] pairs")
    box = []
    for i, b in enumerate(bounds):
        where = f"source.inline.bounds[{i}]"
        if not (isinstance(b, list) and len(b) == 2):
            raise ConfigError(where, "need [lo, hi]")
        lo, hi = _real(b[0], where), _real(b[1], where)
        if not lo < hi:
            raise ConfigError(where, "need lo < hi")
        box.append((lo, hi))

    rows = d["metric"]
    if not (isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows)):
        raise ConfigError("source.inline.metric", f"need a {n}x{n} matrix of expression strings")
    metric = [[_expr(rows[i][j], coords, f"source.inline.metric[{i}][{j}]") for j in range(n)] for i in range(n)]
    bad = [
        f"[{i}][{j}]={metric[i][j]!r} vs [{j}][{i}]={metric[j][i]!r}"
        for i in range(n)
        for j in range(i + 1, n)
        if parse(metric[i][j], coords) != parse(metric[j][i], coords)
    ]
    if bad:
        raise ConfigError("source.inline.metric", "not symmetric as written: " + "; ".join(bad))

    T = d["T"]
    if not (isinstance(T, list) and len(T) == n):
        raise ConfigError("source.inline.T", f"need {n} expression strings")
    T = [_expr(c, coords, f"source.inline.T[{i}]") for i, c in enumerate(T)]

    sig = d.get("signature", "lorentzian")
    if sig not in SIGNATURES:
        raise ConfigError("source.inline.signature", f"must be one of {', '.join(SIGNATURES)}")

    potential, N = d.get("potential"), d.get("N")
    if potential is not None:
        potential = _expr(potential, coords, "source.inline.potential")
        N = _real(3.5 if N is None else N, "source.inline.N")
        if N == n:
            raise ConfigError("source.inline.N", "must differ from the dimension")
    elif N is not None:
        raise ConfigError("source.inline.N", "given without a potential")

    return InlineSource(
        tuple(coords), tuple(box), tuple(tuple(r) for r in metric), tuple(T), sig, potential, N
    )


def parse_config(data: Any) -> RunConfig:
    """Validate a decoded JSON document."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "must be an object")
    known = {"source", "parameters", "samples", "tolerance", "checks", "lambda"}
    extra = set(data) - known
    if extra:
        raise ConfigError("<root>", f"unknown field(s): {', '.join(sorted(extra))}")
    if "source" not in data:
        raise ConfigError("source", "missing")

    src = data["source"]
    if isinstance(src, str):
        source = _gallery_source(src, data.get("parameters", {}))
    elif isinstance(src, dict) and "gallery" in src:
        if "parameters" in data:
            raise ConfigError("parameters", "give parameters inside source for the object form")
        source = _gallery_source(src["gallery"], src.get("parameters", {}))
    elif isinstance(src, dict) and "inline" in src:
        if "parameters" in data:
            raise ConfigError("parameters", "not allowed with an inline source")
        source = _inline_source(src["inline"])
    else:
        raise ConfigError("source", "expected a gallery name, {\"gallery\": ...} or {\"inline\": ...}")

    samples = data.get("samples", {})
    if not isinstance(samples, dict):
        raise ConfigError("samples", "must be an object")
    strategy = samples.get("strategy", "halton")
    if strategy not in STRATEGIES:
        raise ConfigError("samples.strategy", f"must be one of {', '.join(STRATEGIES)}")
    count = samples.get("count", 100)
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError("samples.count", "must be an integer >= 1")

    tol = _real(data.get("tolerance", 1e-8), "tolerance", positive=True)

    checks = data.get("checks")
    if checks is not None:
        if not (isinstance(checks, list) and checks and all(isinstance(c, str) for c in checks)):
            raise ConfigError("checks", "must be a non-empty list of check names")
        unknown = [c for c in checks if c not in KNOWN_CHECKS]
        if unknown:
            raise ConfigError("checks", f"unknown check(s): {', '.join(unknown)}")
        checks = tuple(dict.fromkeys(checks))

    lam = data.get("lambda")
    if lam is not None:
        lam = _real(lam, "lambda")

    return RunConfig(source, strategy, count, tol, checks, lam)


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file (OSError if unreadable)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def gallery_config(name: str) -> RunConfig:
    return parse_config({"source": name})
