"""Orchestration of a verification run and the report it produces."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import identities as ids
from .config import GallerySource, InlineSource, RunConfig
from .errors import SibgeoError
from .expr import parse
from .gallery import GalleryEntry, build
from .geometry import Chart, MetricField, VectorField
from .identities import IdentityResult
from .sampling import sample_chart
from .sibling import SiblingPair, make_pair

BOCHNER_CURVES = 5
BOCHNER_STEP = 1e-3
BOCHNER_STEPS = 400


@dataclass
class Subject:
    """A sibling pair plus whatever side data the checks may need."""

    pair: SiblingPair
    lam: float | None = None
    expected: tuple[str, ...] = ()
    f: object = None
    h: object = None
    H: object = None
    potential: object = None
    N: float | None = None


def build_subject(config: RunConfig) -> Subject:
    src = config.source
    if isinstance(src, GallerySource):
        entry: GalleryEntry = build(src.name, **src.parameters)
        lam = entry.lam if config.lam is None else config.lam
        sub = Subject(entry.pair, lam, entry.checks)
        ex = entry.extras
        sub.f, sub.h, sub.H = ex.get("f"), ex.get("h"), ex.get("H")
        if "bakry-emery" in entry.checks:
            sub.potential = ids.pp_potential(entry.pair.gL)
            sub.N = dict(entry.expected)["bakry-emery"]
        return sub
    assert isinstance(src, InlineSource)
    chart = Chart(src.coordinates, src.bounds)
    m = MetricField.from_strings(chart, src.metric, src.signature)
    T = VectorField.from_strings(chart, src.T)
    pair = make_pair(m, T, sample_chart(chart, 64))
    names = [c for c, _ in _inline_expected(config.lam)]
    sub = Subject(pair, config.lam, tuple(names))
    if src.potential is not None:
        sub.potential = parse(src.potential, src.coordinates)
        sub.N = src.N
        sub.expected += ("bakry-emery",)
    return sub


def _inline_expected(lam):
    from .gallery import _common_checks

    return _common_checks(lam)


class NotApplicable(SibgeoError):
    pass


def _need_lam(sub: Subject) -> float:
    if sub.lam is None:
        raise NotApplicable("needs a curvature constant lambda (set \"lambda\" in the config)")
    return sub.lam


def _run_bochner(sub, pts, tol):
    curves = ids.flow_curves(sub.pair, pts[:BOCHNER_CURVES], BOCHNER_STEP, BOCHNER_STEPS)
    return [ids.check_bochner(sub.pair, curves, BOCHNER_STEP, tol=tol)]


def _run_riccati(sub, pts, tol):
    lam = _need_lam(sub)
    if lam <= 0:
        raise NotApplicable("the tanh solution needs lambda > 0")
    return [ids.check_riccati(sub.pair.dim, lam, tol)]


def _run_big3(sub, pts, tol):
    if sub.f is None:
        raise NotApplicable("only defined for pp-wave gallery entries")
    return [ids.check_big3(sub.f, sub.h, sub.H, pts, tol)]


def _run_bakry_emery(sub, pts, tol):
    if sub.potential is None:
        raise NotApplicable("needs a potential")
    return [ids.check_bakry_emery(sub.pair.gL, sub.potential, pts, sub.N, tol)]


CheckFn = Callable[[Subject, np.ndarray, float], list]

CHECKS: dict[str, CheckFn] = {
    "t-properties": lambda s, p, t: [ids.check_t_properties(s.pair, p, t)],
    "sibling-invariants": lambda s, p, t: [ids.check_sibling_invariants(s.pair, p, t)],
    "proposition": lambda s, p, t: [ids.check_proposition(s.pair, p, t)],
    "theorem-eq1": lambda s, p, t: list(ids.check_theorem_eq1(s.pair, _need_lam(s), p, t)),
    "constant-curvature": lambda s, p, t: [ids.check_constant_curvature(s.pair.gL, _need_lam(s), p, t)],
    "ricci-relation": lambda s, p, t: [ids.check_ricci_relation(s.pair, p, t)],
    "ricci-equality": lambda s, p, t: [ids.check_ricci_equality(s.pair, p, t)],
    "einstein": lambda s, p, t: [ids.check_einstein(s.pair.gL, (s.pair.dim - 1) * _need_lam(s), p, t)],
    "connection-relations": lambda s, p, t: [ids.check_connections(s.pair, p, t)],
    "bochner": _run_bochner,
    "riccati": _run_riccati,
    "remark1-sectionals": lambda s, p, t: [ids.check_remark1_sectionals(s.pair, _need_lam(s), p, t)],
    "remark3-ricci": lambda s, p, t: [ids.check_remark3_ricci(s.pair, _need_lam(s), p, t)],
    "big3": _run_big3,
    "bakry-emery": _run_bakry_emery,
}


def _failure(name: str, tol: float, exc: BaseException) -> IdentityResult:
    return IdentityResult(name, 0, math.inf, tol, False, [], {"error": f"{type(exc).__name__}: {exc}"})


@dataclass
class CheckRecord:
    check: str
    results: list[IdentityResult]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.results), default=math.inf)

    def to_dict(self, timing: bool = True) -> dict:
        d = {"check": self.check, "passed": self.passed, "results": [_clean(r.to_dict()) for r in self.results]}
        if timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        results = [IdentityResult(**_unclean(r)) for r in d["results"]]
        return cls(d["check"], results, d.get("wall_time", 0.0))


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings "inf", "-inf", "nan"."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _unclean(obj):
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    if isinstance(obj, dict):
        return {k: _unclean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unclean(v) for v in obj]
    return obj


@dataclass
class VerificationReport:
    config: dict
    records: list[CheckRecord] = field(default_factory=list)
    setup_error: str | None = None

    @property
    def passed(self) -> bool:
        return self.setup_error is None and bool(self.records) and all(r.passed for r in self.records)

    def first_failure(self) -> int:
        """1-based ordinal of the first failing check; 0 when everything passed."""
        if self.setup_error is not None:
            return 1
        for k, r in enumerate(self.records, 1):
            if not r.passed:
                return k
        return 0 if self.records else 1

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "config": self.config,
            "overall_pass": self.passed,
            "checks": [r.to_dict(timing) for r in self.records],
        }
        if self.setup_error is not None:
            d["setup_error"] = self.setup_error
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(d["config"], [CheckRecord.from_dict(r) for r in d["checks"]], d.get("setup_error"))

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        rows = [("#", "check", "status", "max residual", "tolerance", "samples")]
        for k, rec in enumerate(self.records, 1):
            for r in rec.results:
                status = "PASS" if r.passed else "FAIL"
                rows.append((str(k), r.identity_name, status, f"{r.max_residual:.3e}", f"{r.tolerance:.1e}", str(r.samples)))
                if "error" in r.details:
                    rows.append(("", "", "", r.details["error"], "", ""))
        widths = [max(len(row[i]) for row in rows if row[1] or i == 3) for i in range(6)]
        lines = []
        for row in rows:
            if not row[1] and row[0] == "":
                lines.append("    " + row[3])
                continue
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if self.setup_error:
            lines.append(f"setup failed: {self.setup_error}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def run(config: RunConfig) -> VerificationReport:
    """Build the subject, sample it and execute the requested checks.

    Errors from any module are caught and reported as failed checks.
    """
    report = VerificationReport(config.to_dict())
    tol = config.tolerance
    try:
        sub = build_subject(config)
        pts = sample_chart(sub.pair.chart, config.count, config.strategy)
    except (SibgeoError, ValueError, ArithmeticError) as exc:
        report.setup_error = f"{type(exc).__name__}: {exc}"
        return report
    names = config.checks if config.checks is not None else sub.expected
    for name in names:
        t0 = time.perf_counter()
        try:
            results = CHECKS[name](sub, pts, tol)
        except (SibgeoError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            results = [_failure(name, tol, exc)]
        report.records.append(CheckRecord(name, results, time.perf_counter() - t0))
    return report
