"""Numerical verification of the curvature identities relating g and g_L.

Every check evaluates residuals at sample points and reduces them with a
max; tensor residuals are scale-normalised as ``max|diff| / (1 + max|terms|)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import tensor
from .errors import BadParameters, TPropertiesViolated
from .expr import Coord, Expr, eval_jets
from .geometry import MetricField, PointGeometry, hessian, riemann_at, sectional
from .sibling import (
    SiblingPair,
    TFieldReport,
    check_connection_relations,
    divergence,
    nabla_T_flat,
    shape_spectrum,
    verify_T_properties,
)

DEFAULT_TOL = 1e-8
HYPOTHESIS_TOL = 1e-6


@dataclass
class IdentityResult:
    identity_name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_point: list[float]
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_residuals(cls, name: str, points, residuals, tol: float, **details) -> "IdentityResult":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        residuals = np.atleast_1d(np.asarray(residuals, dtype=float))
        if residuals.size == 0:
            return cls(name, 0, 0.0, tol, False, [], {"error": "no samples", **details})
        k = int(np.argmax(residuals))
        worst = float(residuals[k])
        return cls(name, len(residuals), worst, tol, bool(worst < tol), points[k].tolist(), details)


def _pts(samples) -> np.ndarray:
    return np.atleast_2d(np.asarray(samples, dtype=float))


def _scaled(diff, *terms) -> np.ndarray:
    """Per-sample scaled max-norm residual (sample axis first)."""
    axes = tuple(range(1, np.ndim(diff)))
    num = np.max(np.abs(diff), axis=axes)
    den = np.ones_like(num)
    for t in terms:
        den = np.maximum(den, 1.0 + np.max(np.abs(t), axis=tuple(range(1, np.ndim(t)))))
    return num / den


def _key(name: str, pts: np.ndarray):
    return (name, pts.shape, pts.tobytes())


def t_report(pair: SiblingPair, pts) -> TFieldReport:
    pts = _pts(pts)
    return pair.cached(_key("t-report", pts), lambda: verify_T_properties(pair.g, pair.T, pts))


def curvatures(pair: SiblingPair, pts) -> tuple[PointGeometry, PointGeometry, np.ndarray]:
    """(geometry of g, geometry of g_L, ∇T♭) at the samples, memoised on the pair."""
    pts = _pts(pts)

    def compute():
        return riemann_at(pair.g, pts), riemann_at(pair.gL, pts), nabla_T_flat(pair.g, pair.T, pts)

    return pair.cached(_key("curvatures", pts), compute)


def _require_hypotheses(pair: SiblingPair, pts) -> None:
    rep = t_report(pair, pts)
    if not rep.passed(HYPOTHESIS_TOL):
        raise TPropertiesViolated(
            "T lacks unit length, geodesic flow or an integrable normal bundle: "
            f"unit={rep.unit_residual:.3e} geodesic={rep.geodesic_residual:.3e} "
            f"symmetry={rep.symmetry_residual:.3e} integrability={rep.integrability_residual:.3e}"
        )


def _tflat(pair: SiblingPair, pg: PointGeometry, pts) -> np.ndarray:
    return tensor.lower(pg.g, pair.T.values(pts))


# ---------------------------------------------------------------------------


def check_t_properties(pair: SiblingPair, samples, tol: float = HYPOTHESIS_TOL) -> IdentityResult:
    pts = _pts(samples)
    rep = t_report(pair, pts)
    worst = max(rep.as_tuple())
    return IdentityResult(
        "t-properties", rep.samples, worst, tol, worst < tol, [],
        {
            "unit_residual": rep.unit_residual,
            "geodesic_residual": rep.geodesic_residual,
            "symmetry_residual": rep.symmetry_residual,
            "integrability_residual": rep.integrability_residual,
        },
    )


def check_sibling_invariants(pair: SiblingPair, samples, tol: float = 1e-10) -> IdentityResult:
    """g_L = g - 2T♭⊗T♭ as matrices, g(T,T) = 1 and g_L(T,T) = -1."""
    pts = _pts(samples)
    g = pair.g.values(pts)
    gL = pair.gL.values(pts)
    Tv = pair.T.values(pts)
    tf = tensor.lower(g, Tv)
    matrix = _scaled(gL - (g - 2.0 * tensor.outer(tf, tf)), g)
    unit = np.abs(tensor.inner(g, Tv, Tv) - 1.0)
    unit_L = np.abs(tensor.inner(gL, Tv, Tv) + 1.0)
    res = np.maximum(matrix, np.maximum(unit, unit_L))
    return IdentityResult.from_residuals(
        "sibling-invariants", pts, res, tol,
        matrix_residual=float(matrix.max()), unit_residual=float(unit.max()), unit_residual_L=float(unit_L.max()),
    )


def check_proposition(pair: SiblingPair, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """Rm_L = Rm + ∇T♭ ⍉ ∇T♭."""
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    pg, pgL, A = curvatures(pair, pts)
    kn = tensor.kn_product(A, A)
    res = _scaled(pgL.riemann - pg.riemann - kn, pgL.riemann, pg.riemann, kn)
    return IdentityResult.from_residuals("proposition", pts, res, tol)


def check_theorem_eq1(pair: SiblingPair, lam: float, samples, tol: float = DEFAULT_TOL):
    """Residuals of both sides of the space-form equivalence.

    A: Rm - (½λ g⍉g - 2λ g⍉(T♭⊗T♭) - ∇T♭⍉∇T♭)  for g;
    B: Rm_L - ½λ g_L⍉g_L                          for g_L.
    """
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    pg, pgL, A = curvatures(pair, pts)
    tf = _tflat(pair, pg, pts)
    tt = tensor.outer(tf, tf)
    model = 0.5 * lam * tensor.kn_product(pg.g, pg.g) - 2.0 * lam * tensor.kn_product(pg.g, tt) - tensor.kn_product(A, A)
    res_a = _scaled(pg.riemann - model, pg.riemann, model)
    model_L = 0.5 * lam * tensor.kn_product(pgL.g, pgL.g)
    res_b = _scaled(pgL.riemann - model_L, pgL.riemann, model_L)
    a = IdentityResult.from_residuals("theorem-eq1:riemannian", pts, res_a, tol, **{"lambda": lam})
    b = IdentityResult.from_residuals("theorem-eq1:lorentzian", pts, res_b, tol, **{"lambda": lam})
    return a, b


@dataclass(frozen=True)
class ConstantCurvatureFit:
    lambda_hat: float
    residual: float
    samples: int


def fit_constant_curvature(m: MetricField, samples) -> ConstantCurvatureFit:
    """Least-squares λ in Rm ≈ ½λ g⍉g over all samples and components."""
    pts = _pts(samples)
    pg = riemann_at(m, pts)
    K = 0.5 * tensor.kn_product(pg.g, pg.g)
    denom = float(np.sum(K * K))
    lam = float(np.sum(pg.riemann * K)) / denom if denom > 0 else 0.0
    res = _scaled(pg.riemann - lam * K, pg.riemann)
    return ConstantCurvatureFit(lam, float(res.max()), len(pts))


def check_constant_curvature(m: MetricField, lam: float, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    fit = fit_constant_curvature(m, samples)
    worst = max(abs(fit.lambda_hat - lam), fit.residual)
    return IdentityResult(
        "constant-curvature", fit.samples, worst, tol, worst < tol, [],
        {"lambda_hat": fit.lambda_hat, "lambda": lam, "fit_residual": fit.residual},
    )


def check_ricci_relation(pair: SiblingPair, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """Ric = Ric_L + 2 Rm_L(T,·,·,T) - tr_g(∇T♭⍉∇T♭), and Ric(T,T) = Ric_L(T,T).

    The trace contracts the first and last slots, as for Ricci.
    """
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    pg, pgL, A = curvatures(pair, pts)
    Tv = pair.T.values(pts)
    kn = tensor.kn_product(A, A)
    rmL_T = np.einsum("...abcd,...a,...d->...bc", pgL.riemann, Tv, Tv)
    rhs = pgL.ricci + 2.0 * rmL_T - tensor.trace_with_metric(kn, pg.g_inv)
    rel = _scaled(pg.ricci - rhs, pg.ricci, rhs)
    ric_tt = tensor.inner(pg.ricci, Tv, Tv)
    ricL_tt = tensor.inner(pgL.ricci, Tv, Tv)
    tt = np.abs(ric_tt - ricL_tt) / (1.0 + np.abs(ric_tt))
    res = np.maximum(rel, tt)
    return IdentityResult.from_residuals(
        "ricci-relation", pts, res, tol,
        relation_residual=float(rel.max()), tt_residual=float(tt.max()),
        ric_TT_min=float(ric_tt.min()), ric_TT_max=float(ric_tt.max()),
    )


def check_ricci_equality(pair: SiblingPair, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """Ric = Ric_L componentwise."""
    pts = _pts(samples)
    pg, pgL, _ = curvatures(pair, pts)
    res = _scaled(pg.ricci - pgL.ricci, pg.ricci, pgL.ricci)
    return IdentityResult.from_residuals("ricci-equality", pts, res, tol)


def check_einstein(m: MetricField, const: float, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """Ric = const · g."""
    pts = _pts(samples)
    pg = riemann_at(m, pts)
    res = _scaled(pg.ricci - const * pg.g, pg.ricci, pg.g)
    return IdentityResult.from_residuals("einstein", pts, res, tol, constant=const)


def check_connections(pair: SiblingPair, samples, tol: float = 1e-7) -> IdentityResult:
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    reps = [check_connection_relations(pair, p) for p in pts]
    res = [r.max for r in reps]
    return IdentityResult.from_residuals(
        "connection-relations", pts, res, tol,
        tt=max(r.tt for r in reps), xt=max(r.xt for r in reps),
        tx=max(r.tx for r in reps), xx=max(r.xx for r in reps),
    )


# ---------------------------------------------------------------------------
# Bochner / Riccati


def flow_curve(pair: SiblingPair, p0, step: float, n_steps: int) -> np.ndarray:
    """RK4 integral curve of T; truncated where it leaves the sampling box."""
    chart = pair.chart
    T = pair.T
    x = np.array(p0, dtype=float)
    out = [x.copy()]
    for _ in range(n_steps):
        k1 = T.values(x)
        k2 = T.values(x + 0.5 * step * k1)
        k3 = T.values(x + 0.5 * step * k2)
        k4 = T.values(x + step * k3)
        x = x + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not chart.contains(x):
            break
        out.append(x.copy())
    return np.array(out)


def flow_curves(pair: SiblingPair, starts, step: float = 1e-3, n_steps: int = 400) -> list[np.ndarray]:
    return [flow_curve(pair, p, step, n_steps) for p in _pts(starts)]


def check_bochner(
    pair: SiblingPair,
    curves: Sequence[np.ndarray],
    step: float = 1e-3,
    stride: int = 20,
    tol: float = 1e-6,
    slack: float = 1e-8,
) -> IdentityResult:
    """T(div T) = -Ric(T,T) - Σλ_i² along integral curves of T.

    ``curves`` are RK4 flow lines of T sampled every ``step``; T(div T) is the
    5-point central difference of div T in the flow parameter.  Also records
    the gap in -Ric(T,T) - (div T)²/(n-1) - T(div T) >= 0, which must be
    non-negative up to ``slack``.
    """
    n = pair.dim
    all_pts, residuals, gaps = [], [], []
    for curve in curves:
        curve = _pts(curve)
        if len(curve) < 5:
            continue
        _require_hypotheses(pair, curve[:: max(1, stride)])
        div = divergence(pair.g, pair.T, curve)
        idx = np.arange(2, len(curve) - 2, stride)
        if idx.size == 0:
            continue
        d_div = (div[idx - 2] - 8.0 * div[idx - 1] + 8.0 * div[idx + 1] - div[idx + 2]) / (12.0 * step)
        pts = curve[idx]
        pg = riemann_at(pair.g, pts)
        Tv = pair.T.values(pts)
        ric_tt = tensor.inner(pg.ricci, Tv, Tv)
        sq = np.array([np.sum(shape_spectrum(pair.g, pair.T, p).eigenvalues ** 2) for p in pts])
        rhs = -ric_tt - sq
        residuals.append(np.abs(d_div - rhs) / (1.0 + np.abs(rhs)))
        gaps.append(-ric_tt - div[idx] ** 2 / (n - 1) - d_div)
        all_pts.append(pts)
    if not residuals:
        return IdentityResult("bochner", 0, float("inf"), tol, False, [], {"error": "no usable flow curve"})
    res = np.concatenate(residuals)
    gap = np.concatenate(gaps)
    result = IdentityResult.from_residuals(
        "bochner", np.concatenate(all_pts), res, tol,
        bochner3_min_gap=float(gap.min()), bochner3_max_gap=float(gap.max()),
    )
    if gap.min() < -slack:
        result.passed = False
        result.details["bochner3_violated"] = True
    return result


def riccati_residual(
    n: int,
    lam: float,
    c: float,
    s_grid,
    solution: str | tuple[Callable, Callable] = "tanh",
) -> float:
    """max |u' - ((n-1)λ - u²/(n-1))| over ``s_grid``.

    ``solution`` is ``"tanh"`` for (n-1)√λ tanh(√λ s + c), ``"+"``/``"-"`` for
    the constant solutions ±(n-1)√λ, or a pair of callables ``(u, du)``.
    """
    if n < 2 or not (lam > 0) or not np.isfinite(lam):
        raise BadParameters("need n >= 2 and lambda > 0")
    s = np.asarray(s_grid, dtype=float)
    root = np.sqrt(lam)
    if solution == "tanh":
        arg = root * s + c
        u = (n - 1) * root * np.tanh(arg)
        du = (n - 1) * lam / np.cosh(arg) ** 2
    elif solution in ("+", "-"):
        sign = 1.0 if solution == "+" else -1.0
        u = np.full_like(s, sign * (n - 1) * root)
        du = np.zeros_like(s)
    else:
        ufun, dufun = solution
        u, du = np.asarray(ufun(s), dtype=float), np.asarray(dufun(s), dtype=float)
    rhs = (n - 1) * lam - u * u / (n - 1)
    return float(np.max(np.abs(du - rhs)))


def check_riccati(n: int, lam: float, tol: float = 1e-12) -> IdentityResult:
    s = np.linspace(-5.0, 5.0, 1001)
    worst = 0.0
    cases = {}
    for c in (0.0, 1.0):
        cases[f"tanh_c{c:g}"] = riccati_residual(n, lam, c, s)
    cases["plus"] = riccati_residual(n, lam, 0.0, s, "+")
    cases["minus"] = riccati_residual(n, lam, 0.0, s, "-")
    worst = max(cases.values())
    return IdentityResult("riccati", len(s), worst, tol, worst < tol, [], {"n": n, "lambda": lam, **cases})


# ---------------------------------------------------------------------------
# pp-waves


def check_big3(f: Expr, h: Expr, H: Expr, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """h_x = f_y, f f_x + h f_y - f_u = H_x/2, h h_y + f h_x - h_u = H_y/2 on (v, u, x, y)."""
    pts = _pts(samples)
    jf, jh, jH = eval_jets([f, h, H], pts, order=1)
    U, X, Y = 1, 2, 3
    fu, fx, fy = jf.grad[:, U], jf.grad[:, X], jf.grad[:, Y]
    hu, hx, hy = jh.grad[:, U], jh.grad[:, X], jh.grad[:, Y]
    Hx, Hy = jH.grad[:, X], jH.grad[:, Y]
    fv, hv = jf.value, jh.value
    r1 = np.abs(hx - fy)
    r2 = np.abs(fv * fx + hv * fy - fu - 0.5 * Hx)
    r3 = np.abs(hv * hy + fv * hx - hu - 0.5 * Hy)
    res = np.maximum(r1, np.maximum(r2, r3))
    return IdentityResult.from_residuals(
        "big3", pts, res, tol,
        curl_residual=float(r1.max()), x_residual=float(r2.max()), y_residual=float(r3.max()),
    )


def check_bakry_emery(
    m: MetricField,
    potential: Expr,
    samples,
    N: float = 3.5,
    tol: float = DEFAULT_TOL,
) -> IdentityResult:
    """Ric + Hess u - du⊗du/(N - n) = 0."""
    pts = _pts(samples)
    n = m.dim
    if N == n:
        raise BadParameters("synthetic dimension must differ from the manifold dimension")
    pg = riemann_at(m, pts)
    hess = hessian(m, potential, pts)
    (ju,) = eval_jets([potential], pts, order=1)
    du = ju.grad
    be = pg.ricci + hess - tensor.outer(du, du) / (N - n)
    res = np.max(np.abs(be), axis=(-2, -1))
    return IdentityResult.from_residuals("bakry-emery", pts, res, tol, N=N)


def pp_potential(m: MetricField) -> Expr:
    """The null coordinate u of a pp-wave chart (v, u, x, y)."""
    return Coord(1, m.chart.coord_names[1])


# ---------------------------------------------------------------------------
# Frame sectionals and Ricci diagonal


def check_remark1_sectionals(pair: SiblingPair, lam: float, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """sec(T, X_i) = -λ and sec(X_i, X_j) = λ - 2λ_iλ_j for g."""
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    pg_all, _, _ = curvatures(pair, pts)
    res = np.zeros(len(pts))
    for s, p in enumerate(pts):
        pg = pg_all[s]
        spec = shape_spectrum(pair.g, pair.T, p)
        X, li = spec.frame, spec.eigenvalues
        worst = 0.0
        for i in range(len(X)):
            worst = max(worst, abs(sectional(pg, spec.T, X[i]) + lam))
            for j in range(i + 1, len(X)):
                worst = max(worst, abs(sectional(pg, X[i], X[j]) - (lam - 2.0 * li[i] * li[j])))
        res[s] = worst / (1.0 + abs(lam))
    return IdentityResult.from_residuals("remark1-sectionals", pts, res, tol, **{"lambda": lam})


def check_remark3_ricci(pair: SiblingPair, lam: float, samples, tol: float = DEFAULT_TOL) -> IdentityResult:
    """Ric(X_i, X_i) = -λ + (n-2)λ - 2λ_i Σ_{k≠i} λ_k, with Ric(T,T) = -(n-1)λ."""
    pts = _pts(samples)
    _require_hypotheses(pair, pts)
    pg_all, _, _ = curvatures(pair, pts)
    n = pair.dim
    res = np.zeros(len(pts))
    for s, p in enumerate(pts):
        pg = pg_all[s]
        spec = shape_spectrum(pair.g, pair.T, p)
        li = spec.eigenvalues
        ric = tensor.bilinear_components(pg.ricci, spec.full_frame)
        expected_tt = -(n - 1) * lam
        worst = abs(ric[0, 0] - expected_tt)
        for i in range(n - 1):
            expected = -lam + (n - 2) * lam - 2.0 * li[i] * (np.sum(li) - li[i])
            worst = max(worst, abs(ric[i + 1, i + 1] - expected))
        res[s] = worst / (1.0 + np.max(np.abs(ric)))
    return IdentityResult.from_residuals("remark3-ricci", pts, res, tol, **{"lambda": lam})


__all__ = [
    "IdentityResult",
    "ConstantCurvatureFit",
    "check_t_properties",
    "check_sibling_invariants",
    "check_proposition",
    "check_theorem_eq1",
    "fit_constant_curvature",
    "check_constant_curvature",
    "check_ricci_relation",
    "check_ricci_equality",
    "check_einstein",
    "check_connections",
    "flow_curve",
    "flow_curves",
    "check_bochner",
    "riccati_residual",
    "check_riccati",
    "check_big3",
    "check_bakry_emery",
    "pp_potential",
    "check_remark1_sectionals",
    "check_remark3_ricci",
]
