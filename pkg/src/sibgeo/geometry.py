"""Chart-based metric geometry for metrics of either signature.

Curvature follows Rm(a,b,c,d) = g(∇_a∇_b c - ∇_b∇_a c - ∇_[a,b] c, d), so that
``Rm(u, v, v, u) > 0`` on a round sphere and the Ricci tensor is the trace
over the first and last slots.  Every function accepts either a single point
of shape ``(n,)`` or a batch of shape ``(N, n)``; results carry the same
leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor
from .errors import DegeneratePlane, DomainError, SignatureError, SingularMetric
from .expr import Expr, eval_jets, evaluate_many, parse
from .linalg import jacobi_eigh

DET_TOL = 1e-10


@dataclass(frozen=True)
class Chart:
    """Coordinate names plus a finite sampling box (one ``(lo, hi)`` per axis)."""

    coord_names: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        names = tuple(self.coord_names)
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "coord_names", names)
        object.__setattr__(self, "bounds", bounds)
        if len(names) < 2:
            raise ValueError("a chart needs at least 2 coordinates")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        if len(bounds) != len(names):
            raise ValueError("one sampling interval per coordinate is required")
        for name, (lo, hi) in zip(names, bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bad sampling interval for {name}: ({lo}, {hi})")

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def parse(self, source: str) -> Expr:
        return parse(source, self.coord_names)


@dataclass(frozen=True)
class MetricField:
    """Symmetric 2-tensor field given by an n×n matrix of expressions."""

    chart: Chart
    components: tuple[tuple[Expr, ...], ...]
    signature: str = "riemannian"

    def __post_init__(self):
        comps = tuple(tuple(row) for row in self.components)
        object.__setattr__(self, "components", comps)
        n = self.chart.dim
        if len(comps) != n or any(len(row) != n for row in comps):
            raise ValueError(f"metric must be {n}x{n}")
        for i in range(n):
            for j in range(i + 1, n):
                if comps[i][j] != comps[j][i]:
                    raise ValueError(f"metric is not symmetric at ({i}, {j})")
        for row in comps:
            for e in row:
                if e.max_coord_index() >= n:
                    raise ValueError("component references a coordinate outside the chart")
        if self.signature not in ("riemannian", "lorentzian"):
            raise ValueError(f"unknown signature {self.signature!r}")

    @classmethod
    def from_strings(cls, chart: Chart, rows: Sequence[Sequence[str]], signature: str = "riemannian"):
        parsed = [[chart.parse(s) for s in row] for row in rows]
        n = chart.dim
        for i in range(n):
            for j in range(i + 1, n):
                # identical text gives structurally equal trees; share the object
                if parsed[i][j] == parsed[j][i]:
                    parsed[j][i] = parsed[i][j]
        return cls(chart, tuple(tuple(r) for r in parsed), signature)

    @classmethod
    def diagonal(cls, chart: Chart, diag: Sequence[Expr], signature: str = "riemannian"):
        from .expr import Const

        n = chart.dim
        zero = Const(0.0)
        rows = [[diag[i] if i == j else zero for j in range(n)] for i in range(n)]
        return cls(chart, tuple(tuple(r) for r in rows), signature)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def _upper(self) -> list[Expr]:
        n = self.dim
        return [self.components[i][j] for i in range(n) for j in range(i, n)]

    def _assemble(self, flat: list[np.ndarray], tail: tuple) -> np.ndarray:
        n = self.dim
        batch = np.shape(flat[0])[: np.ndim(flat[0]) - len(tail)]
        out = np.empty(batch + (n, n) + tail)
        k = 0
        for i in range(n):
            for j in range(i, n):
                rest = (slice(None),) * len(tail)
                out[(Ellipsis, i, j) + rest] = flat[k]
                if i != j:
                    out[(Ellipsis, j, i) + rest] = flat[k]
                k += 1
        return out

    def values(self, points) -> np.ndarray:
        flat = evaluate_many(self._upper(), points)
        return self._assemble(flat, ())

    def jets(self, points, order: int = 2):
        """``(g, dg, ddg)`` with ``dg[..., i, j, k] = ∂_k g_ij`` and ``ddg[..., i, j, k, l] = ∂_k∂_l g_ij``."""
        js = eval_jets(self._upper(), points, order)
        n = self.dim
        g = self._assemble([j.value for j in js], ())
        dg = self._assemble([j.grad for j in js], (n,))
        ddg = self._assemble([j.hess for j in js], (n, n)) if order >= 2 else None
        return g, dg, ddg


@dataclass(frozen=True)
class VectorField:
    """Contravariant vector field given by n expressions."""

    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.chart.dim:
            raise ValueError(f"vector field needs {self.chart.dim} components")

    @classmethod
    def from_strings(cls, chart: Chart, comps: Sequence[str]):
        return cls(chart, tuple(chart.parse(s) for s in comps))

    def values(self, points) -> np.ndarray:
        return np.stack(evaluate_many(self.components, points), axis=-1)

    def jets(self, points, order: int = 1):
        """``(T, dT)`` with ``dT[..., k, i] = ∂_i T^k`` (plus ``ddT`` when order is 2)."""
        js = eval_jets(self.components, points, order)
        T = np.stack([j.value for j in js], axis=-1)
        dT = np.stack([j.grad for j in js], axis=-2)
        if order >= 2:
            return T, dT, np.stack([j.hess for j in js], axis=-3)
        return T, dT


# ---------------------------------------------------------------------------

def _inverse(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if np.any(np.abs(det) <= DET_TOL):
        raise SingularMetric(f"metric determinant {np.min(np.abs(det)):.3e} is below {DET_TOL}")
    return np.linalg.inv(g)


def _first_kind(dg: np.ndarray) -> np.ndarray:
    # Γ_{lij} = ½(∂_i g_jl + ∂_j g_il - ∂_l g_ij)
    return 0.5 * (
        np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg)
    )


def christoffel(m: MetricField, p) -> np.ndarray:
    """Γ^k_ij, indexed ``[..., k, i, j]``."""
    g, dg, _ = m.jets(p, order=1)
    g_inv = _inverse(g)
    return np.einsum("...kl,...lij->...kij", g_inv, _first_kind(dg))


@dataclass(frozen=True)
class PointGeometry:
    """Metric and curvature data at one point (or a batch of points)."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    dg: np.ndarray = field(repr=False, default=None)

    def __len__(self) -> int:
        if self.point.ndim == 1:
            raise TypeError("unbatched PointGeometry has no length")
        return self.point.shape[0]

    def __getitem__(self, k) -> "PointGeometry":
        return PointGeometry(
            self.point[k], self.g[k], self.g_inv[k], self.christoffel[k],
            self.riemann[k], self.ricci[k], self.scalar[k],
            None if self.dg is None else self.dg[k],
        )


def riemann_at(m: MetricField, p) -> PointGeometry:
    """Full curvature record at ``p``.

    ∂Γ comes from differentiating the Christoffel formula once using the
    metric Hessians carried by the jets:
    ∂_m Γ^k_ij = g^{kl} ∂_m Γ_{lij} - g^{ka} ∂_m g_ab Γ^b_ij.
    """
    p = np.asarray(p, dtype=float)
    g, dg, ddg = m.jets(p, order=2)
    g_inv = _inverse(g)
    gam1 = _first_kind(dg)
    gam = np.einsum("...kl,...lij->...kij", g_inv, gam1)
    # ∂_m Γ_{lij} = ½(∂_m∂_i g_jl + ∂_m∂_j g_il - ∂_m∂_l g_ij)
    dgam1 = 0.5 * (
        np.einsum("...jlim->...lijm", ddg)
        + np.einsum("...iljm->...lijm", ddg)
        - np.einsum("...ijlm->...lijm", ddg)
    )
    dgam = np.einsum("...kl,...lijm->...kijm", g_inv, dgam1) - np.einsum(
        "...ka,...abm,...bij->...kijm", g_inv, dg, gam
    )
    # R^e_abc = ∂_a Γ^e_bc - ∂_b Γ^e_ac + Γ^e_af Γ^f_bc - Γ^e_bf Γ^f_ac
    d_a = np.einsum("...ebca->...eabc", dgam)
    quad = np.einsum("...eaf,...fbc->...eabc", gam, gam)
    r_up = d_a - np.swapaxes(d_a, -3, -2) + quad - np.swapaxes(quad, -3, -2)
    rm = np.einsum("...de,...eabc->...abcd", g, r_up)
    ric = tensor.trace_with_metric(rm, g_inv)
    scalar = np.einsum("...ij,...ij->...", g_inv, ric)
    return PointGeometry(p, g, g_inv, gam, rm, ric, scalar, dg)


def sectional(pg: PointGeometry, u, v) -> float:
    """Rm(u, v, v, u) / (g(u,u) g(v,v) - g(u,v)^2)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    area = tensor.inner(pg.g, u, u) * tensor.inner(pg.g, v, v) - tensor.inner(pg.g, u, v) ** 2
    if np.any(np.abs(area) <= 1e-10):
        raise DegeneratePlane("the plane spanned by u and v is degenerate")
    return tensor.evaluate4(pg.riemann, u, v, v, u) / area


def hessian(m: MetricField, f: Expr, p) -> np.ndarray:
    """Hess f(i, j) = ∂_i∂_j f - Γ^k_ij ∂_k f."""
    gam = christoffel(m, p)
    (jf,) = eval_jets([f], p, order=2)
    return jf.hess - np.einsum("...kij,...k->...ij", gam, jf.grad)


def validate_signature(m: MetricField, points) -> None:
    """Raise :class:`SignatureError` unless ``m`` has its declared signature at every point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    gs = m.values(pts)
    want_neg = 0 if m.signature == "riemannian" else 1
    for p, g in zip(pts, gs):
        if abs(np.linalg.det(g)) <= DET_TOL:
            raise SingularMetric(f"metric is singular at {p.tolist()}")
        w, _ = jacobi_eigh(g)
        neg = int(np.sum(w < 0))
        if neg != want_neg:
            raise SignatureError(
                f"{m.signature} metric has {neg} negative eigenvalue(s) at {p.tolist()}: {w.tolist()}"
            )


# ---------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class Trajectory:
    """RK4 samples ``s[k]``, ``x[k]``, ``v[k]``; ``speed[k] = g(v, v)``."""

    s: np.ndarray
    x: np.ndarray
    v: np.ndarray
    speed: np.ndarray
    stopped_early: bool = False
    reason: str = ""


def integrate_geodesic(
    m: MetricField,
    p0,
    v0,
    step: float,
    n_steps: int,
    box: Chart | None = None,
) -> Trajectory:
    """Classic RK4 on ẍ^k = -Γ^k_ij ẋ^i ẋ^j.

    Integration stops early (flagged, not raised) when the path leaves the
    sampling box or the metric becomes singular or undefined.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    box = box or m.chart
    x = np.array(p0, dtype=float)
    v = np.array(v0, dtype=float)

    def accel(xx, vv):
        gam = christoffel(m, xx)
        return -np.einsum("kij,i,j->k", gam, vv, vv)

    xs, vs = [x.copy()], [v.copy()]
    stopped, reason = False, ""
    try:
        accel(x, v)
    except (SingularMetric, DomainError) as exc:
        raise SingularMetric(f"initial point is not admissible: {exc}") from exc
    for _ in range(int(n_steps)):
        try:
            k1x, k1v = v, accel(x, v)
            k2x, k2v = v + 0.5 * step * k1v, accel(x + 0.5 * step * k1x, v + 0.5 * step * k1v)
            k3x, k3v = v + 0.5 * step * k2v, accel(x + 0.5 * step * k2x, v + 0.5 * step * k2v)
            k4x, k4v = v + step * k3v, accel(x + step * k3x, v + step * k3v)
        except (SingularMetric, DomainError) as exc:
            stopped, reason = True, f"metric not admissible: {exc}"
            break
        x = x + (step / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (step / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not box.contains(x):
            stopped, reason = True, "left the sampling box"
            break
        xs.append(x)
        vs.append(v)
    X = np.array(xs)
    V = np.array(vs)
    gs = m.values(X)
    speed = np.einsum("kij,ki,kj->k", gs, V, V)
    s = step * np.arange(len(X))
    return Trajectory(s, X, V, speed, stopped, reason)
