"""The Riemannian/Lorentzian sibling transform g_L = g - 2 T♭⊗T♭ and the
geometry of the distinguished unit field T.

Conventions: ``nabla_T[..., k, i] = (∇_i T)^k`` and
``nabla_T_flat[..., i, j] = g(∇_{∂_i} T, ∂_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .errors import NotSymmetric, NotUnit, SibgeoError
from .expr import Const, Expr, add, mul, sub, total
from .geometry import MetricField, VectorField, christoffel, validate_signature
from .jet import Jet2
from .linalg import jacobi_eigh
from .sampling import sample_chart

UNIT_TOL = 1e-8
DEPENDENCE_TOL = 1e-8


@dataclass(frozen=True)
class SiblingPair:
    g: MetricField
    gL: MetricField
    T: VectorField
    # per-sample-set memo of expensive derived data; not part of the value
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def cached(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    @property
    def chart(self):
        return self.g.chart

    @property
    def dim(self) -> int:
        return self.g.dim


def _unit_target(m: MetricField) -> float:
    return 1.0 if m.signature == "riemannian" else -1.0


def unit_values(m: MetricField, T: VectorField, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return tensor.inner(m.values(pts), T.values(pts), T.values(pts))


def sibling_metric(m: MetricField, T: VectorField, samples=None, unit_tol: float = UNIT_TOL) -> MetricField:
    """The sibling of ``m`` with respect to the unit field ``T``.

    A Riemannian ``m`` yields ``m - 2 T♭⊗T♭`` (Lorentzian); a Lorentzian ``m``
    yields ``m + 2 T♭⊗T♭`` (Riemannian).  T♭ is built symbolically as
    ``T♭_i = m_ij T^j`` so the result is itself a first-class metric field.
    """
    if T.chart.dim != m.dim:
        raise ValueError("vector field and metric live on different charts")
    if samples is None:
        samples = sample_chart(m.chart, 64)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    target = _unit_target(m)
    vals = unit_values(m, T, samples)
    err = np.abs(vals - target)
    worst = int(np.argmax(err))
    if err[worst] > unit_tol:
        raise NotUnit(
            f"|T|^2 = {vals[worst]!r} (expected {target}) at {samples[worst].tolist()}",
            samples[worst],
            float(vals[worst]),
        )

    n = m.dim
    flat = [total(mul(m.components[i][j], T.components[j]) for j in range(n)) for i in range(n)]
    two = Const(2.0)
    combine = sub if m.signature == "riemannian" else add
    rows: list[list[Expr | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            e = combine(m.components[i][j], mul(two, mul(flat[i], flat[j])))
            rows[i][j] = rows[j][i] = e
    out_sig = "lorentzian" if m.signature == "riemannian" else "riemannian"
    out = MetricField(m.chart, tuple(tuple(r) for r in rows), out_sig)
    validate_signature(out, samples)
    return out


def make_pair(m: MetricField, T: VectorField, samples=None) -> SiblingPair:
    """Wire a :class:`SiblingPair` from either member plus ``T``."""
    other = sibling_metric(m, T, samples)
    if m.signature == "riemannian":
        return SiblingPair(m, other, T)
    return SiblingPair(other, m, T)


# ---------------------------------------------------------------------------
# covariant derivatives of T


def nabla_T(m: MetricField, T: VectorField, p) -> np.ndarray:
    """(∇_i T)^k = ∂_i T^k + Γ^k_il T^l, indexed ``[..., k, i]``."""
    gam = christoffel(m, p)
    Tv, dT = T.jets(p, order=1)
    return dT + np.einsum("...kil,...l->...ki", gam, Tv)


def nabla_T_flat(m: MetricField, T: VectorField, p) -> np.ndarray:
    """The 2-tensor ∇T♭(X, Y) = g(∇_X T, Y) as a coordinate matrix."""
    g = m.values(p)
    return np.einsum("...jk,...ki->...ij", g, nabla_T(m, T, p))


def divergence(m: MetricField, T: VectorField, p) -> np.ndarray:
    """div T = (∇_i T)^i."""
    return np.einsum("...ii->...", nabla_T(m, T, p))


# ---------------------------------------------------------------------------
# adapted frames


def _jets_at(m: MetricField, T: VectorField, p):
    """Order-1 jets of the metric entries and T components at one point."""
    n = m.dim
    g, dg, _ = m.jets(p, order=1)
    Tv, dT = T.jets(p, order=1)
    G = [[Jet2(g[i, j], dg[i, j]) for j in range(n)] for i in range(n)]
    Tj = [Jet2(Tv[k], dT[k]) for k in range(n)]
    return G, Tj


def _jinner(G, u, v) -> Jet2:
    n = len(G)
    acc = None
    for i in range(n):
        if u[i] is None:
            continue
        for j in range(n):
            if v[j] is None:
                continue
            term = G[i][j] * u[i] * v[j]
            acc = term if acc is None else acc + term
    return acc


def normal_frame_jets(m: MetricField, T: VectorField, p) -> tuple[np.ndarray, np.ndarray]:
    """Smooth orthonormal frame of T^⊥ near ``p``.

    Drops the coordinate vector with the largest |g(e_i, T)|, projects the
    rest onto T^⊥ and applies modified Gram-Schmidt in index order.  The
    recipe is evaluated in jet arithmetic so the frame comes with its first
    derivatives.  Returns ``(E, dE)`` with ``E[a, k]`` the k-th component of
    the a-th frame vector and ``dE[a, k, i] = ∂_i E_a^k``.
    """
    p = np.asarray(p, dtype=float)
    n = m.dim
    G, Tj = _jets_at(m, T, p)
    tt = _jinner(G, Tj, Tj)
    gT = [sum(float(G[i][j].value) * float(Tj[j].value) for j in range(n)) for i in range(n)]
    drop = int(np.argmax(np.abs(gT)))

    basis = []
    for i in range(n):
        if i == drop:
            continue
        e = [Jet2.constant(1.0 if k == i else 0.0, n, order=1) for k in range(n)]
        coef = _jinner(G, e, Tj) / tt
        basis.append([e[k] - coef * Tj[k] for k in range(n)])

    frame = []
    for w in basis:
        for q in frame:
            c = _jinner(G, w, q)
            w = [w[k] - c * q[k] for k in range(n)]
        norm2 = _jinner(G, w, w)
        if float(norm2.value) <= DEPENDENCE_TOL**2:
            raise SibgeoError(f"frame construction degenerate at {p.tolist()}")
        inv = norm2.compose(norm2.value ** -0.5, -0.5 * norm2.value ** -1.5, None)
        frame.append([w[k] * inv for k in range(n)])

    E = np.array([[float(c.value) for c in vec] for vec in frame])
    dE = np.array([[c.grad for c in vec] for vec in frame])
    return E, dE


def lie_bracket(X, dX, Y, dY) -> np.ndarray:
    """[X, Y]^k = X^i ∂_i Y^k - Y^i ∂_i X^k."""
    return np.einsum("i,ki->k", X, dY) - np.einsum("i,ki->k", Y, dX)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TFieldReport:
    unit_residual: float
    geodesic_residual: float
    symmetry_residual: float
    integrability_residual: float
    samples: int

    def passed(self, tol: float = 1e-6) -> bool:
        return max(self.as_tuple()) < tol

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.unit_residual, self.geodesic_residual, self.symmetry_residual, self.integrability_residual)


def verify_T_properties(m: MetricField, T: VectorField, samples) -> TFieldReport:
    """Residuals of unit length, geodesic flow, symmetry of ∇T♭ and integrability of T^⊥.

    Integrability is measured independently of ∇T♭: the Lie brackets of a
    smooth orthonormal frame of T^⊥ are differentiated from the frame's jets
    and paired with T.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    g = m.values(pts)
    Tv = T.values(pts)
    nT = nabla_T(m, T, pts)
    unit = np.abs(tensor.inner(g, Tv, Tv) - _unit_target(m))
    acc = np.einsum("...ki,...i->...k", nT, Tv)
    geo = np.sqrt(np.abs(tensor.inner(g, acc, acc)))
    flat = np.einsum("...jk,...ki->...ij", g, nT)
    sym = np.max(np.abs(flat - np.swapaxes(flat, -1, -2)), axis=(-2, -1))

    integ = np.zeros(len(pts))
    for s, p in enumerate(pts):
        E, dE = normal_frame_jets(m, T, p)
        gT = g[s] @ Tv[s]
        worst = 0.0
        for a in range(len(E)):
            for b in range(a + 1, len(E)):
                br = lie_bracket(E[a], dE[a], E[b], dE[b])
                worst = max(worst, abs(float(gT @ br)))
        integ[s] = worst
    return TFieldReport(float(unit.max()), float(geo.max()), float(sym.max()), float(integ.max()), len(pts))


@dataclass(frozen=True)
class ShapeSpectrum:
    """Principal curvatures of T^⊥ and the matching g-orthonormal eigenframe.

    ``frame[i]`` is the eigenvector for ``eigenvalues[i]`` in coordinate
    components; ``T`` completes the frame.  ``rotation`` maps the smooth
    normal frame ``basis`` onto the eigenframe (``frame = rotation.T @ basis``).
    """

    point: np.ndarray
    eigenvalues: np.ndarray
    frame: np.ndarray
    T: np.ndarray
    basis: np.ndarray
    rotation: np.ndarray
    matrix: np.ndarray

    @property
    def full_frame(self) -> np.ndarray:
        """T followed by X_1 .. X_{n-1}."""
        return np.vstack([self.T[None, :], self.frame])


def shape_spectrum(m: MetricField, T: VectorField, p, symmetry_tol: float = 1e-6) -> ShapeSpectrum:
    """Diagonalise the shape operator X ↦ ∇_X T on T^⊥ with cyclic Jacobi."""
    p = np.asarray(p, dtype=float)
    flat = nabla_T_flat(m, T, p)
    if np.max(np.abs(flat - flat.T)) > symmetry_tol:
        raise NotSymmetric(
            f"∇T♭ is not symmetric at {p.tolist()} (residual {np.max(np.abs(flat - flat.T)):.3e})"
        )
    E, _ = normal_frame_jets(m, T, p)
    D = E @ flat @ E.T
    if np.max(np.abs(D - D.T)) > symmetry_tol:
        raise NotSymmetric(f"shape operator is not self-adjoint at {p.tolist()}")
    w, Q = jacobi_eigh(D)
    frame = Q.T @ E
    return ShapeSpectrum(p, w, frame, T.values(p), E, Q, D)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionReport:
    """Residuals of the relations between the two Levi-Civita connections in the eigenframe."""

    tt: float  # ∇^L_T T + ∇_T T
    xt: float  # ∇^L_{X_i} T - ∇_{X_i} T
    tx: float  # ∇^L_T X_i - ∇_T X_i
    xx: float  # ∇^L_{X_i} X_j - 2 λ_i δ_ij T - ∇_{X_i} X_j

    @property
    def max(self) -> float:
        return max(self.tt, self.xt, self.tx, self.xx)


def _cov(gam, X, Y, dY) -> np.ndarray:
    # (∇_X Y)^k = X^i ∂_i Y^k + Γ^k_ij X^i Y^j
    return np.einsum("i,ki->k", X, dY) + np.einsum("kij,i,j->k", gam, X, Y)


def check_connection_relations(pair: SiblingPair, p) -> ConnectionReport:
    """Compare ∇ and ∇^L on the eigenframe {T, X_i}, extended near ``p`` by
    rotating the smooth normal frame with the constant eigenvector matrix."""
    p = np.asarray(p, dtype=float)
    spec = shape_spectrum(pair.g, pair.T, p)
    E, dE = normal_frame_jets(pair.g, pair.T, p)
    Q = spec.rotation
    X = Q.T @ E
    dX = np.einsum("ai,akj->ikj", Q, dE)
    Tv, dT = pair.T.jets(p, order=1)
    gam = christoffel(pair.g, p)
    gamL = christoffel(pair.gL, p)
    lam = spec.eigenvalues

    tt = np.max(np.abs(_cov(gamL, Tv, Tv, dT) + _cov(gam, Tv, Tv, dT)))
    xt = tx = xx = 0.0
    for i in range(len(X)):
        xt = max(xt, np.max(np.abs(_cov(gamL, X[i], Tv, dT) - _cov(gam, X[i], Tv, dT))))
        tx = max(tx, np.max(np.abs(_cov(gamL, Tv, X[i], dX[i]) - _cov(gam, Tv, X[i], dX[i]))))
        for j in range(len(X)):
            lhs = _cov(gamL, X[i], X[j], dX[j])
            rhs = _cov(gam, X[i], X[j], dX[j]) + (2.0 * lam[i] * Tv if i == j else 0.0)
            xx = max(xx, np.max(np.abs(lhs - rhs)))
    return ConnectionReport(float(tt), float(xt), float(tx), float(xx))
