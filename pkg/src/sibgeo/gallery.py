"""Built-in example geometries, each returned as a fully wired sibling pair."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameters, Big3Violated
from .expr import Const, Coord, Expr, parse
from .geometry import Chart, MetricField, VectorField
from .sampling import sample_chart
from .sibling import SiblingPair, make_pair

PP_COORDS = ("v", "u", "x", "y")


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    parameters: dict
    pair: SiblingPair
    expected: tuple[tuple[str, float | None], ...] = ()
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def chart(self) -> Chart:
        return self.pair.chart

    @property
    def lam(self) -> float | None:
        """Curvature of the Lorentzian sibling when it is a space form."""
        for name, value in self.expected:
            if name == "constant-curvature":
                return value
        return None

    @property
    def checks(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.expected)


def _num(x: float) -> str:
    x = float(x)
    s = str(int(x)) if x.is_integer() else repr(x)
    return f"({s})" if x < 0 else s


def _common_checks(lam: float | None) -> list[tuple[str, float | None]]:
    checks: list[tuple[str, float | None]] = [
        ("t-properties", None),
        ("sibling-invariants", None),
        ("proposition", None),
        ("ricci-relation", None),
        ("connection-relations", None),
        ("bochner", None),
    ]
    if lam is not None:
        checks += [
            ("theorem-eq1", lam),
            ("constant-curvature", lam),
            ("remark1-sectionals", lam),
            ("remark3-ricci", lam),
        ]
        if lam > 0:
            checks.append(("riccati", lam))
    return checks


def de_sitter(n: int = 3, r: float = 1.0) -> GalleryEntry:
    """-dt² + r²cosh²(t/r)·(round S^{n-1}) in nested polar angles, T = -∂_t."""
    if not (isinstance(n, (int, np.integer)) and 3 <= n <= 6):
        raise BadParameters(f"de Sitter needs an integer dimension 3 <= n <= 6, got {n!r}")
    if not (math.isfinite(r) and r > 0):
        raise BadParameters(f"radius must be positive, got {r!r}")
    names = ("t",) + tuple(f"theta{k}" for k in range(1, n))
    bounds = ((-2.0, 2.0),) + ((0.3, math.pi - 0.3),) * (n - 1)
    chart = Chart(names, bounds)
    if float(r) == 1.0:
        warp = "cosh(t)^2"
    else:
        warp = f"{_num(r)}^2*cosh(t/{_num(r)})^2"
    diag = ["-1", warp]
    for k in range(2, n):
        diag.append(warp + "".join(f"*sin(theta{j})^2" for j in range(1, k)))
    zero = Const(0.0)
    parsed = [chart.parse(s) for s in diag]
    rows = [[parsed[i] if i == j else zero for j in range(n)] for i in range(n)]
    gL = MetricField(chart, tuple(tuple(r_) for r_ in rows), "lorentzian")
    T = VectorField(chart, (Const(-1.0),) + (zero,) * (n - 1))
    pair = make_pair(gL, T, sample_chart(chart, 64))
    lam = 1.0 / float(r) ** 2
    return GalleryEntry("de-sitter", {"n": int(n), "r": float(r)}, pair, tuple(_common_checks(lam)))


def example2(a: float = 2.0) -> GalleryEntry:
    """The 3-dimensional Einstein metric with H(x1) = (x1 + a)²/2 and T = ∇^L f."""
    if not math.isfinite(a):
        raise BadParameters(f"a must be finite, got {a!r}")
    a = float(a)
    chart = Chart(("x1", "x2", "x3"), ((-a + 0.5, -a + 4.0), (-2.0, 2.0), (-2.0, 2.0)))
    A = _num(a)
    H = chart.parse(f"(x1 + {A})^2/2")
    one, zero = Const(1.0), Const(0.0)
    gL = MetricField(
        chart,
        ((zero, one, zero), (one, H, zero), (zero, zero, H / Const(2.0))),
        "lorentzian",
    )
    # f = √2 ln((x1 + a)/2), f' = √2/(x1 + a); ∇^L f = (-(f'/2)(x1+a)², f', 0)
    potential = chart.parse(f"sqrt(2)*ln((x1 + {A})/2)")
    fprime = chart.parse(f"sqrt(2)/(x1 + {A})")
    T = VectorField(chart, (-(fprime / Const(2.0)) * chart.parse(f"(x1 + {A})^2"), fprime, zero))
    pair = make_pair(gL, T, sample_chart(chart, 64))
    # Ric_L = g_L in dimension 3 forces sectional curvature 1/2
    checks = _common_checks(0.5) + [("einstein", 1.0)]
    return GalleryEntry("example2", {"a": a}, pair, tuple(checks), {"potential": potential, "H": H})


def _uses_coord(e: Expr, index: int) -> bool:
    if isinstance(e, Coord):
        return e.index == index
    return any(_uses_coord(c, index) for c in e.children())


def _pp_expr(e, what: str) -> Expr:
    if isinstance(e, str):
        e = parse(e, PP_COORDS)
    if _uses_coord(e, 0):
        raise BadParameters(f"{what} must not depend on v")
    return e


def pp_wave(f="y", h="x", H="x^2 + y^2", name: str = "pp-wave", big3_tol: float = 1e-8) -> GalleryEntry:
    """H du² + du dv + dv du + dx² + dy² on (v, u, x, y) with
    T = ½(H + f² + h² + 1)∂_v - ∂_u + f∂_x + h∂_y."""
    from .identities import check_big3

    f = _pp_expr(f, "f")
    h = _pp_expr(h, "h")
    H = _pp_expr(H, "H")
    chart = Chart(PP_COORDS, ((-1.5, 1.5),) * 4)
    samples = sample_chart(chart, 64)
    big3 = check_big3(f, h, H, samples, tol=big3_tol)
    if not big3.passed:
        raise Big3Violated(
            f"integrability conditions fail for f={f}, h={h}, H={H}: residual {big3.max_residual:.3e}"
        )
    one, zero = Const(1.0), Const(0.0)
    gL = MetricField(
        chart,
        (
            (zero, one, zero, zero),
            (one, H, zero, zero),
            (zero, zero, one, zero),
            (zero, zero, zero, one),
        ),
        "lorentzian",
    )
    Tv = Const(0.5) * (H + f * f + h * h + one)
    T = VectorField(chart, (Tv, Const(-1.0), f, h))
    pair = make_pair(gL, T, samples)
    checks = _common_checks(None) + [("big3", None)]
    params = {"f": str(f), "h": str(h), "H": str(H)}
    return GalleryEntry(name, params, pair, tuple(checks), {"f": f, "h": h, "H": H})


def plane_wave() -> GalleryEntry:
    """The pp-wave with f = y, h = x, H = x² + y²."""
    entry = pp_wave("y", "x", "x^2 + y^2", name="plane-wave")
    checks = entry.expected + (("ricci-equality", None), ("bakry-emery", 3.5))
    return GalleryEntry(entry.name, entry.parameters, entry.pair, checks, entry.extras)


def flat_product(n: int = 3) -> GalleryEntry:
    """Flat R × R^{n-1} with the parallel field T = ∂_t."""
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise BadParameters(f"dimension must be an integer >= 2, got {n!r}")
    names = ("t",) + tuple(f"x{k}" for k in range(1, n))
    chart = Chart(names, ((-1.0, 1.0),) * n)
    one, zero = Const(1.0), Const(0.0)
    g = MetricField.diagonal(chart, [one] * n)
    T = VectorField(chart, (one,) + (zero,) * (n - 1))
    pair = make_pair(g, T, sample_chart(chart, 16))
    return GalleryEntry("flat-product", {"n": int(n)}, pair, tuple(_common_checks(0.0)))


BUILDERS = {
    "de-sitter": de_sitter,
    "example2": example2,
    "plane-wave": plane_wave,
    "pp-wave": pp_wave,
    "flat-product": flat_product,
}

DEFAULTS = {
    "de-sitter": {"n": 3, "r": 1.0},
    "example2": {"a": 2.0},
    "plane-wave": {},
    "pp-wave": {"f": "y^2", "h": "2*x*y", "H": "y^4 + 4*x^2*y^2"},
    "flat-product": {"n": 3},
}


def build(name: str, **params) -> GalleryEntry:
    """Construct a gallery entry by its CLI name."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise BadParameters(f"unknown gallery entry {name!r}; known: {', '.join(BUILDERS)}") from None
    merged = {**DEFAULTS[name], **params}
    for key in ("n",):
        if key in merged and isinstance(merged[key], float) and merged[key].is_integer():
            merged[key] = int(merged[key])
    return builder(**merged)
