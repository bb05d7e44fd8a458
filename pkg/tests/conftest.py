import math

import numpy as np
import pytest

from sibgeo import gallery
from sibgeo.geometry import Chart, MetricField, VectorField
from sibgeo.sampling import sample_chart
from sibgeo.sibling import make_pair


@pytest.fixture(scope="session")
def entries():
    """Every default gallery entry plus the second de Sitter variant, built once."""
    out = {name: gallery.build(name) for name in gallery.BUILDERS}
    out["de-sitter-4-2"] = gallery.de_sitter(4, 2.0)
    out["de-sitter-4"] = gallery.de_sitter(4, 1.0)
    return out


@pytest.fixture(scope="session")
def samples():
    cache = {}

    def get(entry, count=100):
        key = (id(entry), count)
        if key not in cache:
            cache[key] = sample_chart(entry.chart, count)
        return cache[key]

    return get


def sphere_metric(r=1.0):
    chart = Chart(("th", "ph"), ((0.2, math.pi - 0.2), (-100.0, 100.0)))
    return MetricField.from_strings(chart, [[f"{r}^2", "0"], ["0", f"{r}^2*sin(th)^2"]])


def perturbed_de_sitter(eps=0.05):
    """de Sitter (n=3, r=1) with eps·t²·dt² added to g; T rescaled to stay g-unit."""
    chart = Chart(("t", "theta1", "theta2"), ((-2.0, 2.0), (0.3, math.pi - 0.3), (0.3, math.pi - 0.3)))
    a = f"(1 + {eps}*t^2)"
    gL = MetricField.from_strings(
        chart,
        [[f"-{a}", "0", "0"], ["0", "cosh(t)^2", "0"], ["0", "0", "cosh(t)^2*sin(theta1)^2"]],
        "lorentzian",
    )
    T = VectorField.from_strings(chart, [f"-{a}^(-0.5)", "0", "0"])
    return make_pair(gL, T, sample_chart(chart, 64))


FLAT3 = Chart(("x", "y", "z"), ((0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)))

BROKEN_FIELDS = {
    # unit, not geodesic, integrable
    "twisting-x2": ("cos(x^2)", "sin(x^2)", "0"),
    # unit, geodesic, normal bundle not integrable
    "helicoid": ("cos(z)", "sin(z)", "0"),
    # unit gradient direction of a function whose gradient has non-constant length
    "normalised-gradient": ("1/sqrt(1 + 4*y^2)", "2*y/sqrt(1 + 4*y^2)", "0"),
}


def broken_pair(name):
    g = MetricField.from_strings(FLAT3, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])
    T = VectorField.from_strings(FLAT3, BROKEN_FIELDS[name])
    return make_pair(g, T, sample_chart(FLAT3, 64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
