import math

import numpy as np
import pytest

from sibgeo.errors import DegeneratePlane, SignatureError, SingularMetric
from sibgeo.geometry import (
    Chart,
    MetricField,
    christoffel,
    hessian,
    integrate_geodesic,
    riemann_at,
    sectional,
    validate_signature,
)
from sibgeo.sampling import sample_chart
from sibgeo.tensor import check_riemann_symmetries, kn_product

from conftest import sphere_metric

GALLERY = ["de-sitter", "de-sitter-4-2", "example2", "plane-wave", "pp-wave", "flat-product"]


def fd_christoffel(m, p, h=1e-5):
    """Γ from central differences of metric values only."""
    n = len(p)
    dg = np.empty((n, n, n))  # dg[i, j, k] = ∂_k g_ij
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[:, :, k] = (m.values(p + e) - m.values(p - e)) / (2 * h)
    g_inv = np.linalg.inv(m.values(p))
    first = 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg))
    return np.einsum("kl,lij->kij", g_inv, first)


def flat(n=3):
    chart = Chart(tuple(f"x{i}" for i in range(n)), ((-1.0, 1.0),) * n)
    rows = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    return MetricField.from_strings(chart, rows)


# --- Christoffel symbols -----------------------------------------------------------


def test_flat_christoffel_zero():
    assert not christoffel(flat(), np.array([0.1, 0.2, 0.3])).any()


def test_plane_wave_christoffel(entries):
    gL = entries["plane-wave"].pair.gL
    for p in sample_chart(gL.chart, 10):
        gam = christoffel(gL, p)
        # index order (v, u, x, y)
        assert gam[2, 1, 1] == pytest.approx(-p[2], abs=1e-14)


def test_warped_christoffel(entries):
    g = entries["de-sitter"].pair.g
    gam = christoffel(g, np.array([1.0, 1.2, 0.7]))
    assert gam[1, 0, 1] == pytest.approx(math.tanh(1.0), abs=1e-14)
    assert gam[2, 0, 2] == pytest.approx(math.tanh(1.0), abs=1e-14)
    assert gam[1, 0, 1] == pytest.approx(0.76159, abs=1e-5)


def test_christoffel_symmetric(entries):
    for name in GALLERY:
        pts = sample_chart(entries[name].chart, 20)
        gam = christoffel(entries[name].pair.gL, pts)
        assert np.array_equal(gam, np.swapaxes(gam, -1, -2)), name


@pytest.mark.parametrize("name", GALLERY)
@pytest.mark.parametrize("which", ["g", "gL"])
def test_christoffel_jets_match_finite_differences(entries, name, which):
    m = getattr(entries[name].pair, which)
    pts = sample_chart(m.chart, 50)
    for p in pts:
        exact = christoffel(m, p)
        approx = fd_christoffel(m, p)
        assert np.max(np.abs(exact - approx)) <= 1e-5 * (1.0 + np.max(np.abs(exact))), p


# --- curvature -------------------------------------------------------------------------


def test_flat_curvature_zero():
    pg = riemann_at(flat(4), np.array([0.1, 0.2, 0.3, 0.4]))
    assert not pg.riemann.any() and not pg.ricci.any() and pg.scalar == 0.0


@pytest.mark.parametrize("r", [1.0, 2.0, 0.5])
def test_sphere_is_space_form(r):
    m = sphere_metric(r)
    for p in sample_chart(m.chart, 20):
        pg = riemann_at(m, p)
        model = 0.5 / r**2 * kn_product(pg.g, pg.g)
        assert np.max(np.abs(pg.riemann - model)) < 1e-9
        assert pg.scalar == pytest.approx(2.0 / r**2, rel=1e-12)


def test_unit_sphere_sectional():
    pg = riemann_at(sphere_metric(1.0), np.array([1.0, 0.3]))
    assert sectional(pg, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)
    assert sectional(pg, [1.0, 2.0], [0.5, -1.0]) == pytest.approx(1.0, abs=1e-12)


def test_sphere_symmetries():
    rep = check_riemann_symmetries(riemann_at(sphere_metric(1.0), np.array([1.0, 0.3])).riemann)
    assert max(rep.antisymmetry, rep.pair_symmetry, rep.bianchi) < 1e-10


def test_de_sitter_lorentzian_space_form(entries):
    gL = entries["de-sitter"].pair.gL
    pg = riemann_at(gL, sample_chart(gL.chart, 100))
    model = 0.5 * kn_product(pg.g, pg.g)
    assert np.max(np.abs(pg.riemann - model)) < 1e-8


@pytest.mark.parametrize("name", GALLERY)
def test_gallery_riemann_symmetries(entries, name):
    for m in (entries[name].pair.g, entries[name].pair.gL):
        pg = riemann_at(m, sample_chart(m.chart, 50))
        assert check_riemann_symmetries(pg.riemann, tol=1e-9).passed


def test_degenerate_plane():
    pg = riemann_at(sphere_metric(), np.array([1.0, 0.0]))
    with pytest.raises(DegeneratePlane):
        sectional(pg, [1.0, 1.0], [2.0, 2.0])


def _div_ricci_minus_half_dscalar(m, p, h=1e-4):
    n = len(p)
    pg = riemann_at(m, p)
    dric = np.empty((n, n, n))  # [c, a, b] = ∂_c Ric_ab
    dS = np.empty(n)
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        plus, minus = riemann_at(m, p + e), riemann_at(m, p - e)
        dric[c] = (plus.ricci - minus.ricci) / (2 * h)
        dS[c] = (plus.scalar - minus.scalar) / (2 * h)
    gam, ric = pg.christoffel, pg.ricci
    # ∇_c Ric_ab = ∂_c Ric_ab - Γ^d_ca Ric_db - Γ^d_cb Ric_ad
    nabla = dric - np.einsum("dca,db->cab", gam, ric) - np.einsum("dcb,ad->cab", gam, ric)
    div = np.einsum("ca,cab->b", pg.g_inv, nabla)
    return div - 0.5 * dS, 1.0 + np.max(np.abs(dS))


@pytest.mark.parametrize("name", ["example2", "plane-wave", "pp-wave", "de-sitter-4-2"])
def test_contracted_bianchi(entries, name):
    pair = entries[name].pair
    for m in (pair.g, pair.gL):
        for p in sample_chart(m.chart, 5):
            res, scale = _div_ricci_minus_half_dscalar(m, p)
            assert np.max(np.abs(res)) / scale < 1e-6, (name, m.signature, p)


# --- Hessians --------------------------------------------------------------------


def test_flat_hessian():
    m = flat(3)
    f = m.chart.parse("x0^2 + x1^2 + x2^2")
    assert np.allclose(hessian(m, f, np.array([0.3, -0.2, 0.9])), 2.0 * np.eye(3), atol=1e-15)


def test_pp_hessian_of_u_vanishes(entries):
    gL = entries["pp-wave"].pair.gL
    u = gL.chart.parse("u")
    assert not np.any(hessian(gL, u, sample_chart(gL.chart, 20)))


def test_pp_hessian_of_v(entries):
    gL = entries["plane-wave"].pair.gL
    v = gL.chart.parse("v")
    for p in sample_chart(gL.chart, 10):
        # Hess v = -Γ^v_ij; Γ from the finite-difference oracle
        expected = -fd_christoffel(gL, p)[0]
        got = hessian(gL, v, p)
        assert np.max(np.abs(got - expected)) < 1e-8
        # the only nonzero entries are the (u, x) and (u, y) blocks: -½ H_x, -½ H_y
        x, y = p[2], p[3]
        assert got[1, 2] == pytest.approx(-x, abs=1e-14)
        assert got[1, 3] == pytest.approx(-y, abs=1e-14)
        assert got[1, 1] == 0.0
    assert np.any(hessian(gL, v, np.array([0.0, 0.0, 0.5, 0.5])))


# --- geodesics ----------------------------------------------------------------------


def test_flat_geodesic_is_a_line():
    m = flat(3)
    p0, v0 = np.array([-0.5, 0.1, 0.0]), np.array([0.3, -0.2, 0.1])
    tr = integrate_geodesic(m, p0, v0, 1e-2, 200)
    assert not tr.stopped_early
    assert np.max(np.abs(tr.x - (p0 + tr.s[:, None] * v0))) < 1e-12


def test_sphere_speed_conserved():
    m = sphere_metric(1.0)
    tr = integrate_geodesic(m, [math.pi / 2, 0.0], [0.5, 1.0], 1e-3, 10_000)
    assert not tr.stopped_early and len(tr.s) == 10_001
    assert np.max(np.abs(tr.speed - tr.speed[0])) < 1e-6


def test_lorentzian_speed_conserved(entries):
    gL = entries["de-sitter"].pair.gL
    tr = integrate_geodesic(gL, [0.0, 1.5, 1.5], [0.2, 0.1, 0.1], 1e-3, 2000)
    assert np.max(np.abs(tr.speed - tr.speed[0])) < 1e-6


def test_de_sitter_t_lines(entries):
    g = entries["de-sitter"].pair.g
    tr = integrate_geodesic(g, [-1.0, 1.2, 2.0], [1.0, 0.0, 0.0], 1e-3, 1500)
    assert np.max(np.abs(tr.x[:, 0] - (-1.0 + tr.s))) < 1e-12
    assert np.max(np.abs(tr.x[:, 1:] - [1.2, 2.0])) < 1e-12


def test_geodesic_stops_at_box():
    tr = integrate_geodesic(flat(3), [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 0.1, 100)
    assert tr.stopped_early and "box" in tr.reason
    assert tr.x[-1, 0] <= 1.0 and len(tr.s) == 11


def test_geodesic_stops_at_singularity():
    chart = Chart(("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))
    m = MetricField.from_strings(chart, [["1/x", "0"], ["0", "1"]])
    tr = integrate_geodesic(m, [-0.2, 0.0], [1.0, 0.0], 0.05, 100, box=Chart(("x", "y"), ((-5, 5), (-5, 5))))
    assert tr.stopped_early


# --- validation ------------------------------------------------------------------------


def test_singular_metric():
    chart = Chart(("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))
    m = MetricField.from_strings(chart, [["1", "1"], ["1", "1"]])
    with pytest.raises(SingularMetric):
        christoffel(m, np.array([0.0, 0.0]))


def test_signature_mismatch():
    chart = Chart(("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))
    m = MetricField.from_strings(chart, [["-1", "0"], ["0", "1"]], "riemannian")
    with pytest.raises(SignatureError):
        validate_signature(m, sample_chart(chart, 10))


def test_asymmetric_metric_rejected():
    chart = Chart(("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))
    with pytest.raises(ValueError):
        MetricField.from_strings(chart, [["1", "x"], ["y", "1"]])


@pytest.mark.parametrize(
    "names, bounds",
    [(("x",), ((0, 1),)), (("x", "x"), ((0, 1), (0, 1))), (("x", "y"), ((0, 1), (1, 0))), (("x", "y"), ((0, 1),))],
)
def test_bad_charts(names, bounds):
    with pytest.raises(ValueError):
        Chart(names, bounds)
