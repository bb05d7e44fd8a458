import math

import numpy as np
import pytest

from sibgeo import gallery
from sibgeo import identities as ids
from sibgeo.errors import BadParameters, Big3Violated
from sibgeo.expr import render
from sibgeo.sampling import sample_chart
from sibgeo.sibling import nabla_T_flat, shape_spectrum, verify_T_properties


@pytest.mark.parametrize("name", list(gallery.BUILDERS))
def test_entries_satisfy_t_hypotheses(entries, name):
    e = entries[name]
    rep = verify_T_properties(e.pair.g, e.pair.T, sample_chart(e.chart, 100))
    assert rep.passed(1e-6)


@pytest.mark.parametrize("name", list(gallery.BUILDERS))
def test_construction_is_deterministic(name):
    a, b = gallery.build(name), gallery.build(name)
    assert a.pair.gL == b.pair.gL and a.pair.g == b.pair.g and a.pair.T == b.pair.T
    assert [render(x) for row in a.pair.g.components for x in row] == [
        render(x) for row in b.pair.g.components for x in row
    ]


def test_unknown_entry():
    with pytest.raises(BadParameters):
        gallery.build("anti-de-sitter")


@pytest.mark.parametrize("kwargs", [{"n": 2}, {"n": 7}, {"n": 3.5}, {"r": 0.0}, {"r": -1.0}, {"r": math.inf}])
def test_de_sitter_bad_parameters(kwargs):
    with pytest.raises(BadParameters):
        gallery.de_sitter(**kwargs)


def test_example2_bad_parameter():
    with pytest.raises(BadParameters):
        gallery.example2(math.nan)


def test_flat_bad_parameter():
    with pytest.raises(BadParameters):
        gallery.flat_product(1)


# --- de Sitter ------------------------------------------------------------------------


@pytest.mark.parametrize("n, r", [(3, 1.0), (4, 2.0), (5, 1.5), (6, 1.0)])
def test_de_sitter_curvature(n, r):
    e = gallery.de_sitter(n, r)
    fit = ids.fit_constant_curvature(e.pair.gL, sample_chart(e.chart, 30))
    assert fit.lambda_hat == pytest.approx(1 / r**2, abs=1e-9)
    assert e.lam == pytest.approx(1 / r**2)


def test_de_sitter_spectrum_vanishes_at_t0(entries):
    e = entries["de-sitter"]
    assert np.max(np.abs(shape_spectrum(e.pair.g, e.pair.T, [0.0, 1.0, 2.0]).eigenvalues)) < 1e-15


@pytest.mark.parametrize("n, r", [(3, 1.0), (4, 2.0), (5, 1.0)])
def test_de_sitter_eigenvalue_factor(n, r):
    """The common eigenvalue is -tanh(t/r)/r; the doubled candidate is ruled out."""
    e = gallery.de_sitter(n, r)
    p = sample_chart(e.chart, 20)
    for q in p:
        w = shape_spectrum(e.pair.g, e.pair.T, q).eigenvalues
        single = -math.tanh(q[0] / r) / r
        doubled = 2 * single
        assert np.max(np.abs(w - single)) < 1e-8
        if abs(q[0]) > 1e-3:
            assert np.max(np.abs(w - doubled)) > 1e-8


def test_de_sitter_frame_ricci_diagonal(entries):
    """Ric(X_i, X_i) = (n-3) - 2(n-2)tanh²t, not (n-3) - 8(n-2)tanh²t."""
    from sibgeo.geometry import riemann_at
    from sibgeo.tensor import bilinear_components

    e = entries["de-sitter-4"]
    n = 4
    for q in sample_chart(e.chart, 20):
        spec = shape_spectrum(e.pair.g, e.pair.T, q)
        ric = bilinear_components(riemann_at(e.pair.g, q).ricci, spec.frame)
        th = math.tanh(q[0])
        assert np.allclose(np.diag(ric), (n - 3) - 2 * (n - 2) * th**2, atol=1e-12)
        if abs(th) > 1e-3:
            assert not np.allclose(np.diag(ric), (n - 3) - 8 * (n - 2) * th**2, atol=1e-6)


# --- example2 entry ----------------------------------------------------------------


def test_example2_einstein(entries):
    e = entries["example2"]
    assert ids.check_einstein(e.pair.gL, 1.0, sample_chart(e.chart, 100)).max_residual < 1e-8


def test_example2_unit_gradient(entries):
    e = entries["example2"]
    s = sample_chart(e.chart, 200)
    gL, Tv = e.pair.gL.values(s), e.pair.T.values(s)
    assert np.max(np.abs(np.einsum("...ij,...i,...j->...", gL, Tv, Tv) + 1)) < 1e-10


def test_example2_T_is_the_gradient(entries):
    """T^i = g_L^{ij} ∂_j f for the stored potential."""
    from sibgeo.expr import eval_jets

    e = entries["example2"]
    s = sample_chart(e.chart, 50)
    (jf,) = eval_jets([e.extras["potential"]], s, order=1)
    grad = np.einsum("...ij,...j->...i", np.linalg.inv(e.pair.gL.values(s)), jf.grad)
    assert np.max(np.abs(grad - e.pair.T.values(s))) < 1e-12


def test_example2_riemannian_sibling(entries):
    """g = g_L + 2 df⊗df."""
    from sibgeo.expr import eval_jets

    e = entries["example2"]
    s = sample_chart(e.chart, 50)
    (jf,) = eval_jets([e.extras["potential"]], s, order=1)
    expected = e.pair.gL.values(s) + 2 * np.einsum("...i,...j->...ij", jf.grad, jf.grad)
    assert np.max(np.abs(e.pair.g.values(s) - expected)) < 1e-12


def test_example2_proposition(entries):
    e = entries["example2"]
    assert ids.check_proposition(e.pair, sample_chart(e.chart, 100)).passed


def test_example2_expected_lambda(entries):
    assert entries["example2"].lam == 0.5
    assert dict(entries["example2"].expected)["einstein"] == 1.0


def test_example2_box_avoids_singularity():
    e = gallery.example2(3.0)
    assert e.chart.bounds[0] == (-2.5, 1.0)


# --- pp-waves ------------------------------------------------------------------------------


def test_plane_wave_valid(entries):
    e = entries["plane-wave"]
    assert ids.check_bakry_emery(e.pair.gL, ids.pp_potential(e.pair.gL), sample_chart(e.chart, 100)).passed


def test_general_pp_wave_valid():
    e = gallery.pp_wave("y^2", "2*x*y", "y^4 + 4*x^2*y^2")
    assert ids.check_proposition(e.pair, sample_chart(e.chart, 50)).passed


def test_pp_wave_big3_violated():
    with pytest.raises(Big3Violated):
        gallery.pp_wave("y", "x", "x^2")


def test_pp_wave_rejects_v_dependence():
    with pytest.raises(BadParameters):
        gallery.pp_wave("v", "x", "x^2 + y^2")


def test_pp_wave_u_dependent_profile():
    # f = h = 0 forces H_x = H_y = 0, so H may depend on u only
    e = gallery.pp_wave("0", "0", "sin(u)")
    assert ids.check_proposition(e.pair, sample_chart(e.chart, 30)).passed


# --- flat product ------------------------------------------------------------------------------


def test_flat_product_fit(entries):
    fit = ids.fit_constant_curvature(entries["flat-product"].pair.gL, sample_chart(entries["flat-product"].chart, 20))
    assert fit.lambda_hat == 0.0 and fit.residual < 1e-12


def test_flat_product_parallel(entries):
    e = entries["flat-product"]
    assert not nabla_T_flat(e.pair.g, e.pair.T, sample_chart(e.chart, 20)).any()


def test_flat_product_theorem_n4():
    e = gallery.flat_product(4)
    a, b = ids.check_theorem_eq1(e.pair, 0.0, sample_chart(e.chart, 20))
    assert a.passed and b.passed


def test_flat_sibling_is_minkowski(entries):
    gL = entries["flat-product"].pair.gL
    assert np.array_equal(gL.values(np.zeros(3)), np.diag([-1.0, 1.0, 1.0]))
