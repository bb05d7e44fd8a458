import math

import numpy as np
import pytest

from sibgeo.errors import NotSymmetric, NotUnit, SignatureError
from sibgeo.expr import BinOp, Call, Const, Coord, Expr, Neg, Pow, total
from sibgeo.geometry import Chart, MetricField, VectorField
from sibgeo.sampling import sample_chart
from sibgeo.sibling import (
    check_connection_relations,
    make_pair,
    nabla_T_flat,
    normal_frame_jets,
    shape_spectrum,
    sibling_metric,
    verify_T_properties,
)
from sibgeo.tensor import outer

from conftest import BROKEN_FIELDS, FLAT3, broken_pair

EUCLID3 = MetricField.from_strings(FLAT3, [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])


def test_flat_sibling_is_minkowski():
    T = VectorField.from_strings(FLAT3, ["1", "0", "0"])
    gL = sibling_metric(EUCLID3, T)
    assert gL.signature == "lorentzian"
    assert np.array_equal(gL.values(np.array([1.0, 0.2, 0.3])), np.diag([-1.0, 1.0, 1.0]))


def test_de_sitter_sibling_reverses(entries):
    pair = entries["de-sitter"].pair
    pts = sample_chart(pair.chart, 50)
    t, th1 = pts[:, 0], pts[:, 1]
    c2 = np.cosh(t) ** 2
    expected = np.zeros((50, 3, 3))
    expected[:, 0, 0] = 1.0
    expected[:, 1, 1] = c2
    expected[:, 2, 2] = c2 * np.sin(th1) ** 2
    assert np.max(np.abs(pair.g.values(pts) - expected)) < 1e-14


@pytest.mark.parametrize("name", ["de-sitter", "example2", "plane-wave", "pp-wave", "flat-product"])
def test_involution(entries, name):
    pair = entries[name].pair
    back = sibling_metric(pair.gL, pair.T)
    pts = sample_chart(pair.chart, 100)
    g0 = pair.g.values(pts)
    assert back.signature == "riemannian"
    assert np.max(np.abs(back.values(pts) - g0)) < 1e-12 * (1 + np.max(np.abs(g0)))
    again = sibling_metric(back, pair.T)
    assert np.max(np.abs(again.values(pts) - pair.gL.values(pts))) < 1e-12 * (1 + np.max(np.abs(g0)))


def test_not_unit_reports_worst_point():
    T = VectorField.from_strings(FLAT3, ["x", "0", "0"])
    with pytest.raises(NotUnit) as err:
        sibling_metric(EUCLID3, T)
    # |T|² = x² is furthest from 1 at the upper end of the box
    assert err.value.point[0] == pytest.approx(FLAT3.upper[0], abs=0.05)
    assert err.value.value == pytest.approx(err.value.point[0] ** 2)


def test_signature_error():
    # a "Riemannian" input that is actually Lorentzian: the result has two negative directions
    m = MetricField.from_strings(FLAT3, [["1", "0", "0"], ["0", "-1", "0"], ["0", "0", "1"]], "riemannian")
    T = VectorField.from_strings(FLAT3, ["1", "0", "0"])
    with pytest.raises(SignatureError):
        sibling_metric(m, T)


@pytest.mark.parametrize("name", ["de-sitter", "example2", "plane-wave", "pp-wave", "flat-product"])
def test_pair_invariants(entries, name):
    pair = entries[name].pair
    pts = sample_chart(pair.chart, 100)
    g, gL, Tv = pair.g.values(pts), pair.gL.values(pts), pair.T.values(pts)
    Tf = np.einsum("...ij,...j->...i", g, Tv)
    assert np.max(np.abs(gL - (g - 2 * outer(Tf, Tf)))) < 1e-12 * (1 + np.max(np.abs(g)))
    assert np.max(np.abs(np.einsum("...ij,...i,...j->...", g, Tv, Tv) - 1)) < 1e-10
    assert np.max(np.abs(np.einsum("...ij,...i,...j->...", gL, Tv, Tv) + 1)) < 1e-10


@pytest.mark.parametrize("name", ["de-sitter", "plane-wave"])
def test_t_properties_hold(entries, name):
    pair = entries[name].pair
    rep = verify_T_properties(pair.g, pair.T, sample_chart(pair.chart, 100))
    assert max(rep.as_tuple()) < 1e-9


def test_unit_but_not_geodesic():
    pair = broken_pair("twisting-x2")
    rep = verify_T_properties(pair.g, pair.T, sample_chart(FLAT3, 64))
    assert rep.unit_residual < 1e-12
    assert rep.geodesic_residual > 0.1 and rep.symmetry_residual > 0.1


@pytest.mark.parametrize("field", sorted(BROKEN_FIELDS))
def test_broken_fields_show_asymmetry(field):
    pair = broken_pair(field)
    rep = verify_T_properties(pair.g, pair.T, sample_chart(FLAT3, 64))
    assert rep.unit_residual < 1e-12
    assert rep.symmetry_residual > 1e-3
    assert rep.geodesic_residual + rep.integrability_residual > 1e-3


def test_helicoid_fails_only_integrability():
    pair = broken_pair("helicoid")
    rep = verify_T_properties(pair.g, pair.T, sample_chart(FLAT3, 64))
    assert rep.geodesic_residual < 1e-12
    assert rep.integrability_residual > 0.5


@pytest.mark.parametrize(
    "name", ["de-sitter", "example2", "plane-wave", "pp-wave", "flat-product", *sorted(BROKEN_FIELDS)]
)
def test_symmetry_equivalent_to_geodesic_plus_integrable(entries, name):
    pair = broken_pair(name) if name in BROKEN_FIELDS else entries[name].pair
    C = 10.0
    for p in sample_chart(pair.chart, 32):
        rep = verify_T_properties(pair.g, pair.T, p)
        other = rep.geodesic_residual + rep.integrability_residual
        assert rep.symmetry_residual <= C * other + 1e-9
        assert other <= C * rep.symmetry_residual + 1e-9


# --- spectra -------------------------------------------------------------------------


def test_parallel_field_spectrum(entries):
    pair = entries["flat-product"].pair
    for p in sample_chart(pair.chart, 5):
        assert not shape_spectrum(pair.g, pair.T, p).eigenvalues.any()


def test_plane_wave_spectrum(entries):
    pair = entries["plane-wave"].pair
    for p in sample_chart(pair.chart, 10):
        w = shape_spectrum(pair.g, pair.T, p).eigenvalues
        assert w == pytest.approx([1.0, 0.0, -1.0], abs=1e-12)


def test_de_sitter_umbilic_golden(entries):
    pair = entries["de-sitter"].pair
    for t in np.linspace(-2, 2, 9):
        w = shape_spectrum(pair.g, pair.T, [t, 1.0, 1.3]).eigenvalues
        assert w == pytest.approx([-math.tanh(t)] * 2, abs=1e-12)
    assert not shape_spectrum(pair.g, pair.T, [0.0, 1.0, 1.3]).eigenvalues.any()


def test_eigenframe_properties(entries):
    pair = entries["example2"].pair
    for p in sample_chart(pair.chart, 10):
        spec = shape_spectrum(pair.g, pair.T, p)
        F = spec.full_frame
        assert np.allclose(F @ pair.g.values(p) @ F.T, np.eye(3), atol=1e-10)
        assert np.allclose(F @ pair.gL.values(p) @ F.T, np.diag([-1.0, 1.0, 1.0]), atol=1e-10)
        flat = nabla_T_flat(pair.g, pair.T, p)
        # D X_i = λ_i X_i, tested through the bilinear form
        assert np.allclose(spec.frame @ flat @ spec.frame.T, np.diag(spec.eigenvalues), atol=1e-9)
        assert list(spec.eigenvalues) == sorted(spec.eigenvalues, reverse=True)


def test_not_symmetric_raises():
    pair = broken_pair("twisting-x2")
    with pytest.raises(NotSymmetric):
        shape_spectrum(pair.g, pair.T, [1.0, 0.0, 0.0])


def _substitute(e: Expr, repl: dict[int, Expr]) -> Expr:
    if isinstance(e, Coord):
        return repl[e.index]
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(_substitute(e.arg, repl))
    if isinstance(e, BinOp):
        return BinOp(e.op, _substitute(e.left, repl), _substitute(e.right, repl))
    if isinstance(e, Pow):
        return Pow(_substitute(e.base, repl), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, _substitute(e.arg, repl))
    raise TypeError(e)


def _rotated(pair, R):
    """The same geometry in linear coordinates y = R x."""
    n = pair.dim
    names = tuple(f"y{i}" for i in range(n))
    ys = [Coord(i, names[i]) for i in range(n)]
    # x^i = Σ_a R_ai y^a
    repl = {i: total(Const(float(R[a, i])) * ys[a] for a in range(n)) for i in range(n)}
    chart = Chart(names, ((-50.0, 50.0),) * n)
    g = [[_substitute(pair.g.components[i][j], repl) for j in range(n)] for i in range(n)]
    rows = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            terms = [Const(float(R[a, i] * R[b, j])) * g[i][j] for i in range(n) for j in range(n)]
            rows[a][b] = rows[b][a] = total(terms)
    T = [total(Const(float(R[a, i])) * _substitute(pair.T.components[i], repl) for i in range(n)) for a in range(n)]
    return MetricField(chart, tuple(map(tuple, rows))), VectorField(chart, tuple(T))


@pytest.mark.parametrize("name", ["example2", "plane-wave", "pp-wave", "de-sitter"])
def test_spectrum_is_frame_independent(entries, name, rng):
    pair = entries[name].pair
    q, _ = np.linalg.qr(rng.normal(size=(pair.dim, pair.dim)))
    g2, T2 = _rotated(pair, q)
    for p in sample_chart(pair.chart, 8):
        w1 = shape_spectrum(pair.g, pair.T, p).eigenvalues
        w2 = shape_spectrum(g2, T2, q @ p).eigenvalues
        assert np.max(np.abs(w1 - w2)) < 1e-9


@pytest.mark.parametrize("name", ["de-sitter", "example2", "plane-wave", "pp-wave", "flat-product"])
def test_siblings_agree_on_normal_bundle(entries, name):
    pair = entries[name].pair
    for p in sample_chart(pair.chart, 20):
        E, _ = normal_frame_jets(pair.g, pair.T, p)
        a = E @ pair.g.values(p) @ E.T
        b = E @ pair.gL.values(p) @ E.T
        assert np.max(np.abs(a - b)) < 1e-12


# --- ∇T♭ -------------------------------------------------------------------------------


def test_parallel_nabla_t_flat(entries):
    pair = entries["flat-product"].pair
    assert not nabla_T_flat(pair.g, pair.T, sample_chart(pair.chart, 10)).any()


def test_de_sitter_umbilic_form(entries):
    pair = entries["de-sitter"].pair
    pts = sample_chart(pair.chart, 50)
    g = pair.g.values(pts)
    Tf = np.einsum("...ij,...j->...i", g, pair.T.values(pts))
    kappa = -np.tanh(pts[:, 0])[:, None, None]
    expected = kappa * (g - outer(Tf, Tf))
    assert np.max(np.abs(nabla_T_flat(pair.g, pair.T, pts) - expected)) < 1e-12


def test_example2_nabla_t_flat_symmetric(entries):
    pair = entries["example2"].pair
    A = nabla_T_flat(pair.g, pair.T, sample_chart(pair.chart, 100))
    assert np.max(np.abs(A - np.swapaxes(A, -1, -2))) < 1e-10


def test_t_row_vanishes(entries):
    pair = entries["pp-wave"].pair
    pts = sample_chart(pair.chart, 30)
    A = nabla_T_flat(pair.g, pair.T, pts)
    Tv = pair.T.values(pts)
    assert np.max(np.abs(np.einsum("...ij,...i->...j", A, Tv))) < 1e-9
    assert np.max(np.abs(np.einsum("...ij,...j->...i", A, Tv))) < 1e-9


# --- connection relations ---------------------------------------------------------------


def test_flat_connections(entries):
    pair = entries["flat-product"].pair
    for p in sample_chart(pair.chart, 5):
        assert check_connection_relations(pair, p).max < 1e-10


def test_de_sitter_connections(entries):
    rep = check_connection_relations(entries["de-sitter"].pair, [0.5, 1.1, 1.7])
    assert rep.max < 1e-7


def test_plane_wave_connections(entries):
    rep = check_connection_relations(entries["plane-wave"].pair, [0.3, -0.7, 0.41, 1.13])
    assert rep.max < 1e-7


def test_connection_relation_detects_wrong_pair(entries):
    # pairing the de Sitter g with an unrelated Lorentzian metric breaks the relations
    ds = entries["de-sitter"].pair
    other = make_pair(entries["flat-product"].pair.g, entries["flat-product"].pair.T)
    bogus = type(ds)(ds.g, MetricField(ds.chart, other.gL.components, "lorentzian"), ds.T)
    assert check_connection_relations(bogus, [0.5, 1.1, 1.7]).max > 1e-3
