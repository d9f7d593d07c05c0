from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import forms, scalars
from prolongation.catalog import load_system
from prolongation.checks import theta_pattern
from prolongation.engine import (
    GaugeError, GaugeMatrix, bianchi_defect, chart_identity_defect, chart_names, chart_subsystem,
    closure_decompose, curvature, d_squared_defects, extend_sl2, gauge_transform, pfaffians,
    riccati_chart, subchart_decompositions, trace_closure,
)
from prolongation.exterior import Form, Matrix, d, exact, mat_wedge, oneform, wedge
from prolongation.scalar import Scalar


@lru_cache(maxsize=None)
def pf_of(name):
    return pfaffians(load_system(name))


@lru_cache(maxsize=None)
def chart_of(name, p):
    return riccati_chart(pf_of(name), p)


def W(k):
    return Form.gen(oneform(f"w{k}"))


def DY(k):
    return Form.gen(exact(f"dy{k}"))


Y = Scalar.var

CHARTS = [("sl2r", 1), ("sl2r", 2), ("o3", 1), ("o3", 2), ("o3", 3), ("su3", 1), ("su3", 2), ("su3", 3)]


@pytest.mark.parametrize("name", ["sl2r", "o3", "su3"])
def test_bianchi_and_d_squared(name):
    sys = load_system(name)
    assert bianchi_defect(sys).is_zero()
    assert d_squared_defects(sys.table) == []


@pytest.mark.parametrize("name", ["sl2r", "o3", "su3"])
def test_linear_pfaffian_closure(name):
    # d alpha_i = -Theta_ij y_j + Omega_ij ^ alpha_j
    sys = load_system(name)
    pf = pf_of(name)
    theta = theta_pattern(sys)
    ys = [Y(y) for y in sys.pseudos]
    for i, f in enumerate(pf.forms):
        dec = pf.decompose(d(f, sys.table))
        assert dec.in_ideal and dec.certify()
        assert dec.A == list(sys.connection.rows[i])
        assert dec.theta_part() == -sum((theta.rows[i][j] * ys[j] for j in range(sys.dim)), Form())


def test_sl2r_pfaffian_forms(sl2r_pf):
    assert sl2r_pf.forms[0] == DY(1) - W(1) * Y("y1") - W(2) * Y("y2")
    assert sl2r_pf.forms[1] == DY(2) - W(3) * Y("y1") + W(1) * Y("y2")


def test_sl2r_chart_one_is_riccati():
    c = chart_of("sl2r", 1)
    r = Y("y3")
    assert c.ratios == {"y3": ("y2", "y1")}
    assert c.forms == [DY(3) - W(3) + W(1) * (r * 2) + W(2) * (r * r)]
    assert c.subconnection == Matrix([[W(1) * -2 - W(2) * (r * 2)]])


def test_chart_numbering():
    assert chart_names(2, 1) == [3] and chart_names(2, 2) == [4]
    assert chart_names(3, 1) == [4, 5] and chart_names(3, 3) == [8, 9]


@pytest.mark.parametrize("name,p", CHARTS)
def test_chart_self_certifies(name, p):
    c = chart_of(name, p)
    assert all(x.is_zero() for x in chart_identity_defect(pf_of(name), c))
    for dec in c.decompositions:
        assert dec.in_ideal and dec.certify()


@pytest.mark.parametrize("name,p", [cp for cp in CHARTS if cp[0] != "sl2r"])
def test_chart_curvature_and_trace_in_ideal(name, p):
    c = chart_of(name, p)
    for row in subchart_decompositions(c):
        for dec in row:
            assert dec.certify()
            assert dec.alpha_part().is_zero() or dec.in_ideal
    assert trace_closure(c).certify()


@pytest.mark.parametrize("name,p", [("o3", 1), ("su3", 2)])
def test_chart_subsystem_shape(name, p):
    sub = chart_subsystem(chart_of(name, p))
    assert all(x.is_zero() for x in sub.shape_defects)
    assert all(dec.certify() for dec in sub.decompositions)


def test_pivot_out_of_range():
    with pytest.raises(ValueError):
        riccati_chart(pf_of("sl2r"), 3)


def test_sl2r_extension_closes():
    ext = extend_sl2(pf_of("sl2r"))
    assert set(ext.decompositions) == {"sigma1", "sigma2", "alpha5", "alpha6", "alpha7", "alpha8"}
    for key, dec in ext.decompositions.items():
        assert dec.certify(), key
    for key in ("alpha5", "alpha6", "alpha7", "alpha8"):
        assert ext.decompositions[key].in_ideal, key
    assert ext.sigmas[0] == W(1) + W(2) * Y("y3")


def test_closure_rejects_one_form(sl2r_pf):
    with pytest.raises(ValueError):
        sl2r_pf.decompose(W(1))


def test_pure_omega_two_form_is_outside(sl2r_pf):
    assert not sl2r_pf.decompose(W(1) * W(2)).in_ideal


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_constructed_members_have_zero_remainder(data):
    sys, pf = load_system("o3"), pf_of("o3")
    ones = [oneform(w) for w in sys.oneforms] + sys.dy
    beta = Form()
    for f in pf.forms:
        beta = beta + wedge(data.draw(forms(ones, 1, sys.pseudos, 2)), f)
    for th in sys.theta:
        beta = beta + Form.gen(th) * data.draw(scalars(sys.pseudos, 2))
    dec = pf.decompose(beta)
    assert dec.in_ideal and dec.certify()


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_decomposition_always_reassembles(data):
    sys, pf = load_system("sl2r"), pf_of("sl2r")
    gens = [oneform(w) for w in sys.oneforms] + sys.dy + sys.theta
    beta = data.draw(forms(gens, 2, sys.pseudos))
    dec = closure_decompose(beta, pf.basis, sys.theta)
    assert dec.certify()
    assert dec.reassemble() == dec.substituted


# ---------------------------------------------------------------- gauge

@pytest.mark.parametrize("name", ["sl2r"])
def test_symbolic_gauge_covariance(name):
    sys = load_system(name)
    # the four-entry form only constrains values, not differentials, so it is
    # exercised by the adjugate test instead
    for A in (GaugeMatrix.symbolic(), GaugeMatrix.diagonal()):
        res = gauge_transform(sys.connection, A, sys.table)
        assert res.certified


def test_identity_gauge_is_noop(sl2r):
    res = gauge_transform(sl2r.connection, GaugeMatrix.constant([[1, 0], [0, 1]]), sl2r.table)
    assert res.connection == sl2r.connection
    assert res.curvature == curvature(sl2r.connection, sl2r.table)


def test_constant_rotation_on_o3(o3):
    A = GaugeMatrix.constant([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    res = gauge_transform(o3.connection, A, o3.table)
    assert res.certified


def test_missing_unimodular_relation_raises():
    v = [Scalar.var(x) for x in ("A11", "A12", "A21", "A22")]
    A = GaugeMatrix([[v[0], v[1]], [v[2], v[3]]], ["A11", "A12", "A21", "A22"])
    with pytest.raises(GaugeError):
        A.inverse_matrix()


def test_adjugate_is_inverse_under_relation():
    A = GaugeMatrix.with_relation()
    prod = mat_wedge(A.matrix(), A.inverse_matrix()).map(lambda e: e.normalize(A.relations))
    assert prod == Matrix.identity(2)


def test_gauge_size_mismatch(sl2r):
    with pytest.raises(ValueError):
        gauge_transform(sl2r.connection, GaugeMatrix.constant([[1]]), sl2r.table)
