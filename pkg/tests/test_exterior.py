import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import forms, scalars
from prolongation.catalog import load_system
from prolongation.exterior import (
    Form, Matrix, MissingEntry, StructureTable, curv, d, exact, mat_d, mat_trace, mat_wedge, oneform,
    render_form, wedge,
)
from prolongation.scalar import Scalar

w1, w2, w3 = (Form.gen(oneform(f"w{k}")) for k in (1, 2, 3))
th1, th2 = Form.gen(curv("theta1")), Form.gen(curv("theta2"))
y3 = Scalar.var("y3")

SYSTEMS = {n: load_system(n) for n in ("sl2r", "o3", "su3")}


def generators_of(sys):
    return sys.omega + sys.dy + sys.theta


def test_odd_self_wedge_vanishes():
    assert (w1 * w1).is_zero()


def test_anticommutativity():
    assert (w1 * w2 + w2 * w1).is_zero()


def test_scalar_linearity():
    assert (w1 * y3) * w2 == (w1 * w2) * y3


def test_even_generators_commute():
    assert th1 * th2 == th2 * th1
    assert (th1 * w1) == (w1 * th1)


def test_d_on_generator_uses_table(sl2r):
    assert d(w1, sl2r.table) == th1 + w2 * w3


def test_d_of_exact_generator(sl2r):
    assert d(Form.gen(exact("dy1")), sl2r.table).is_zero()


def test_d_leibniz_example(sl2r):
    # d(y3 w2) = dy3 ^ w2 + y3 (theta2 + 2 w1 ^ w2)
    table = sl2r.table.with_pseudos(["y3"])
    want = Form.gen(exact("dy3")) * w2 + (th2 * y3) + (w1 * w2) * (y3 * 2)
    assert d(w2 * y3, table) == want


def test_missing_entry_names_symbol():
    with pytest.raises(MissingEntry, match="w9"):
        d(Form.gen(oneform("w9")), StructureTable())
    with pytest.raises(MissingEntry, match="q"):
        d(Form.scalar(Scalar.var("q")), StructureTable())


def test_sl2r_trace_is_zero(sl2r):
    assert mat_trace(sl2r.connection).is_zero()


def test_identity_scalar_matrix_times_zero():
    eye = Matrix.identity(2)
    assert mat_wedge(eye, Matrix.zeros(2)).is_zero()


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        mat_wedge(Matrix.zeros(2, 3), Matrix.zeros(2, 3))
    with pytest.raises(ValueError):
        Matrix.zeros(2) + Matrix.zeros(3)


def test_trace_of_chart_subconnection(o3):
    from prolongation.engine import pfaffians, riccati_chart
    c = riccati_chart(pfaffians(o3), 1)
    y4, y5 = Scalar.var("y4"), Scalar.var("y5")
    assert c.trace == w1 * (y4 * 3) - w2 * (y5 * 3)


def test_render_is_deterministic():
    u = w2 * w1 * y3 + th1
    assert render_form(u) == "-y3*w1^w2 + theta1"


@pytest.mark.parametrize("name", ["sl2r", "o3", "su3"])
def test_d_squared_on_every_generator(name):
    sys = SYSTEMS[name]
    for g in generators_of(sys):
        assert d(d(Form.gen(g), sys.table), sys.table).is_zero(), g.name


@pytest.mark.parametrize("name", ["sl2r", "o3", "su3"])
@settings(max_examples=35, deadline=None)
@given(data=st.data())
def test_d_squared_on_random_forms(name, data):
    sys = SYSTEMS[name]
    names = tuple(sys.pseudos)
    u = data.draw(forms(generators_of(sys), data.draw(st.integers(0, 2)), names))
    assert d(d(u, sys.table), sys.table).is_zero()


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_graded_leibniz(data):
    sys = SYSTEMS["sl2r"]
    gens, names = generators_of(sys), tuple(sys.pseudos)
    p, q = data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2))
    u = data.draw(forms(gens, p, names))
    v = data.draw(forms(gens, q, names))
    left = d(wedge(u, v), sys.table)
    right = wedge(d(u, sys.table), v) + wedge(u, d(v, sys.table)) * (-1) ** p
    assert left == right


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_wedge_graded_commutativity(data):
    gens = generators_of(SYSTEMS["sl2r"])
    p, q = data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2))
    u, v = data.draw(forms(gens, p)), data.draw(forms(gens, q))
    assert wedge(u, v) == wedge(v, u) * (-1) ** (p * q)


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_trace_of_graded_commutator_vanishes(data):
    gens = generators_of(SYSTEMS["sl2r"])
    p, q = data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2))
    M = Matrix([[data.draw(forms(gens, p, max_terms=2)) for _ in range(2)] for _ in range(2)])
    N = Matrix([[data.draw(forms(gens, q, max_terms=2)) for _ in range(2)] for _ in range(2)])
    comm = mat_wedge(M, N) - mat_wedge(N, M).scale((-1) ** (p * q))
    assert mat_trace(comm).is_zero()


@given(scalars())
def test_d_of_scalar_is_gradient(s):
    sys = SYSTEMS["sl2r"]
    table = sys.table.with_pseudos(["y3", "a1", "a2"])
    want = Form()
    for v in sorted(s.base_variables()):
        want = want + Form.gen(exact(f"d{v}")) * s.partial(v)
    assert d(Form.scalar(s), table) == want


def test_mat_d_is_entrywise(sl2r):
    M = mat_d(sl2r.connection, sl2r.table)
    assert M.rows[0][1] == d(w2, sl2r.table)
