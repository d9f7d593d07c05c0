from fractions import Fraction

import pytest
from hypothesis import strategies as st

from prolongation.catalog import load_system
from prolongation.engine import pfaffians
from prolongation.exterior import Form
from prolongation.scalar import Coeff, Scalar

VARS = ("y1", "y2", "y3", "a1", "a2")


@pytest.fixture(scope="session")
def sl2r():
    return load_system("sl2r")


@pytest.fixture(scope="session")
def o3():
    return load_system("o3")


@pytest.fixture(scope="session")
def su3():
    return load_system("su3")


@pytest.fixture(scope="session", params=["sl2r", "o3", "su3"])
def builtin(request):
    return load_system(request.param)


@pytest.fixture(scope="session")
def sl2r_pf(sl2r):
    return pfaffians(sl2r)


coeffs = st.builds(
    Coeff,
    st.fractions(min_value=-3, max_value=3, max_denominator=3),
    st.integers(-2, 2),
    st.integers(-1, 1),
    st.just(0),
)


@st.composite
def monomials(draw, names=VARS, max_power=2):
    chosen = draw(st.lists(st.sampled_from(names), max_size=3, unique=True))
    return {v: draw(st.integers(1, max_power)) for v in chosen}


@st.composite
def scalars(draw, names=VARS, max_terms=3):
    out = Scalar()
    for _ in range(draw(st.integers(0, max_terms))):
        out = out + Scalar.monomial(draw(monomials(names)), draw(coeffs))
    return out


@st.composite
def forms(draw, generators, degree, names=VARS, max_terms=3):
    """Random homogeneous form built from the given generators."""
    gens = [g for g in generators if g.degree <= degree]
    out = Form()
    for _ in range(draw(st.integers(0, max_terms))):
        term = Form.scalar(draw(scalars(names, 2)) + 1)
        left = degree
        while left > 0:
            pool = [g for g in gens if g.degree <= left]
            g = draw(st.sampled_from(pool))
            term = term * Form.gen(g)
            left -= g.degree
        out = out + term
    return out


small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero_fractions = small_fractions.filter(lambda q: q != 0)
half = Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(mod.LINES, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(mod.LINES[key])
