"""Built-in differential systems and the machinery that completes them.

A system is a connection matrix whose entries are constant-coefficient
combinations of one-forms.  Writing the connection as ``sum_l w_l M_l``,
the curvature generators are defined by ``Theta = sum_l theta_l M_l``,
which fixes ``d w_l = theta_l + q_l`` where ``q_l`` is the ``M_l``
component of ``Omega ^ Omega``.  The derivative of each curvature
generator is then forced by ``d(d w_l) = 0``: ``d theta_l = -d q_l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exterior import (
    CURV, Form, Gen, Matrix, StructureTable, curv, differential_name, exact, mat_trace, mat_wedge, oneform,
)
from .exterior import d as ext_d
from .scalar import ONE_C, ZERO_C, Coeff, Scalar

BUILTIN_NAMES = ("sl2r", "o3", "su3")


class SystemError_(ValueError):
    """Inconsistent system definition."""


@dataclass(eq=False)
class SystemSpec:
    name: str
    dim: int
    oneforms: list
    pseudos: list
    thetas: list
    connection: Matrix
    table: StructureTable
    basis: list                   # M_l as nested lists of Coeff
    algebra: str = "custom"
    traceless: bool = False
    explicit: bool = False
    overrides: dict = field(default_factory=dict)

    @property
    def omega(self) -> list[Gen]:
        return [oneform(w) for w in self.oneforms]

    @property
    def theta(self) -> list[Gen]:
        return [curv(t) for t in self.thetas]

    @property
    def dy(self) -> list[Gen]:
        return [exact(differential_name(y)) for y in self.pseudos]

    def context(self) -> dict:
        return generator_context(self.oneforms, self.pseudos, self.thetas)

    def __eq__(self, other):
        if not isinstance(other, SystemSpec):
            return NotImplemented
        return (
            self.name == other.name and self.dim == other.dim
            and list(self.oneforms) == list(other.oneforms)
            and list(self.pseudos) == list(other.pseudos)
            and list(self.thetas) == list(other.thetas)
            and self.connection == other.connection
            and self.table.gens == other.table.gens
            and self.table.variables == other.table.variables
        )

    __hash__ = None


def generator_context(oneforms, pseudos, thetas) -> dict:
    ctx = {w: oneform(w) for w in oneforms}
    ctx.update({t: curv(t) for t in thetas})
    for y in pseudos:
        g = exact(differential_name(y))
        ctx[g.name] = g
    return ctx


# ---------------------------------------------------------------- linear algebra over Q(i, sqrt3)

def solve_coeffs(columns: list[list[Coeff]], target: list[Coeff]):
    """Solve ``sum_l x_l columns[l] = target``; None when inconsistent.

    Columns must be linearly independent.
    """
    n_rows = len(target)
    n_cols = len(columns)
    aug = [[columns[c][r] for c in range(n_cols)] + [target[r]] for r in range(n_rows)]
    pivots = []
    row = 0
    for col in range(n_cols):
        piv = next((r for r in range(row, n_rows) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise SystemError_("connection one-forms have linearly dependent coefficient matrices")
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = aug[row][col].inverse()
        aug[row] = [v * inv for v in aug[row]]
        for r in range(n_rows):
            if r != row and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    if any(not aug[r][-1].is_zero() for r in range(row, n_rows)):
        return None
    return [aug[k][-1] for k in range(n_cols)]


def connection_basis(connection: Matrix, omega: list[Gen]) -> list[list[list[Coeff]]]:
    """Constant coefficient matrix of each one-form in the connection."""
    n, m = connection.shape
    basis = [[[ZERO_C] * m for _ in range(n)] for _ in omega]
    index = {g: k for k, g in enumerate(omega)}
    for i, j, e in connection.entries():
        for mono, s in e.terms.items():
            if len(mono) != 1 or mono[0] not in index:
                raise SystemError_(f"connection entry ({i + 1},{j + 1}) is not linear in the declared one-forms")
            if not s.is_constant():
                raise SystemError_(f"connection entry ({i + 1},{j + 1}) has non-constant coefficients")
            basis[index[mono[0]]][i][j] = s.constant_value()
    return basis


def _components(form_matrix: Matrix, basis) -> list[Form]:
    """Coefficients ``q_l`` with ``form_matrix = sum_l q_l M_l``."""
    n = form_matrix.shape[0]
    columns = [[M[i][j] for i in range(n) for j in range(n)] for M in basis]
    monos = sorted({m for _, _, e in form_matrix.entries() for m in e.terms})
    out = [Form() for _ in basis]
    for mono in monos:
        target = []
        for i in range(n):
            for j in range(n):
                s = form_matrix.rows[i][j].terms.get(mono)
                if s is None:
                    target.append(ZERO_C)
                elif not s.is_constant():
                    raise SystemError_("non-constant structure coefficients")
                else:
                    target.append(s.constant_value())
        sol = solve_coeffs(columns, target)
        if sol is None:
            raise SystemError_("connection does not close under commutators; curvature cannot be auto-derived")
        for k, c in enumerate(sol):
            if not c.is_zero():
                out[k] = out[k] + Form({mono: Scalar.const(c)})
    return out


def build_system(name, dim, oneforms, pseudos, connection: Matrix, thetas=None, overrides=None,
                 traceless=False, explicit=False, algebra="custom") -> SystemSpec:
    oneforms, pseudos = list(oneforms), list(pseudos)
    thetas = list(thetas) if thetas else [f"theta{k}" for k in range(1, len(oneforms) + 1)]
    overrides = dict(overrides or {})
    if len(thetas) != len(oneforms):
        raise SystemError_(f"{len(thetas)} curvature generators for {len(oneforms)} one-forms")
    if connection.shape != (dim, dim):
        raise SystemError_(f"dimension mismatch: connection is {connection.shape}, dim is {dim}")
    names = oneforms + pseudos + thetas
    if len(set(names)) != len(names):
        raise SystemError_("duplicate generator names")
    omega = [oneform(w) for w in oneforms]
    theta = [curv(t) for t in thetas]
    for i, j, e in connection.entries():
        if not e.is_homogeneous(1):
            raise SystemError_(f"connection entry ({i + 1},{j + 1}) is not a one-form")
    if traceless and not mat_trace(connection).is_zero():
        raise SystemError_("connection is not traceless")
    basis = connection_basis(connection, omega)

    if all(w in overrides for w in oneforms):
        quad = [None] * len(omega)
    else:
        quad = _components(mat_wedge(connection, connection), basis)
    d_omega = {}
    q_forms = []
    for k, (w, g, th) in enumerate(zip(oneforms, omega, theta)):
        if w in overrides:
            rhs = overrides[w]
            if not rhs.is_homogeneous(2):
                raise SystemError_(f"structure equation for {w} is not a two-form")
            q = rhs - Form.gen(th)
            if any(gg.rank == CURV for gg in q.generators()):
                raise SystemError_(f"structure equation for {w} must be {th.name} plus a two-form in the one-forms")
        else:
            q = quad[k]
            rhs = Form.gen(th) + q
        if any(gg not in omega for gg in q.generators()):
            raise SystemError_(f"structure equation for {w} involves symbols outside the one-forms")
        d_omega[g] = rhs
        q_forms.append(q)
    table = StructureTable(dict(d_omega), {}).with_pseudos(pseudos)
    d_theta = {th: -ext_d(q, table) for th, q in zip(theta, q_forms)}
    table = table.extended(gens=d_theta)
    return SystemSpec(name, dim, oneforms, pseudos, thetas, connection, table, basis,
                      algebra=algebra, traceless=traceless, explicit=explicit, overrides=overrides)


# ---------------------------------------------------------------- Gell-Mann data

def _c(a=0, b=0, c=0, d=0):
    return Coeff(a, b, c, d)


def _gell_mann() -> list[list[list[Coeff]]]:
    Z, O = ZERO_C, ONE_C
    I = _c(0, 1)
    s3 = _c(0, 0, Fraction(1, 3))           # 1/sqrt3
    lam = [
        [[Z, O, Z], [O, Z, Z], [Z, Z, Z]],
        [[Z, -I, Z], [I, Z, Z], [Z, Z, Z]],
        [[O, Z, Z], [Z, -O, Z], [Z, Z, Z]],
        [[Z, Z, O], [Z, Z, Z], [O, Z, Z]],
        [[Z, Z, -I], [Z, Z, Z], [I, Z, Z]],
        [[Z, Z, Z], [Z, Z, O], [Z, O, Z]],
        [[Z, Z, Z], [Z, Z, -I], [Z, I, Z]],
        [[s3, Z, Z], [Z, s3, Z], [Z, Z, s3 * -2]],
    ]
    return lam


_F_INDEPENDENT = {
    (1, 2, 3): _c(1),
    (1, 4, 7): _c(Fraction(1, 2)),
    (2, 4, 6): _c(Fraction(1, 2)),
    (2, 5, 7): _c(Fraction(1, 2)),
    (3, 4, 5): _c(Fraction(1, 2)),
    (1, 5, 6): _c(Fraction(-1, 2)),
    (3, 6, 7): _c(Fraction(-1, 2)),
    (4, 5, 8): _c(0, 0, Fraction(1, 2)),
    (6, 7, 8): _c(0, 0, Fraction(1, 2)),
}


def _antisymmetric_closure(table):
    f = {}
    for (l, m, n), v in table.items():
        for (a, b, c), sgn in (((l, m, n), 1), ((m, n, l), 1), ((n, l, m), 1),
                               ((m, l, n), -1), ((l, n, m), -1), ((n, m, l), -1)):
            f[(a, b, c)] = v * sgn
    return f


@dataclass(frozen=True)
class GellMannData:
    lambdas: tuple
    f: dict

    @classmethod
    def standard(cls) -> "GellMannData":
        return cls(tuple(_gell_mann()), _antisymmetric_closure(_F_INDEPENDENT))

    def structure_constant(self, l: int, m: int, n: int) -> Coeff:
        return self.f.get((l, m, n), ZERO_C)


def _matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), ZERO_C) for j in range(n)] for i in range(n)]


def commutator_defects(g: GellMannData) -> list[tuple[int, int]]:
    """Pairs ``(l, m)`` where ``[lam_l, lam_m] = 2i f_lmn lam_n`` fails entrywise."""
    bad = []
    two_i = _c(0, 2)
    for l in range(1, 9):
        for m in range(l + 1, 9):
            A, B = g.lambdas[l - 1], g.lambdas[m - 1]
            AB, BA = _matmul(A, B), _matmul(B, A)
            lhs = [[AB[i][j] - BA[i][j] for j in range(3)] for i in range(3)]
            rhs = [[ZERO_C] * 3 for _ in range(3)]
            for n in range(1, 9):
                f = g.structure_constant(l, m, n)
                if f:
                    for i in range(3):
                        for j in range(3):
                            rhs[i][j] = rhs[i][j] + two_i * f * g.lambdas[n - 1][i][j]
            if lhs != rhs:
                bad.append((l, m))
    return bad


def is_totally_antisymmetric(f: dict) -> bool:
    for (l, m, n), v in f.items():
        for key, sgn in (((m, l, n), -1), ((l, n, m), -1), ((n, m, l), -1), ((m, n, l), 1)):
            if f.get(key, ZERO_C) != v * sgn:
                return False
    return all(len({l, m, n}) == 3 for (l, m, n) in f)


def su3_assemble(g: GellMannData, omegas) -> Matrix:
    """``sum_l w_l lam_l`` as a 3x3 matrix of forms."""
    omegas = [Form.coerce(w) for w in omegas]
    if len(omegas) != 8:
        raise ValueError("su3 needs eight one-forms")
    rows = [[Form() for _ in range(3)] for _ in range(3)]
    for w, lam in zip(omegas, g.lambdas):
        for i in range(3):
            for j in range(3):
                if not lam[i][j].is_zero():
                    rows[i][j] = rows[i][j] + w * lam[i][j]
    return Matrix(rows)


def su3_theta_expansion(g: GellMannData, l: int, table: StructureTable) -> Form:
    """``d w_l - i f_lmn w_m ^ w_n`` (sum over m, n) evaluated with ``table``."""
    w = [Form.gen(oneform(f"w{k}")) for k in range(1, 9)]
    acc = ext_d(w[l - 1], table)
    minus_i = _c(0, -1)
    for m in range(1, 9):
        for n in range(1, 9):
            f = g.structure_constant(l, m, n)
            if f:
                acc = acc + (w[m - 1] * w[n - 1]) * (minus_i * f)
    return acc


# ---------------------------------------------------------------- built-ins

def _w(k):
    return Form.gen(oneform(f"w{k}"))


@lru_cache(maxsize=None)
def load_system(name: str) -> SystemSpec:
    if name == "sl2r":
        conn = Matrix([[_w(1), _w(2)], [_w(3), -_w(1)]])
        sys = build_system("sl2r", 2, ["w1", "w2", "w3"], ["y1", "y2"], conn, algebra="sl2r")
    elif name == "o3":
        conn = Matrix([
            [Form(), -_w(1), _w(2)],
            [_w(1), Form(), -_w(3)],
            [-_w(2), _w(3), Form()],
        ])
        sys = build_system("o3", 3, ["w1", "w2", "w3"], ["y1", "y2", "y3"], conn, algebra="o3")
    elif name == "su3":
        conn = su3_assemble(GellMannData.standard(), [_w(k) for k in range(1, 9)])
        sys = build_system("su3", 3, [f"w{k}" for k in range(1, 9)], ["y1", "y2", "y3"], conn, algebra="su3")
    else:
        raise KeyError(f"unknown system {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")
    if not mat_trace(sys.connection).is_zero():
        raise SystemError_(f"built-in {name} connection is not traceless")
    return sys


BUILTIN_TEXT = {
    "sl2r": """\
system sl2r
dim 2
oneforms w1 w2 w3
pseudos y1 y2
connection [[w1, w2], [w3, -w1]]
curvature auto
""",
    "o3": """\
system o3
dim 3
oneforms w1 w2 w3
pseudos y1 y2 y3
connection [[0, -w1, w2], [w1, 0, -w3], [-w2, w3, 0]]
curvature auto
""",
    "su3": """\
system su3
dim 3
oneforms w1 w2 w3 w4 w5 w6 w7 w8
pseudos y1 y2 y3
# 1/sqrt3 is written 1/3*sqrt3
connection [[w3 + 1/3*sqrt3*w8, w1 - i*w2, w4 - i*w5], [w1 + i*w2, -w3 + 1/3*sqrt3*w8, w6 - i*w7], [w4 + i*w5, w6 + i*w7, -2/3*sqrt3*w8]]
curvature auto
""",
}
