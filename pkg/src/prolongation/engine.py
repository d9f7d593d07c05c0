"""Prolongation machinery: Pfaffian forms, closure decompositions, Riccati
charts, sub-connections, extensions and gauge transformations.

Every decomposition returned here carries enough data to re-verify itself
(:meth:`IdealDecomposition.certify`), so callers never have to trust the
collection step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .catalog import SystemSpec
from .exterior import (
    EXACT, Form, Gen, Matrix, StructureTable, d, differential_name, exact, mat_d, mat_trace, mat_wedge,
    pfaff, substitute, wedge,
)
from .scalar import RelationSet, Scalar, normalize


class ExactDivisionError(ArithmeticError):
    """A chart combination was not divisible by the pivot square."""


class GaugeError(ValueError):
    pass


# ---------------------------------------------------------------- curvature

def curvature(connection: Matrix, table: StructureTable) -> Matrix:
    """``d Omega - Omega ^ Omega``."""
    for i, j, e in connection.entries():
        if not e.is_homogeneous(1):
            raise ValueError(f"connection entry ({i + 1},{j + 1}) is not a one-form")
    return mat_d(connection, table) - mat_wedge(connection, connection)


def bianchi_defect(sys: SystemSpec) -> Matrix:
    """``d Theta - Omega ^ Theta + Theta ^ Omega``; zero for a consistent table."""
    theta = curvature(sys.connection, sys.table)
    return mat_d(theta, sys.table) - mat_wedge(sys.connection, theta) + mat_wedge(theta, sys.connection)


def d_squared_defects(table: StructureTable) -> list[str]:
    """Names of generators and indeterminates whose second derivative is nonzero."""
    bad = [g.name for g in sorted(table.gens) if not d(d(Form.gen(g), table), table).is_zero()]
    for v in sorted(table.variables):
        if not d(table.variables[v], table).is_zero():
            bad.append(v)
    return bad


# ---------------------------------------------------------------- decompositions

def _solve_for_exact(alpha: Gen, definition: Form) -> tuple[Gen, Form]:
    """From ``alpha = dy + rest`` return ``(dy, alpha - rest)``."""
    for mono, s in definition.terms.items():
        if len(mono) == 1 and mono[0].rank == EXACT and s == 1:
            g = mono[0]
            rest = definition - Form.gen(g)
            if g not in rest.generators():
                return g, Form.gen(alpha) - rest
    raise ValueError(f"{alpha.name} is not of the form d<y> + (terms free of d<y>)")


def eliminate_differentials(beta: Form, basis) -> Form:
    """Replace each ``dy`` by ``alpha - rest`` using the basis definitions."""
    rules = dict(_solve_for_exact(a, f) for a, f in basis)
    out = beta
    for _ in range(len(rules) + 1):
        if not (out.generators() & rules.keys()):
            return out
        out = substitute(out, gens=rules)
    raise RuntimeError("differential elimination did not terminate")


@dataclass
class IdealDecomposition:
    """``beta = sum_j A_j ^ alpha_j + sum_l Gamma_l theta_l + remainder``."""

    subject: Form
    substituted: Form
    alphas: list
    definitions: list
    thetas: list
    A: list
    gamma: list
    remainder: Form

    @property
    def in_ideal(self) -> bool:
        return self.remainder.is_zero()

    def reassemble(self) -> Form:
        out = self.remainder
        for a, g in zip(self.A, self.alphas):
            out = out + wedge(a, Form.gen(g))
        for c, th in zip(self.gamma, self.thetas):
            out = out + Form.gen(th) * c
        return out

    def certify(self) -> bool:
        """Reassembly equals the subject, both with and without dy elimination."""
        back = dict(zip(self.alphas, self.definitions))
        again = self.reassemble()
        return (again - self.substituted).is_zero() and (substitute(again, gens=back) - self.subject).is_zero()

    def alpha_part(self) -> Form:
        out = Form()
        for a, g in zip(self.A, self.alphas):
            out = out + wedge(a, Form.gen(g))
        return out

    def theta_part(self) -> Form:
        out = Form()
        for c, th in zip(self.gamma, self.thetas):
            out = out + Form.gen(th) * c
        return out


def closure_decompose(beta: Form, basis, thetas) -> IdealDecomposition:
    """Split a two-form over the ideal generated by ``basis`` and ``thetas``.

    ``basis`` is a list of ``(alpha generator, definition)`` pairs.  Curvature
    terms are collected first, then ``one-form ^ alpha`` terms; a term
    ``alpha_j ^ alpha_k`` goes to the later column with coefficient
    ``alpha_j``.  Whatever is left is the remainder.
    """
    beta = Form.coerce(beta)
    if not beta.is_homogeneous(2):
        raise ValueError("closure_decompose expects a two-form")
    basis = list(basis)
    thetas = list(thetas)
    alphas = [a for a, _ in basis]
    sub = eliminate_differentials(beta, basis)
    a_index = {g: k for k, g in enumerate(alphas)}
    t_index = {g: k for k, g in enumerate(thetas)}
    A = [Form() for _ in alphas]
    gamma = [Scalar() for _ in thetas]
    rest = {}
    for mono, s in sub.terms.items():
        if len(mono) == 1 and mono[0] in t_index:
            gamma[t_index[mono[0]]] = gamma[t_index[mono[0]]] + s
        elif len(mono) == 2 and mono[1] in a_index:
            A[a_index[mono[1]]] = A[a_index[mono[1]]] + Form.gen(mono[0]) * s
        elif len(mono) == 2 and mono[0] in a_index:
            A[a_index[mono[0]]] = A[a_index[mono[0]]] - Form.gen(mono[1]) * s
        else:
            rest[mono] = s
    dec = IdealDecomposition(beta, sub, alphas, [f for _, f in basis], thetas, A, gamma, Form(rest))
    if not dec.certify():
        raise AssertionError("decomposition failed to reassemble")
    return dec


# ---------------------------------------------------------------- Pfaffians

@dataclass
class PfaffianSet:
    system: SystemSpec
    gens: list
    forms: list
    table: StructureTable

    @property
    def basis(self):
        return list(zip(self.gens, self.forms))

    def decompose(self, beta: Form) -> IdealDecomposition:
        return closure_decompose(beta, self.basis, self.system.theta)


def pfaffians(sys: SystemSpec) -> PfaffianSet:
    """``alpha_i = dy_i - Omega_ij y_j``."""
    n = sys.dim
    ys = [Scalar.var(y) for y in sys.pseudos]
    gens, forms = [], []
    for i in range(n):
        f = Form.gen(sys.dy[i])
        for j in range(n):
            f = f - sys.connection.rows[i][j] * ys[j]
        gens.append(pfaff(f"alpha{i + 1}"))
        forms.append(f)
    basis = list(zip(gens, forms))
    d_alpha = {g: eliminate_differentials(d(f, sys.table), basis) for g, f in basis}
    return PfaffianSet(sys, gens, forms, sys.table.extended(gens=d_alpha))


# ---------------------------------------------------------------- Riccati charts

@dataclass
class RiccatiChart:
    system: SystemSpec
    pivot: int
    ratios: dict          # chart variable -> (numerator pseudo, pivot pseudo)
    gens: list
    forms: list
    combinations: list    # y_p alpha_k - y_k alpha_p before division
    table: StructureTable
    decompositions: list
    subconnection: Matrix
    trace: Form

    @property
    def basis(self):
        return list(zip(self.gens, self.forms))

    @property
    def variables(self) -> list[str]:
        return list(self.ratios)

    def decompose(self, beta: Form, extra_basis=()) -> IdealDecomposition:
        return closure_decompose(beta, self.basis + list(extra_basis), self.system.theta)


def chart_names(n: int, pivot: int) -> list[int]:
    """Indices of the pseudopotentials and forms introduced at ``pivot``."""
    first = n + 1 + (pivot - 1) * (n - 1)
    return list(range(first, first + n - 1))


def riccati_chart(pf: PfaffianSet, pivot: int) -> RiccatiChart:
    """Projective chart at ``pivot``: ``y_p^2 alpha_new = y_p alpha_k - y_k alpha_p``."""
    sys = pf.system
    n = sys.dim
    if not 1 <= pivot <= n:
        raise ValueError(f"pivot {pivot} out of range 1..{n}")
    p = pivot - 1
    others = [k for k in range(n) if k != p]
    idx = chart_names(n, pivot)
    yname = sys.pseudos
    ratio_names = [f"y{m}" for m in idx]
    clash = set(ratio_names) & set(yname)
    if clash:
        raise ValueError(f"chart variables {sorted(clash)} clash with system pseudopotentials")
    yp = Scalar.var(yname[p])
    dyp = Form.gen(sys.dy[p])
    scal_map, gen_map = {}, {}
    for k, r in zip(others, ratio_names):
        rv = Scalar.var(r)
        scal_map[yname[k]] = rv * yp
        gen_map[sys.dy[k]] = dyp * rv + Form.gen(exact(differential_name(r))) * yp
    inv_sq = Scalar.var(yname[p], -2)
    gens, forms, combos = [], [], []
    for k, r, m in zip(others, ratio_names, idx):
        combo = pf.forms[k] * yp - pf.forms[p] * Scalar.var(yname[k])
        chart = substitute(combo, scal_map, gen_map) * inv_sq
        leftover = {yname[p], differential_name(yname[p])}
        if any(not s.is_polynomial() or yname[p] in s.variables() for s in chart.terms.values()) \
                or dyp.terms.keys() & {(g,) for g in chart.generators()} or leftover & {g.name for g in chart.generators()}:
            raise ExactDivisionError(f"chart form for {r} is not divisible by {yname[p]}^2")
        gens.append(pfaff(f"alpha{m}"))
        forms.append(chart)
        combos.append(combo)
    table = sys.table.with_pseudos(ratio_names)
    basis = list(zip(gens, forms))
    decs = [closure_decompose(d(f, table), basis, sys.theta) for f in forms]
    sub = Matrix([[dec.A[j] for j in range(len(gens))] for dec in decs])
    return RiccatiChart(sys, pivot, {r: (yname[k], yname[p]) for k, r in zip(others, ratio_names)},
                        gens, forms, combos, table, decs, sub, mat_trace(sub))


def chart_identity_defect(pf: PfaffianSet, chart: RiccatiChart) -> list[Form]:
    """``y_p^2 alpha_new - (y_p alpha_k - y_k alpha_p)`` with ratios written back as quotients.

    Evaluated by substituting ``y_k = r y_p`` into the combination; zero
    entries certify the chart forms.
    """
    sys = chart.system
    p = chart.pivot - 1
    yp = Scalar.var(sys.pseudos[p])
    scal_map, gen_map = {}, {}
    for r, (num, _) in chart.ratios.items():
        k = sys.pseudos.index(num)
        scal_map[num] = Scalar.var(r) * yp
        gen_map[sys.dy[k]] = Form.gen(sys.dy[p]) * Scalar.var(r) + Form.gen(exact(differential_name(r))) * yp
    out = []
    for combo, form in zip(chart.combinations, chart.forms):
        out.append(substitute(combo, scal_map, gen_map) - form * (yp * yp))
    return out


def subchart_curvature(c: RiccatiChart) -> Matrix:
    """``d Omega_c - Omega_c ^ Omega_c`` with chart differentials eliminated."""
    theta = curvature(c.subconnection, c.table)
    return theta.map(lambda e: eliminate_differentials(e, c.basis))


def subchart_decompositions(c: RiccatiChart) -> list[list[IdealDecomposition]]:
    theta = curvature(c.subconnection, c.table)
    return [[c.decompose(e) for e in row] for row in theta.rows]


def trace_closure(c: RiccatiChart) -> IdealDecomposition:
    """Decomposition of ``d(tr Omega_c) / 3``."""
    return c.decompose(d(c.trace, c.table) * Fraction(1, 3))


# ---------------------------------------------------------------- SL(2,R) extensions

@dataclass
class SL2Extension:
    charts: tuple
    sigmas: list
    gens: list
    forms: list
    table: StructureTable
    decompositions: dict = field(default_factory=dict)

    @property
    def basis(self):
        return self.charts[0].basis + self.charts[1].basis + list(zip(self.gens, self.forms))


def extend_sl2(pf: PfaffianSet) -> SL2Extension:
    """Extension forms built on both Riccati charts of a 2x2 system.

    ``sigma_p = -A_p / 2`` where ``A_p`` is the 1x1 sub-connection of chart
    ``p``; the new forms are ``d y - sigma_p`` and
    ``d y' - exp(-2 y) Omega_pq``.
    """
    sys = pf.system
    if sys.dim != 2:
        raise ValueError("extend_sl2 needs a 2x2 system")
    c1, c2 = riccati_chart(pf, 1), riccati_chart(pf, 2)
    sigmas = [c1.subconnection.rows[0][0] * Fraction(-1, 2), c2.subconnection.rows[0][0] * Fraction(-1, 2)]
    base = 2 * sys.dim + 1
    names = [f"y{base + k}" for k in range(4)]
    table = c1.table.extended(c2.table.gens, c2.table.variables).with_pseudos(names)
    dy = [Form.gen(exact(differential_name(y))) for y in names]
    forms = [
        dy[0] - sigmas[0],
        dy[1] - sigmas[1],
        dy[2] - sys.connection.rows[0][1] * Scalar.exp(names[0], -2),
        dy[3] - sys.connection.rows[1][0] * Scalar.exp(names[1], -2),
    ]
    gens = [pfaff(f"alpha{base + k}") for k in range(4)]
    ext = SL2Extension((c1, c2), sigmas, gens, forms, table)
    basis = ext.basis
    for k, s in enumerate(sigmas):
        ext.decompositions[f"sigma{k + 1}"] = closure_decompose(d(s, table), basis, sys.theta)
    for g, f in zip(gens, forms):
        ext.decompositions[g.name] = closure_decompose(d(f, table), basis, sys.theta)
    return ext


# ---------------------------------------------------------------- sub-system Pfaffians

@dataclass
class SubsystemPfaffians:
    label: str
    variables: list
    gens: list
    forms: list
    table: StructureTable
    decompositions: list
    shape_defects: list     # d(beta_j) - (Omega_jk ^ beta_k - Theta_jk z_k), eliminated


def subsystem_pfaffians(connection: Matrix, table: StructureTable, label: str, thetas,
                        outer_basis=()) -> SubsystemPfaffians:
    """``beta_j = dz_j - Omega_jk z_k`` for a (sub-)connection ``Omega``."""
    n = connection.shape[0]
    names = [f"z{label}{j + 1}" for j in range(n)]
    zs = [Scalar.var(z) for z in names]
    tbl = table.with_pseudos(names)
    gens = [pfaff(f"beta{label}{j + 1}") for j in range(n)]
    forms = []
    for j in range(n):
        f = Form.gen(exact(differential_name(names[j])))
        for k in range(n):
            f = f - connection.rows[j][k] * zs[k]
        forms.append(f)
    basis = list(outer_basis) + list(zip(gens, forms))
    decs = [closure_decompose(d(f, tbl), basis, thetas) for f in forms]
    theta = curvature(connection, tbl)
    defects = []
    for j in range(n):
        shape = Form()
        for k in range(n):
            shape = shape + wedge(connection.rows[j][k], Form.gen(gens[k])) - theta.rows[j][k] * zs[k]
        defects.append(eliminate_differentials(d(forms[j], tbl) - shape, basis))
    return SubsystemPfaffians(label, names, gens, forms, tbl, decs, defects)


def chart_subsystem(c: RiccatiChart) -> SubsystemPfaffians:
    return subsystem_pfaffians(c.subconnection, c.table, str(c.pivot), c.system.theta, c.basis)


# ---------------------------------------------------------------- gauge

@dataclass
class GaugeMatrix:
    """Square matrix of scalars with the relations that make it unimodular."""

    entries: list
    variables: list
    relations: RelationSet = field(default_factory=RelationSet)
    constants: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def symbolic(cls) -> "GaugeMatrix":
        """Generic unimodular 2x2 matrix ``[[a, b], [c, (1 + b c)/a]]`` (Laurent in ``a``)."""
        a, b, c = Scalar.var("A11"), Scalar.var("A12"), Scalar.var("A21")
        return cls([[a, b], [c, (1 + b * c) * Scalar.var("A11", -1)]], ["A11", "A12", "A21"])

    @classmethod
    def with_relation(cls) -> "GaugeMatrix":
        """Four independent entries with the rewrite ``A11 A22 -> 1 + A12 A21``."""
        from .scalar import unimodular_rule
        names = ["A11", "A12", "A21", "A22"]
        v = [Scalar.var(x) for x in names]
        return cls([[v[0], v[1]], [v[2], v[3]]], names, unimodular_rule(*names))

    @classmethod
    def diagonal(cls, name: str = "lam") -> "GaugeMatrix":
        """Constant ``diag(lam, 1/lam)``; ``lam`` is registered with ``d lam = 0``."""
        lam = Scalar.var(name)
        return cls([[lam, Scalar()], [Scalar(), Scalar.var(name, -1)]], [], constants=[name])

    @classmethod
    def constant(cls, rows) -> "GaugeMatrix":
        return cls([[Scalar.coerce(x) for x in r] for r in rows], [])

    def det(self) -> Scalar:
        return normalize(_det([[e for e in r] for r in self.entries]), self.relations)

    def adjugate(self) -> list:
        n = self.n
        if n == 1:
            return [[Scalar.const(1)]]
        adj = [[Scalar() for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [[self.entries[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
                adj[j][i] = _det(minor) * (-1 if (i + j) % 2 else 1)
        return adj

    def matrix(self) -> Matrix:
        return Matrix([[Form.scalar(e) for e in r] for r in self.entries])

    def inverse_matrix(self) -> Matrix:
        if self.det() != 1:
            raise GaugeError("unimodularity relation absent: det(A) does not normalize to 1")
        return Matrix([[Form.scalar(normalize(e, self.relations)) for e in r] for r in self.adjugate()])


def _det(M) -> Scalar:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    out = Scalar()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor)
        out = out + (term if j % 2 == 0 else -term)
    return out


@dataclass
class GaugeResult:
    connection: Matrix        # dA A^-1 + A Omega A^-1
    curvature: Matrix         # of the transformed connection
    conjugated: Matrix        # A Theta A^-1
    defect: Matrix            # curvature - conjugated, normalized

    @property
    def certified(self) -> bool:
        return self.defect.is_zero()


def gauge_transform(connection: Matrix, A: GaugeMatrix, table: StructureTable,
                    certify: bool = True) -> GaugeResult:
    n = connection.shape[0]
    if A.n != n:
        raise ValueError(f"gauge matrix is {A.n}x{A.n}, connection is {n}x{n}")
    tbl = table.with_pseudos(A.variables).with_constants(A.constants)
    Am = A.matrix()
    Ainv = A.inverse_matrix()
    rel = A.relations
    dA = mat_d(Am, tbl)
    new = (mat_wedge(dA, Ainv) + mat_wedge(mat_wedge(Am, connection), Ainv)).map(lambda e: e.normalize(rel))
    if not certify:
        return GaugeResult(new, Matrix.zeros(n), Matrix.zeros(n), Matrix.zeros(n))
    theta_new = curvature(new, tbl).map(lambda e: e.normalize(rel))
    conj = mat_wedge(mat_wedge(Am, curvature(connection, tbl)), Ainv).map(lambda e: e.normalize(rel))
    defect = (theta_new - conj).map(lambda e: e.normalize(rel))
    return GaugeResult(new, theta_new, conj, defect)
