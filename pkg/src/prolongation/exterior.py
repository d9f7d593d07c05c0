"""Graded exterior algebra over the scalar ring.

Generators carry a role rank that fixes the normal-form order: connection
one-forms first, then exact differentials (``dy``), then Pfaffian forms,
then curvature two-forms.  Within a rank, names sort naturally
(``w2 < w10``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .scalar import Coeff, RelationSet, Scalar, normalize, render_terms, scalar_pieces

ONEFORM, EXACT, PFAFF, CURV = 0, 1, 2, 3


def _natural_key(name: str) -> tuple:
    parts = re.split(r"(\d+)", name)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p)


class Gen(NamedTuple):
    rank: int
    key: tuple
    name: str
    degree: int

    def __repr__(self):
        return self.name


def make_gen(name: str, rank: int, degree: int | None = None) -> Gen:
    if degree is None:
        degree = 2 if rank == CURV else 1
    if degree < 1:
        raise ValueError("generator degree must be positive")
    return Gen(rank, _natural_key(name), name, degree)


def oneform(name: str) -> Gen:
    return make_gen(name, ONEFORM)


def exact(name: str) -> Gen:
    return make_gen(name, EXACT)


def pfaff(name: str) -> Gen:
    return make_gen(name, PFAFF)


def curv(name: str) -> Gen:
    return make_gen(name, CURV, 2)


def differential_name(var: str) -> str:
    return "d" + var


@lru_cache(maxsize=200_000)
def _wedge_mono(m1: tuple, m2: tuple):
    """Sorted concatenation with its permutation sign; None if it vanishes."""
    seq = list(m1) + list(m2)
    sign = 1
    # insertion sort; swapping two odd generators flips the sign
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            a, b = seq[j - 1], seq[j]
            if a.degree % 2 and b.degree % 2:
                sign = -sign
            seq[j - 1], seq[j] = b, a
            j -= 1
    for a, b in zip(seq, seq[1:]):
        if a == b and a.degree % 2:
            return None
    return sign, tuple(seq)


class Form:
    """Element of the exterior algebra: ``{monomial: Scalar}`` in normal form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Scalar] | None = None):
        self.terms = {m: s for m, s in (terms or {}).items() if not s.is_zero()}

    @classmethod
    def gen(cls, g: Gen) -> "Form":
        return cls({(g,): Scalar.const(1)})

    @classmethod
    def scalar(cls, s) -> "Form":
        s = Scalar.coerce(s)
        return cls({(): s}) if s else cls()

    @classmethod
    def coerce(cls, x) -> "Form":
        if isinstance(x, Form):
            return x
        if isinstance(x, Gen):
            return cls.gen(x)
        return cls.scalar(x)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degrees(self) -> set[int]:
        return {sum(g.degree for g in m) for m in self.terms}

    def degree(self) -> int:
        """Degree of a homogeneous form (0 for the zero form)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(ds)}")
        return ds.pop() if ds else 0

    def is_homogeneous(self, p: int | None = None) -> bool:
        ds = self.degrees()
        if not ds:
            return True
        return len(ds) == 1 and (p is None or ds == {p})

    def require_degree(self, p: int, what: str = "form") -> "Form":
        if not self.is_homogeneous(p):
            raise ValueError(f"{what} must be homogeneous of degree {p}, got {sorted(self.degrees())}")
        return self

    def generators(self) -> set[Gen]:
        return {g for m in self.terms for g in m}

    def as_scalar(self) -> Scalar:
        if any(m for m in self.terms):
            raise ValueError("form has positive degree")
        return self.terms.get((), Scalar())

    def coefficient(self, *gens: Gen) -> Scalar:
        """Scalar coefficient of the normal-ordered monomial of ``gens``."""
        r = _wedge_mono((), tuple(gens)) if gens else (1, ())
        if r is None:
            return Scalar()
        sign, m = r
        return self.terms.get(m, Scalar()) * sign

    def map_coefficients(self, f) -> "Form":
        return Form({m: f(s) for m, s in self.terms.items()})

    def normalize(self, rel: RelationSet | None) -> "Form":
        return self.map_coefficients(lambda s: normalize(s, rel)) if rel else self

    # arithmetic
    def __eq__(self, other):
        if not isinstance(other, Form):
            try:
                other = Form.coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __add__(self, other):
        other = Form.coerce(other)
        out = dict(self.terms)
        for m, s in other.terms.items():
            out[m] = out[m] + s if m in out else s
        return Form(out)

    __radd__ = __add__

    def __neg__(self):
        return Form({m: -s for m, s in self.terms.items()})

    def __sub__(self, other):
        return self + (-Form.coerce(other))

    def __rsub__(self, other):
        return Form.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Coeff, Scalar)):
            s = Scalar.coerce(other)
            return Form({m: c * s for m, c in self.terms.items()})
        return wedge(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Coeff, Scalar)):
            return self * other
        return wedge(Form.coerce(other), self)

    def __repr__(self):
        return render_form(self)


def wedge(u, v) -> Form:
    """Exterior product; bilinear and graded-anticommutative."""
    u, v = Form.coerce(u), Form.coerce(v)
    out: dict = {}
    for m1, s1 in u.terms.items():
        for m2, s2 in v.terms.items():
            r = _wedge_mono(m1, m2)
            if r is None:
                continue
            sign, m = r
            c = s1 * s2
            if sign < 0:
                c = -c
            out[m] = out[m] + c if m in out else c
    return Form(out)


def wedge_all(*forms) -> Form:
    out = Form.scalar(1)
    for f in forms:
        out = wedge(out, f)
    return out


def substitute(u: Form, scalars: Mapping[str, Scalar] | None = None,
               gens: Mapping[Gen, Form] | None = None) -> Form:
    """Replace indeterminates and/or generators (pullback-style)."""
    scalars = scalars or {}
    gens = gens or {}
    out = Form()
    for m, s in u.terms.items():
        term = Form.scalar(s.subs(scalars) if scalars else s)
        if not term:
            continue
        if gens and any(g in gens for g in m):
            for g in m:
                term = wedge(term, gens[g] if g in gens else Form.gen(g))
        else:
            term = wedge(term, Form({m: Scalar.const(1)}))
        out = out + term
    return out


class MissingEntry(KeyError):
    def __init__(self, symbol: str):
        super().__init__(symbol)
        self.symbol = symbol

    def __str__(self):
        return f"structure table has no entry for {self.symbol!r}"


@dataclass
class StructureTable:
    """Exterior derivatives of generators and differentials of indeterminates."""

    gens: dict = field(default_factory=dict)      # Gen -> Form (degree + 1)
    variables: dict = field(default_factory=dict)  # name -> Form (degree 1)

    def extended(self, gens: Mapping[Gen, Form] | None = None,
                 variables: Mapping[str, Form] | None = None) -> "StructureTable":
        return StructureTable({**self.gens, **(gens or {})}, {**self.variables, **(variables or {})})

    def with_pseudos(self, names: Iterable[str]) -> "StructureTable":
        """Register indeterminates with fresh exact differentials ``d<name>``."""
        gens, variables = {}, {}
        for n in names:
            g = exact(differential_name(n))
            gens[g] = Form()
            variables[n] = Form.gen(g)
        return self.extended(gens, variables)

    def with_constants(self, names: Iterable[str]) -> "StructureTable":
        return self.extended(variables={n: Form() for n in names})

    def d_gen(self, g: Gen) -> Form:
        try:
            return self.gens[g]
        except KeyError:
            raise MissingEntry(g.name) from None

    def d_scalar(self, s: Scalar) -> Form:
        out = Form()
        for v in sorted(s.base_variables()):
            try:
                dv = self.variables[v]
            except KeyError:
                raise MissingEntry(v) from None
            if dv:
                out = out + dv * s.partial(v)
        return out


def d(u, table: StructureTable) -> Form:
    """Exterior derivative driven by ``table``; graded Leibniz on monomials."""
    u = Form.coerce(u)
    out = Form()
    for m, s in u.terms.items():
        mono = Form({m: Scalar.const(1)})
        ds = table.d_scalar(s)
        if ds:
            out = out + wedge(ds, mono)
        sign = 1
        for idx, g in enumerate(m):
            dg = table.d_gen(g)
            if dg:
                left = Form({m[:idx]: s * sign})
                right = Form({m[idx + 1:]: Scalar.const(1)})
                out = out + wedge(wedge(left, dg), right)
            if g.degree % 2:
                sign = -sign
    return out


# ---------------------------------------------------------------- matrices

class Matrix:
    """Rectangular grid of forms."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = [[Form.coerce(e) for e in r] for r in rows]
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix rows must be nonempty and equal length")
        self.rows = rows

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "Matrix":
        return cls([[Form() for _ in range(m or n)] for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[Form.scalar(1 if i == j else 0) for j in range(n)] for i in range(n)])

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self):
        for i, r in enumerate(self.rows):
            for j, e in enumerate(r):
                yield i, j, e

    def map(self, f) -> "Matrix":
        return Matrix([[f(e) for e in r] for r in self.rows])

    def _check_same(self, other):
        if self.shape != other.shape:
            raise ValueError(f"dimension mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_same(other)
        return Matrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check_same(other)
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, s) -> "Matrix":
        return self.map(lambda e: e * s)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for (_, _, a), (_, _, b) in zip(self.entries(), other.entries()))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(e.is_zero() for _, _, e in self.entries())

    def __repr__(self):
        return "[" + ", ".join("[" + ", ".join(render_form(e) for e in r) + "]" for r in self.rows) + "]"


def mat_wedge(M: Matrix, N: Matrix) -> Matrix:
    (r, k), (k2, c) = M.shape, N.shape
    if k != k2:
        raise ValueError(f"dimension mismatch: {M.shape} ^ {N.shape}")
    rows = []
    for i in range(r):
        row = []
        for j in range(c):
            acc = Form()
            for l in range(k):
                acc = acc + wedge(M.rows[i][l], N.rows[l][j])
            row.append(acc)
        rows.append(row)
    return Matrix(rows)


def mat_d(M: Matrix, table: StructureTable) -> Matrix:
    return M.map(lambda e: d(e, table))


def mat_trace(M: Matrix) -> Form:
    n, m = M.shape
    if n != m:
        raise ValueError(f"trace of non-square matrix {M.shape}")
    acc = Form()
    for i in range(n):
        acc = acc + M.rows[i][i]
    return acc


def mat_normalize(M: Matrix, rel: RelationSet | None) -> Matrix:
    return M.map(lambda e: e.normalize(rel))


# ---------------------------------------------------------------- rendering

def _mono_sort_key(m):
    return (sum(g.degree for g in m), m)


def render_form(u: Form) -> str:
    """Deterministic linear rendering, reparseable by the DSL expression parser."""
    pieces = []
    for m in sorted(u.terms, key=_mono_sort_key):
        suffix = "^".join(g.name for g in m)
        pieces.extend(scalar_pieces(u.terms[m], suffix))
    return render_terms(pieces)
