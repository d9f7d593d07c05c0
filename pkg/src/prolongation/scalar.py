"""Exact coefficient ring for differential forms.

Scalars are Laurent polynomials in commuting indeterminates with
coefficients in Q(i, sqrt3).  Exponential generators ``exp(c*y)`` are
stored as the indeterminate ``exp(y)`` raised to a rational power, so
products merge exponents and ``exp(0*y)`` disappears automatically.

Formal derivatives of coefficient functions are indeterminates tagged
with the derivation letters, e.g. ``a1,x`` or ``a1,tx`` (letters sorted,
so mixed partials commute).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rat = Union[int, Fraction]

COORDINATES = ("x", "t")
DEFAULT_CONSTANTS = frozenset({"eta"})


class Coeff:
    """Element ``a + b*i + c*s + d*i*s`` of Q(i, s) with ``s = sqrt(3)``.

    Gaussian rationals are the ``c = d = 0`` slice and surd rationals the
    ``b = d = 0`` slice; one type covers both so that products of the two
    never leave the field.
    """

    __slots__ = ("a", "b", "c", "d", "_hash")

    def __init__(self, a: Rat = 0, b: Rat = 0, c: Rat = 0, d: Rat = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.c = Fraction(c)
        self.d = Fraction(d)
        self._hash = None

    @classmethod
    def coerce(cls, x) -> "Coeff":
        if isinstance(x, Coeff):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {x!r} to Coeff")

    def parts(self):
        return (self.a, self.b, self.c, self.d)

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Coeff(other)
        if not isinstance(other, Coeff):
            return NotImplemented
        return self.parts() == other.parts()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.parts())
        return self._hash

    def __add__(self, other):
        o = Coeff.coerce(other)
        return Coeff(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return Coeff(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        return self + (-Coeff.coerce(other))

    def __rsub__(self, other):
        return Coeff.coerce(other) - self

    def __mul__(self, other):
        o = Coeff.coerce(other)
        # real part p1 = a + c s, imaginary part q1 = b + d s
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = o.a, o.b, o.c, o.d
        # (p1 + i q1)(p2 + i q2); surd products use s*s = 3
        rr_1 = a * e + 3 * c * g
        rr_s = a * g + c * e
        ii_1 = b * f + 3 * d * h
        ii_s = b * h + d * f
        ri_1 = a * f + 3 * c * h
        ri_s = a * h + c * f
        ir_1 = b * e + 3 * d * g
        ir_s = b * g + d * e
        return Coeff(rr_1 - ii_1, ri_1 + ir_1, rr_s - ii_s, ri_s + ir_s)

    __rmul__ = __mul__

    def conjugate(self) -> "Coeff":
        """Complex conjugate (i -> -i)."""
        return Coeff(self.a, -self.b, self.c, -self.d)

    def surd_conjugate(self) -> "Coeff":
        """Galois conjugate s -> -s."""
        return Coeff(self.a, self.b, -self.c, -self.d)

    def inverse(self) -> "Coeff":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero coefficient")
        # z * conj(z) lies in Q(s); times its surd conjugate lies in Q
        w = self * self.conjugate()
        n = w * w.surd_conjugate()
        assert n.is_rational()
        return self.conjugate() * w.surd_conjugate() * Coeff(1 / n.a)

    def __truediv__(self, other):
        return self * Coeff.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Coeff.coerce(other) * self.inverse()

    def to_complex(self) -> complex:
        s = 3 ** 0.5
        return complex(float(self.a) + float(self.c) * s, float(self.b) + float(self.d) * s)

    def components(self):
        """Nonzero ``(rational, unit)`` pairs, unit in '', 'i', 'sqrt3', 'i*sqrt3'."""
        units = ("", "i", "sqrt3", "i*sqrt3")
        return [(v, u) for v, u in zip(self.parts(), units) if v]

    def __repr__(self):
        comps = self.components()
        if not comps:
            return "0"
        out = []
        for v, u in comps:
            out.append(f"{v}*{u}" if u else str(v))
        return " + ".join(out)


ZERO_C = Coeff(0)
ONE_C = Coeff(1)
I_C = Coeff(0, 1)
SQRT3_C = Coeff(0, 0, 1)


# ---------------------------------------------------------------- naming

def exp_name(var: str) -> str:
    return f"exp({var})"


def is_exp(name: str) -> bool:
    return name.startswith("exp(") and name.endswith(")")


def base_var(name: str) -> str:
    """Variable an indeterminate depends on: ``exp(y5)`` -> ``y5``."""
    return name[4:-1] if is_exp(name) else name


def tagged(name: str, derivation: str) -> str:
    """Name of the formal derivative of ``name`` along ``derivation``."""
    base, _, tags = name.partition(",")
    return f"{base},{''.join(sorted(tags + derivation))}"


def derivative_order(name: str) -> int:
    return len(name.partition(",")[2])


# ---------------------------------------------------------------- Scalar

Monomial = tuple  # sorted tuple of (name, exponent) pairs


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for v, e in m2:
        e2 = powers.get(v, 0) + e
        if e2:
            powers[v] = e2
        else:
            del powers[v]
    return tuple(sorted(powers.items()))


def _norm_exp(e):
    if isinstance(e, Fraction) and e.denominator == 1:
        return int(e)
    return e


def mono_degree(m: Monomial) -> int:
    return sum(e for v, e in m if not is_exp(v))


class Scalar:
    """Immutable canonical element of the coefficient ring.

    ``terms`` maps monomials to nonzero :class:`Coeff`; canonical form is
    the dict itself, so equality is dict equality.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Coeff] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "Scalar":
        c = Coeff.coerce(c)
        return cls({(): c}) if c else cls()

    @classmethod
    def var(cls, name: str, power: Rat = 1) -> "Scalar":
        if power == 0:
            return cls.const(1)
        return cls({((name, _norm_exp(power)),): ONE_C})

    @classmethod
    def exp(cls, var: str, c: Rat = 1) -> "Scalar":
        """``exp(c*var)`` with rational ``c``."""
        c = Fraction(c)
        if not c:
            return cls.const(1)
        return cls({((exp_name(var), _norm_exp(c)),): ONE_C})

    @classmethod
    def monomial(cls, powers: Mapping[str, Rat], c=1) -> "Scalar":
        m = tuple(sorted((v, _norm_exp(e)) for v, e in powers.items() if e))
        return cls({m: Coeff.coerce(c)})

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction, Coeff)):
            return cls.const(x)
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    # predicates
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self) -> Coeff:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), ZERO_C)

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def base_variables(self) -> set[str]:
        return {base_var(v) for v in self.variables()}

    def is_polynomial(self) -> bool:
        """No negative powers of ordinary indeterminates."""
        return all(e > 0 for m in self.terms for v, e in m if not is_exp(v))

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        return max((sum(e for v, e in m if v in names) for m in self.terms), default=0)

    # arithmetic
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Coeff)):
            other = Scalar.const(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                s = out[m] + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
            else:
                out[m] = c
        return Scalar(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction, Coeff)):
                c = Coeff.coerce(other)
                if c.is_zero():
                    return Scalar()
                return Scalar({m: v * c for m, v in self.terms.items()})
            return NotImplemented
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                if m in out:
                    out[m] = out[m] + c
                else:
                    out[m] = c
        return Scalar(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer powers only")
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("negative power of a non-monomial")
            (m, c), = self.terms.items()
            inv = tuple((v, _norm_exp(e * n)) for v, e in m)
            return Scalar({inv: _cpow(c.inverse(), -n)})
        out = Scalar.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        other = Scalar.coerce(other)
        if len(other.terms) != 1:
            raise ValueError("division only by monomials; fractions are not supported")
        return self * other ** -1

    # substitution and differentiation
    def subs(self, mapping: Mapping[str, "Scalar"]) -> "Scalar":
        """Replace indeterminates by scalars.

        Keys may be ordinary names (integer powers) or ``exp(y)`` names.
        Negative powers require a monomial image.
        """
        if not mapping or not (self.variables() & mapping.keys()):
            return self
        out = Scalar()
        cache: dict = {}
        for m, c in self.terms.items():
            term = Scalar({(): c})
            rest = []
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        img = Scalar.coerce(mapping[v])
                        if not isinstance(e, int):
                            raise ValueError(f"cannot substitute into rational power of {v}")
                        cache[key] = img ** e
                    term = term * cache[key]
                else:
                    rest.append((v, e))
            out = out + term * Scalar({tuple(rest): ONE_C})
        return out

    def partial(self, var: str) -> "Scalar":
        """Partial derivative w.r.t. a base variable (exp generators included)."""
        out: dict = {}
        for m, c in self.terms.items():
            for idx, (v, e) in enumerate(m):
                if v == var:
                    newm = m[:idx] + ((v, e - 1),) + m[idx + 1:] if e != 1 else m[:idx] + m[idx + 1:]
                    k = Coeff.coerce(Fraction(e)) * c
                elif is_exp(v) and base_var(v) == var:
                    newm = m
                    k = Coeff.coerce(Fraction(e)) * c
                else:
                    continue
                out[newm] = out.get(newm, ZERO_C) + k
        return Scalar(out)

    def coefficient(self, powers: Mapping[str, Rat]) -> "Scalar":
        """Sum of terms whose exponents of the given names match exactly."""
        names = set(powers)
        out = {}
        for m, c in self.terms.items():
            got = {v: e for v, e in m if v in names}
            if all(got.get(v, 0) == e for v, e in powers.items()):
                rest = tuple((v, e) for v, e in m if v not in names)
                out[rest] = out.get(rest, ZERO_C) + c
        return Scalar(out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: _mono_key(mc[0]))

    def __repr__(self):
        return render_scalar(self)


def _cpow(c: Coeff, n: int) -> Coeff:
    out = ONE_C
    for _ in range(n):
        out = out * c
    return out


def _mono_key(m: Monomial):
    # graded by total degree, then lexicographic on (name, power)
    return (mono_degree(m), tuple((v, float(e)) for v, e in m))


# ---------------------------------------------------------------- relations

@dataclass(frozen=True)
class RelationSet:
    """Polynomial rewrite rules ``monomial -> Scalar`` applied to fixpoint."""

    rules: tuple = field(default_factory=tuple)
    max_steps: int = 10_000

    @classmethod
    def of(cls, *pairs) -> "RelationSet":
        rules = []
        for lhs, rhs in pairs:
            lhs = Scalar.coerce(lhs)
            if len(lhs.terms) != 1:
                raise ValueError("rule left side must be a monomial")
            (m, c), = lhs.terms.items()
            if c != 1:
                raise ValueError("rule left side must have unit coefficient")
            if any(e <= 0 or is_exp(v) for v, e in m):
                raise ValueError("rule left side must be a positive-power polynomial monomial")
            rules.append((m, Scalar.coerce(rhs)))
        return cls(tuple(rules))

    def __bool__(self):
        return bool(self.rules)


def _divides(lhs: Monomial, m: Monomial):
    powers = dict(m)
    rest = dict(powers)
    for v, e in lhs:
        have = powers.get(v, 0)
        if not isinstance(have, int) or have < e:
            return None
        if have == e:
            del rest[v]
        else:
            rest[v] = have - e
    return tuple(sorted(rest.items()))


def normalize(s: Scalar, rel: RelationSet | None = None) -> Scalar:
    """Canonical form of ``s`` modulo ``rel`` (rules applied to fixpoint)."""
    s = Scalar.coerce(s)
    if not rel:
        return s
    steps = 0
    while True:
        changed = False
        out = Scalar()
        for m, c in s.terms.items():
            for lhs, rhs in rel.rules:
                rest = _divides(lhs, m)
                if rest is not None:
                    out = out + rhs * Scalar({rest: c})
                    changed = True
                    break
            else:
                out = out + Scalar({m: c})
        s = out
        if not changed:
            return s
        steps += 1
        if steps > rel.max_steps:
            raise RuntimeError("relation rewriting did not terminate")


def unimodular_rule(a: str, b: str, c: str, d: str) -> RelationSet:
    """``a*d -> 1 + b*c`` encoding det [[a, b], [c, d]] = 1."""
    return RelationSet.of((Scalar.var(a) * Scalar.var(d), 1 + Scalar.var(b) * Scalar.var(c)))


# ---------------------------------------------------------------- derivations

def derive_scalar(s: Scalar, v: str, constants: Iterable[str] = DEFAULT_CONSTANTS) -> Scalar:
    """Total formal derivative along coordinate ``v`` (``x`` or ``t``).

    Coordinates differentiate to 1 or 0, names in ``constants`` to 0, and
    every other indeterminate ``u`` to its tagged derivative ``u,v``.
    """
    if v not in COORDINATES:
        raise ValueError(f"unknown derivation {v!r}; expected one of {COORDINATES}")
    constants = frozenset(constants)
    s = Scalar.coerce(s)
    out = Scalar()
    for u in sorted(s.base_variables()):
        if u in constants:
            continue
        if u in COORDINATES:
            du = Scalar.const(1 if u == v else 0)
        else:
            du = Scalar.var(tagged(u, v))
        if du:
            out = out + s.partial(u) * du
    return out


# ---------------------------------------------------------------- rendering

def _render_power(v: str, e) -> str:
    if is_exp(v):
        base = base_var(v)
        return f"exp({base})" if e == 1 else f"exp({e}*{base})"
    return v if e == 1 else f"{v}**{e}"


def render_monomial(m: Monomial) -> str:
    return "*".join(_render_power(v, e) for v, e in m)


def render_terms(pieces):
    """Join ``(signed rational, body)`` pairs into ``a*x + b*y`` text."""
    if not pieces:
        return "0"
    out = []
    for k, (q, body) in enumerate(pieces):
        neg = q < 0
        q = abs(q)
        if body:
            txt = body if q == 1 else f"{q}*{body}"
        else:
            txt = str(q)
        if k == 0:
            out.append(f"-{txt}" if neg else txt)
        else:
            out.append(f" - {txt}" if neg else f" + {txt}")
    return "".join(out)


def scalar_pieces(s: Scalar, suffix: str = ""):
    pieces = []
    for m, c in s.sorted_terms():
        mono = render_monomial(m)
        for q, unit in c.components():
            body = "*".join(p for p in (unit, mono, suffix) if p)
            pieces.append((q, body))
    return pieces


def render_scalar(s: Scalar) -> str:
    return render_terms(scalar_pieces(s))
