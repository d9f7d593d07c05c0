"""Realizations over (x, t), the Riccati x-part, conserved-density recursion
and its numerical residual-scaling check.

The density recursion is implemented literally: the ``eta**-1`` coefficient
of the expanded Riccati equation is set equal to one and higher
coefficients to zero.  :func:`expansion_coefficients` is the independent
oracle that produces the same equations by brute-force series expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import warnings

import numpy as np

from .exterior import Form, exact, substitute
from .scalar import Scalar, derive_scalar, tagged

DX = exact("dx")
DT = exact("dt")


# ---------------------------------------------------------------- realization

@dataclass
class Realization1D:
    """``w_i -> a_i dx + b_i dt`` together with ``dy -> y,x dx + y,t dt``."""

    coefficients: dict  # one-form name -> (dx coefficient, dt coefficient)

    @classmethod
    def standard(cls) -> "Realization1D":
        v = Scalar.var
        return cls({
            "w1": (v("a1"), v("b1")),
            "w2": (v("a2"), v("b2")),
            "w3": (v("eta"), v("b3")),
        })

    def image(self, name: str) -> Form:
        a, b = self.coefficients[name]
        return Form.gen(DX) * Scalar.coerce(a) + Form.gen(DT) * Scalar.coerce(b)

    def realize(self, u: Form) -> Form:
        gens = {}
        for g in u.generators():
            if g in (DX, DT):
                continue
            if g.name in self.coefficients:
                gens[g] = self.image(g.name)
            elif g.name.startswith("d") and g.degree == 1 and g.name[1:] not in self.coefficients:
                y = g.name[1:]
                gens[g] = Form.gen(DX) * Scalar.var(tagged(y, "x")) + Form.gen(DT) * Scalar.var(tagged(y, "t"))
            else:
                raise KeyError(f"realization has no image for {g.name}")
        return substitute(u, gens=gens)

    def pfaffian_coefficients(self, alpha: Form, y: str) -> tuple[Scalar, Scalar]:
        """``(F, G)`` with ``alpha = dy + F dx + G dt`` once realized."""
        real = self.realize(alpha)
        F = real.coefficient(DX) - Scalar.var(tagged(y, "x"))
        G = real.coefficient(DT) - Scalar.var(tagged(y, "t"))
        return F, G


def riccati_x_part(r: Realization1D, chart_form: Form) -> Scalar:
    """dx coefficient of a realized chart form."""
    needed = {g.name for g in chart_form.generators() if g.rank == 0}
    missing = sorted(needed - r.coefficients.keys())
    if missing:
        raise KeyError(f"realization missing {', '.join(missing)}")
    return r.realize(chart_form).coefficient(DX)


def conservation_pair(sigma: Form) -> tuple[Scalar, Scalar]:
    """``(I, J)`` for a realized one-form ``sigma = I dx + J dt``."""
    sigma = Form.coerce(sigma)
    stray = sigma.generators() - {DX, DT}
    if stray or not sigma.is_homogeneous(1):
        names = ", ".join(sorted(g.name for g in stray)) or "non-one-form terms"
        raise ValueError(f"not a one-form in dx, dt: {names}")
    return sigma.coefficient(DX), sigma.coefficient(DT)


def conservation_defect(I: Scalar, J: Scalar, constants=("eta",)) -> Scalar:
    """``I,t - J,x``; vanishes exactly when ``d(I dx + J dt) = 0``."""
    return derive_scalar(I, "t", constants) - derive_scalar(J, "x", constants)


def realized_differential(g: Scalar, constants=("eta",)) -> Form:
    """``dg = g,x dx + g,t dt`` for a scalar in the coordinates."""
    return Form.gen(DX) * derive_scalar(g, "x", constants) + Form.gen(DT) * derive_scalar(g, "t", constants)


# ---------------------------------------------------------------- density recursion

def _Y(n: int) -> Scalar:
    return Scalar.var(f"Y{n}")


def _Yx(n: int) -> Scalar:
    return Scalar.var(tagged(f"Y{n}", "x"))


def convolution(Y, n: int):
    """``sum_{k=1}^{n-1} Y[n-k] Y[k]`` with 1-based indexing into ``Y``."""
    acc = 0
    for k in range(1, n):
        acc = acc + Y[n - k] * Y[k]
    return acc


@dataclass
class DensitySeries:
    order: int
    equations: list
    Y: list = field(default_factory=list)
    I: list = field(default_factory=list)

    def residuals(self) -> list:
        """Each equation with the closed-form ``Y`` (and ``Y,x = 0``) substituted."""
        if not self.Y:
            raise ValueError("no closed forms attached")
        m = {}
        for n, y in enumerate(self.Y, start=1):
            m[f"Y{n}"] = y
            m[tagged(f"Y{n}", "x")] = Scalar()
        return [e.subs(m) for e in self.equations]


def density_equations(N: int) -> DensitySeries:
    if N < 1:
        raise ValueError("order N must be at least 1")
    a1, a2 = Scalar.var("a1"), Scalar.var("a2")
    Y = [None] + [_Y(n) for n in range(1, N + 1)]
    eqs = []
    for n in range(1, N + 1):
        e = _Yx(n) + a1 * Y[n] * 2
        e = e - 1 if n == 1 else e + a2 * convolution(Y, n)
        eqs.append(e)
    return DensitySeries(N, eqs, I=[a2 * Y[n] for n in range(1, N + 1)])


def density_solve_constant(N: int, a1=None, a2=None) -> DensitySeries:
    """Stationary solution of the recursion for constant coefficients.

    ``a1``, ``a2`` may be numbers or monomial-invertible scalars; the
    default keeps them symbolic.
    """
    a1 = Scalar.var("a1") if a1 is None else Scalar.coerce(a1)
    a2 = Scalar.var("a2") if a2 is None else Scalar.coerce(a2)
    if a1.is_zero():
        raise ZeroDivisionError("stationary mode needs a1 != 0")
    if len(a1.terms) != 1:
        raise ValueError("a1 must be a single monomial to invert")
    series = density_equations(N)
    half_inv = a1 ** -1 * Fraction(1, 2)
    Y = [None, half_inv]
    for n in range(2, N + 1):
        Y.append(-(a2 * half_inv) * convolution(Y, n))
    params = {"a1": a1, "a2": a2}
    series.equations = [e.subs(params) for e in series.equations]
    series.Y = Y[1:]
    series.I = [a2 * y for y in Y[1:]]
    return series


def expansion_coefficients(N: int, forcing: str = "recursion") -> dict:
    """Coefficients of ``eta**k`` after substituting ``y3 = sum_{n=1}^N eta**-n Y_n``.

    ``forcing="recursion"`` uses ``-eta**-1`` (the source term the density
    recursion actually solves); ``forcing="literal"`` keeps the ``-eta`` of
    the realized Riccati x-part.
    """
    eta = "eta"
    a1, a2 = Scalar.var("a1"), Scalar.var("a2")
    y = sum((_Y(n) * Scalar.var(eta, -n) for n in range(1, N + 1)), Scalar())
    yx = sum((_Yx(n) * Scalar.var(eta, -n) for n in range(1, N + 1)), Scalar())
    src = Scalar.var(eta, -1) if forcing == "recursion" else Scalar.var(eta)
    expr = yx + a1 * y * 2 + a2 * y * y - src
    powers = sorted({dict(m).get(eta, 0) for m in expr.terms}, reverse=True)
    return {k: expr.coefficient({eta: k}) if k else _eta_free(expr) for k in powers}


def _eta_free(s: Scalar) -> Scalar:
    return Scalar({m: c for m, c in s.terms.items() if all(v != "eta" for v, _ in m)})


# ---------------------------------------------------------------- numerics

@dataclass(frozen=True)
class GridFn:
    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step must be positive")
        if len(self.values) < 2:
            raise ValueError("grid needs at least two samples")

    @classmethod
    def constant(cls, v: float, x0: float = 0.0, x1: float = 20.0, h: float = 0.01) -> "GridFn":
        n = int(round((x1 - x0) / h)) + 1
        return cls(x0, h, np.full(n, float(v)))

    @classmethod
    def sample(cls, f, x0: float, x1: float, h: float) -> "GridFn":
        n = int(round((x1 - x0) / h)) + 1
        xs = x0 + h * np.arange(n)
        return cls(x0, h, np.asarray(f(xs), dtype=float) * np.ones(n))

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values))

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.values[:-1] + self.values[1:])

    def __len__(self):
        return len(self.values)


def density_rhs(Y: np.ndarray, a1, a2) -> np.ndarray:
    """``Y_n,x`` from the recursion; ``Y`` has shape ``(N, ...)``."""
    N = Y.shape[0]
    out = np.empty_like(Y)
    for n in range(1, N + 1):
        conv = sum(Y[n - k - 1] * Y[k - 1] for k in range(1, n))
        out[n - 1] = (1.0 if n == 1 else 0.0) - 2 * a1 * Y[n - 1] - a2 * conv
    return out


def integrate_densities(a1: GridFn, a2: GridFn, N: int, y0=None) -> np.ndarray:
    """Classical RK4 on the coefficient grid; returns an ``(N, len(grid))`` array."""
    if len(a1) != len(a2) or a1.x0 != a2.x0 or a1.h != a2.h:
        raise ValueError("a1 and a2 must share a grid")
    m = len(a1)
    h = a1.h
    Y = np.zeros((N, m))
    if y0 is not None:
        Y[:, 0] = y0
    A1, A2 = a1.values, a2.values
    M1, M2 = a1.midpoints(), a2.midpoints()
    for j in range(m - 1):
        y = Y[:, j]
        k1 = density_rhs(y, A1[j], A2[j])
        k2 = density_rhs(y + 0.5 * h * k1, M1[j], M2[j])
        k3 = density_rhs(y + 0.5 * h * k2, M1[j], M2[j])
        k4 = density_rhs(y + h * k3, A1[j + 1], A2[j + 1])
        Y[:, j + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Y


def transient_window(a1: GridFn) -> float:
    lo = float(np.min(a1.values))
    if lo <= 0:
        raise ValueError("transient window needs a1 > 0")
    return 10.0 / (2.0 * lo)


@dataclass
class ScalingResult:
    order: int
    etas: list
    residuals: list
    slope: float | None
    expected: int

    @property
    def exact_zero(self) -> bool:
        return all(r == 0 for r in self.residuals)

    def within(self, tol: float = 0.15) -> bool:
        if self.exact_zero:
            return True
        return self.slope is not None and abs(self.slope - self.expected) <= tol


def residual_scaling_check(a1: GridFn, a2: GridFn, N: int, etas, skip_transient: bool = True) -> ScalingResult:
    """Slope of ``log max|S_x + 2 a1 S + a2 S^2 - 1/eta|`` against ``log eta``."""
    if N < 1:
        raise ValueError("order N must be at least 1")
    if len(a1) < 16:
        raise ValueError("grid too coarse: need at least 16 points")
    etas = [float(e) for e in etas]
    if len(etas) < 3:
        raise ValueError("need at least three eta values")
    if any(e <= 0 for e in etas) or any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValueError("etas must be positive and strictly increasing")
    if etas[-1] / etas[0] < 10:
        warnings.warn("etas span less than one decade; the slope fit is less reliable", stacklevel=2)
    Y = integrate_densities(a1, a2, N)
    dY = density_rhs(Y, a1.values, a2.values)
    mask = np.ones(len(a1), dtype=bool)
    if skip_transient and np.min(a1.values) > 0:
        mask = a1.xs - a1.x0 > transient_window(a1)
        if not mask.any():
            raise ValueError("grid ends inside the transient window")
    res = []
    for eta in etas:
        w = eta ** -np.arange(1, N + 1, dtype=float)
        S = w @ Y
        Sx = w @ dY
        r = Sx + 2 * a1.values * S + a2.values * S * S - 1 / eta
        res.append(float(np.max(np.abs(r[mask]))))
    slope = None
    if all(r > 0 for r in res):
        slope = float(np.polyfit(np.log(etas), np.log(res), 1)[0])
    return ScalingResult(N, etas, res, slope, -(N + 1))


def closed_form_error(a1: float, a2: float, N: int, x1: float = 20.0, h: float = 0.01) -> float:
    """Max relative error of integrated ``Y_n`` against stationary values past the transient window."""
    g1, g2 = GridFn.constant(a1, 0.0, x1, h), GridFn.constant(a2, 0.0, x1, h)
    Y = integrate_densities(g1, g2, N)
    exact = density_solve_constant(N, Fraction(a1), Fraction(a2)).Y
    mask = g1.xs - g1.x0 > transient_window(g1)
    worst = 0.0
    for n, y in enumerate(exact):
        v = float(y.constant_value().to_complex().real)
        if v == 0:
            continue
        worst = max(worst, float(np.max(np.abs(Y[n][mask] - v) / abs(v))))
    return worst

