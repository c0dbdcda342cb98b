"""Third-order complex jets and a closed grammar of analytic functions.

Every analytic function used by the library (h, g, q, extremal maps, Möbius
maps) is an :class:`AnalyticFn` expression tree.  Evaluating ``f.jet(z)``
propagates the value and the first three complex derivatives exactly through
the tree, so Schwarzians never rely on finite differences.

All operations accept Python scalars or numpy arrays of complex points.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import CriticalPoint, DegenerateInput, DomainError

__all__ = [
    "Jet3", "AnalyticFn", "Const", "Identity", "Z", "const", "exp", "log",
    "power", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh", "atanh",
    "integral", "mobius", "eval_jet", "classical_schwarzian",
    "chain_rule_residual", "DiskMobius", "disk_mobius_geodesic",
]


@dataclass(frozen=True)
class Jet3:
    """Value and first three derivatives of an analytic function at a point."""

    f0: complex
    f1: complex
    f2: complex
    f3: complex

    @classmethod
    def variable(cls, z):
        z = _as_complex(z)
        one = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0 + 0j
        zero = np.zeros_like(z) if isinstance(z, np.ndarray) else 0j
        return cls(z, one, zero, zero)

    def __iter__(self):
        return iter((self.f0, self.f1, self.f2, self.f3))

    def __add__(self, o):
        if not isinstance(o, Jet3):
            return Jet3(self.f0 + o, self.f1, self.f2, self.f3)
        return Jet3(self.f0 + o.f0, self.f1 + o.f1, self.f2 + o.f2, self.f3 + o.f3)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.f0, -self.f1, -self.f2, -self.f3)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, Jet3):
            return Jet3(self.f0 * o, self.f1 * o, self.f2 * o, self.f3 * o)
        a0, a1, a2, a3 = self
        b0, b1, b2, b3 = o
        return Jet3(
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2 * a1 * b1 + a0 * b2,
            a3 * b0 + 3 * a2 * b1 + 3 * a1 * b2 + a0 * b3,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        b = 1 / self.f0
        return self.chain(b, -b * b, 2 * b ** 3, -6 * b ** 4)

    def __truediv__(self, o):
        if not isinstance(o, Jet3):
            return self * (1 / o)
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def chain(self, d0, d1, d2, d3):
        """Jet of ``phi(u)`` given the derivatives ``d0..d3`` of phi at ``u.f0``."""
        _, u1, u2, u3 = self
        return Jet3(
            d0,
            d1 * u1,
            d2 * u1 * u1 + d1 * u2,
            d3 * u1 ** 3 + 3 * d2 * u1 * u2 + d1 * u3,
        )

    def take(self, index):
        return Jet3(*(np.asarray(c)[index] for c in self))


def _as_complex(z):
    if isinstance(z, np.ndarray):
        return z.astype(complex)
    if isinstance(z, (list, tuple)):
        return np.asarray(z, dtype=complex)
    return complex(z)


def _fail(node, bad, u0, message):
    if np.any(bad):
        pts = np.atleast_1d(u0)[np.atleast_1d(bad)]
        raise DomainError(node, message, points=pts[:5])


def _on_cut(u0):
    u0 = np.asarray(u0)
    return (u0 == 0) | ((u0.imag == 0) & (u0.real < 0))


class AnalyticFn:
    """Node of the analytic expression grammar.

    Subclasses implement ``_apply``, which maps the jet of the argument to
    the jet of the composite.  ``f(z)`` evaluates at a point (or array) and
    ``f(g)`` with another :class:`AnalyticFn` builds the composition.
    """

    precedence = 100

    def _apply(self, u: Jet3) -> Jet3:
        raise NotImplementedError

    def jet(self, z) -> Jet3:
        return self._apply(Jet3.variable(z))

    def __call__(self, z):
        if isinstance(z, AnalyticFn):
            return Compose(self, z)
        return self.jet(z).f0

    def derivative(self, z):
        return self.jet(z).f1

    # grammar sugar
    def __add__(self, o):
        return Add(self, _lift(o))

    def __radd__(self, o):
        return Add(_lift(o), self)

    def __sub__(self, o):
        return Sub(self, _lift(o))

    def __rsub__(self, o):
        return Sub(_lift(o), self)

    def __mul__(self, o):
        return Mul(self, _lift(o))

    def __rmul__(self, o):
        return Mul(_lift(o), self)

    def __truediv__(self, o):
        return Div(self, _lift(o))

    def __rtruediv__(self, o):
        return Div(_lift(o), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, o):
        if isinstance(o, AnalyticFn):
            if isinstance(o, Const):
                return Pow(self, o.value)
            return Exp(o * Log(self))
        return Pow(self, o)

    def __rpow__(self, o):
        return Exp(self * Log(_lift(o)))

    def _wrap(self, child):
        s = str(child)
        return f"({s})" if child.precedence < self.precedence else s


def _lift(o):
    return o if isinstance(o, AnalyticFn) else Const(o)


class Const(AnalyticFn):
    def __init__(self, value):
        self.value = complex(value)

    def _apply(self, u):
        zero = 0 * u.f0
        return Jet3(self.value + zero, zero, zero, zero)

    def __str__(self):
        v = self.value
        if v.imag == 0:
            return repr(v.real)
        if v.real == 0:
            return f"{v.imag!r}*i"
        return f"({v.real!r}+{v.imag!r}*i)"

    @property
    def precedence(self):
        return 100 if self.value.imag == 0 and self.value.real >= 0 else 0


class Identity(AnalyticFn):
    def _apply(self, u):
        return u

    def __str__(self):
        return "z"


Z = Identity()


class _Binary(AnalyticFn):
    symbol = "?"

    def __init__(self, a, b):
        self.a, self.b = a, b

    def __str__(self):
        return f"{self._wrap(self.a)} {self.symbol} {self._wrap_right(self.b)}"

    def _wrap_right(self, child):
        s = str(child)
        return f"({s})" if child.precedence <= self.precedence else s


class Add(_Binary):
    symbol, precedence = "+", 10

    def _apply(self, u):
        return self.a._apply(u) + self.b._apply(u)

    def _wrap_right(self, child):
        return self._wrap(child)


class Sub(_Binary):
    symbol, precedence = "-", 10

    def _apply(self, u):
        return self.a._apply(u) - self.b._apply(u)


class Mul(_Binary):
    symbol, precedence = "*", 20

    def _apply(self, u):
        return self.a._apply(u) * self.b._apply(u)

    def _wrap_right(self, child):
        return self._wrap(child)


class Div(_Binary):
    symbol, precedence = "/", 20

    def _apply(self, u):
        num = self.a._apply(u)
        den = self.b._apply(u)
        _fail(self, np.asarray(den.f0) == 0, u.f0, "division by zero")
        return num / den


class Neg(AnalyticFn):
    precedence = 15

    def __init__(self, a):
        self.a = a

    def _apply(self, u):
        return -self.a._apply(u)

    def __str__(self):
        return f"-{self._wrap(self.a)}"


class Compose(AnalyticFn):
    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner

    def _apply(self, u):
        return self.outer._apply(self.inner._apply(u))

    def __str__(self):
        # substitute textually: the outer expression with z -> (inner)
        return f"[{self.outer}]∘[{self.inner}]"


class _Univariate(AnalyticFn):
    name = "?"

    def __init__(self, arg):
        self.arg = _lift(arg)

    def derivs(self, u0):
        raise NotImplementedError

    def singular(self, u0):
        return np.zeros(np.shape(u0), dtype=bool)

    def _apply(self, u):
        v = self.arg._apply(u)
        _fail(self, self.singular(v.f0), v.f0, "singular argument")
        return v.chain(*self.derivs(v.f0))

    def __str__(self):
        return f"{self.name}({self.arg})"


class Exp(_Univariate):
    name = "exp"

    def derivs(self, u0):
        e = np.exp(u0)
        return e, e, e, e


class Log(_Univariate):
    name = "log"

    def singular(self, u0):
        return _on_cut(u0)

    def derivs(self, u0):
        r = 1 / u0
        return np.log(u0), r, -r * r, 2 * r ** 3


class Pow(AnalyticFn):
    """Principal power ``arg**alpha`` for a constant exponent."""

    precedence = 30

    def __init__(self, arg, alpha):
        self.arg = _lift(arg)
        alpha = complex(alpha)
        self.integer = alpha.imag == 0 and float(alpha.real).is_integer()
        self.alpha = int(alpha.real) if self.integer else alpha

    def _apply(self, u):
        v = self.arg._apply(u)
        u0 = v.f0
        a = self.alpha
        if self.integer:
            if a < 0:
                _fail(self, np.asarray(u0) == 0, u0, "pole")
            coeff = [1, a, a * (a - 1), a * (a - 1) * (a - 2)]
            d0, d1, d2, d3 = (
                c * u0 ** (a - k) if c != 0 else 0 * u0 for k, c in enumerate(coeff)
            )
            return v.chain(d0, d1, d2, d3)
        _fail(self, _on_cut(u0), u0, "branch cut")
        d0 = np.exp(a * np.log(u0))
        r = 1 / u0
        return v.chain(d0, a * d0 * r, a * (a - 1) * d0 * r * r,
                       a * (a - 1) * (a - 2) * d0 * r ** 3)

    def __str__(self):
        a = self.alpha
        exp_s = repr(a) if self.integer else (repr(a.real) if a.imag == 0 else f"({Const(a)})")
        if self.integer and a < 0:
            exp_s = f"({a})"
        base = str(self.arg)
        if self.arg.precedence <= self.precedence:
            base = f"({base})"
        return f"{base}^{exp_s}"


class Sin(_Univariate):
    name = "sin"

    def derivs(self, u0):
        s, c = np.sin(u0), np.cos(u0)
        return s, c, -s, -c


class Cos(_Univariate):
    name = "cos"

    def derivs(self, u0):
        s, c = np.sin(u0), np.cos(u0)
        return c, -s, -c, s


class Tan(_Univariate):
    name = "tan"

    def singular(self, u0):
        return np.abs(np.cos(u0)) < 1e-15

    def derivs(self, u0):
        t = np.tan(u0)
        s = 1 + t * t
        return t, s, 2 * t * s, s * (2 + 6 * t * t)


class Sinh(_Univariate):
    name = "sinh"

    def derivs(self, u0):
        s, c = np.sinh(u0), np.cosh(u0)
        return s, c, s, c


class Cosh(_Univariate):
    name = "cosh"

    def derivs(self, u0):
        s, c = np.sinh(u0), np.cosh(u0)
        return c, s, c, s


class Tanh(_Univariate):
    name = "tanh"

    def singular(self, u0):
        return np.abs(np.cosh(u0)) < 1e-15

    def derivs(self, u0):
        t = np.tanh(u0)
        s = 1 - t * t
        return t, s, -2 * t * s, s * (6 * t * t - 2)


class Integral(AnalyticFn):
    """Antiderivative ``z -> ∫_base^z integrand(ζ) dζ`` along a straight segment."""

    def __init__(self, integrand, base=0.0, tol=1e-12):
        self.integrand = _lift(integrand)
        self.base = complex(base)
        self.tol = tol

    def _apply(self, u):
        from .quadrature import segment_integral

        u0 = u.f0
        j = self.integrand.jet(u0)
        val = segment_integral(lambda w: self.integrand(w), self.base, u0, tol=self.tol)
        return u.chain(val, j.f0, j.f1, j.f2)

    def __str__(self):
        base = "" if self.base == 0 else f", {Const(self.base)}"
        return f"int({self.integrand}{base})"


# -- constructors ----------------------------------------------------------

def const(c):
    return Const(c)


def exp(f):
    return Exp(f)


def log(f):
    return Log(f)


def power(f, alpha):
    return Pow(f, alpha)


def sqrt(f):
    return Pow(f, 0.5)


def sin(f):
    return Sin(f)


def cos(f):
    return Cos(f)


def tan(f):
    return Tan(f)


def sinh(f):
    return Sinh(f)


def cosh(f):
    return Cosh(f)


def tanh(f):
    return Tanh(f)


def atanh(f):
    f = _lift(f)
    return 0.5 * Log((1 + f) / (1 - f))


def integral(f, base=0.0):
    return Integral(f, base)


def mobius(a, b, c, d, var=Z):
    """The fractional linear map ``(a z + b) / (c z + d)``."""
    if a * d - b * c == 0:
        raise DegenerateInput("ad - bc must be nonzero")
    return (a * var + b) / (c * var + d)


# -- operations ------------------------------------------------------------

def eval_jet(f: AnalyticFn, z) -> Jet3:
    return f.jet(z)


def classical_schwarzian(j: Jet3, tol=1e-14):
    """``f'''/f' - 3/2 (f''/f')^2`` from a jet."""
    f1 = np.asarray(j.f1)
    if np.any(np.abs(f1) <= tol):
        raise CriticalPoint("f' vanishes; Schwarzian undefined")
    r = j.f2 / j.f1
    return j.f3 / j.f1 - 1.5 * r * r


def chain_rule_residual(g: AnalyticFn, f: AnalyticFn, z):
    """``|S(g∘f) - (Sg∘f) f'^2 - Sf|`` evaluated two ways from exact jets."""
    jf = f.jet(z)
    jg = g.jet(jf.f0)
    lhs = classical_schwarzian(Compose(g, f).jet(z))
    rhs = classical_schwarzian(jg) * jf.f1 ** 2 + classical_schwarzian(jf)
    return np.abs(lhs - rhs)


@dataclass(frozen=True)
class DiskMobius:
    """Disk automorphism ``z -> e^{iθ} (iρ - z) / (1 + iρ z)``.

    With ``theta = 0`` the map is an involution preserving the imaginary axis.
    """

    rho: float
    theta: float = 0.0

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise DegenerateInput(f"rho must lie in (-1, 1), got {self.rho}")

    def _t(self, z):
        ir = 1j * self.rho
        return (ir - z) / (1 + ir * z)

    def __call__(self, z):
        return cmath.exp(1j * self.theta) * self._t(np.asarray(z) if isinstance(z, (list, tuple)) else z)

    def inverse(self, w):
        return self._t(cmath.exp(-1j * self.theta) * w)

    def derivative(self, z):
        ir = 1j * self.rho
        return cmath.exp(1j * self.theta) * (-(1 + ir * z) - (ir - z) * ir) / (1 + ir * z) ** 2

    def as_analytic(self) -> AnalyticFn:
        ir = 1j * self.rho
        return cmath.exp(1j * self.theta) * (ir - Z) / (1 + ir * Z)


def _circumcenter(a, b, c):
    ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    sa, sb, sc = abs(a) ** 2, abs(b) ** 2, abs(c) ** 2
    ux = (sa * (by - cy) + sb * (cy - ay) + sc * (ay - by)) / d
    uy = (sa * (cx - bx) + sb * (ax - cx) + sc * (bx - ax)) / d
    return complex(ux, uy)


def disk_mobius_geodesic(z1, z2):
    """Automorphism carrying real points ``x1, x2`` to ``z1, z2``.

    Returns ``(T, x1, x2)`` where ``T`` is a :class:`DiskMobius` whose
    rotation aligns the hyperbolic geodesic through ``z1, z2`` so that it
    crosses the imaginary axis orthogonally.
    """
    z1, z2 = complex(z1), complex(z2)
    if abs(z1 - z2) < 1e-14:
        raise DegenerateInput("points coincide")
    if abs(z1) >= 1 or abs(z2) >= 1:
        raise DegenerateInput("points must lie in the open unit disk")
    cross = (z1.conjugate() * z2).imag
    if abs(cross) <= 1e-14:
        # geodesic is a diameter; T with rho = 0 is z -> -z
        theta = cmath.phase(z2 - z1) + math.pi
        T = DiskMobius(0.0, math.remainder(theta, 2 * math.pi))
    else:
        far = z1 if abs(z1) >= abs(z2) else z2
        center = _circumcenter(z1, z2, 1 / far.conjugate())
        mod = abs(center)
        rho = mod - math.sqrt(mod * mod - 1)
        T = DiskMobius(rho, cmath.phase(center) - math.pi / 2)
    xs = [T.inverse(z) for z in (z1, z2)]
    for x in xs:
        if abs(x.imag) > 1e-9:
            raise DegenerateInput("failed to map the geodesic onto the real axis")
    return T, xs[0].real, xs[1].real
