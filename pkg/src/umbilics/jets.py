"""Truncated bivariate Taylor arithmetic and derivative jets of scalar fields.

A :class:`Taylor` object carries the Taylor coefficients of a scalar quantity
in two seed variables up to a fixed total degree (2 or 3).  Arithmetic and the
elementary functions below propagate the coefficients exactly (up to rounding),
so composing a surface expression on two seeded variables yields every partial
derivative up to that degree at once.

Coefficients may be numpy arrays (a batch of points evaluated together) or
``mpmath.mpf`` scalars.  The latter give an unbounded exponent range, which is
needed when identifier fields are of size ``exp(-4000)`` along far-out circles.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import mpmath
import numpy as np

from .errors import DomainError, NonFiniteError

__all__ = [
    "Point2",
    "PolarPoint",
    "Taylor",
    "Jet",
    "eval_jet",
    "eval_polar_jet",
    "jet_cartesian_to_polar",
    "hat_jet",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "tanh",
    "sech2",
    "atan",
    "atan2",
    "extended_precision",
    "is_extended",
]

TWO_PI = 2.0 * math.pi
EXTENDED_DPS = 30


class Point2(NamedTuple):
    x: Any
    y: Any


class PolarPoint(NamedTuple):
    r: Any
    theta: Any

    @classmethod
    def of(cls, r, theta) -> "PolarPoint":
        if is_extended(theta):
            return cls(r, theta % (2 * mpmath.pi))
        return cls(r, np.mod(theta, TWO_PI))

    def cartesian(self) -> Point2:
        o = _ops(self.r)
        return Point2(self.r * o.cos(self.theta), self.r * o.sin(self.theta))


# --------------------------------------------------------------------------
# numeric backends


class _NumpyOps:
    exp = staticmethod(np.exp)
    log = staticmethod(np.log)
    sqrt = staticmethod(np.sqrt)
    sin = staticmethod(np.sin)
    cos = staticmethod(np.cos)
    tanh = staticmethod(np.tanh)
    atan = staticmethod(np.arctan)
    atan2 = staticmethod(np.arctan2)
    abs = staticmethod(np.abs)
    power = staticmethod(np.power)
    where = staticmethod(np.where)
    pi = math.pi


class _MpOps:
    exp = staticmethod(mpmath.exp)
    log = staticmethod(mpmath.log)
    sqrt = staticmethod(mpmath.sqrt)
    sin = staticmethod(mpmath.sin)
    cos = staticmethod(mpmath.cos)
    tanh = staticmethod(mpmath.tanh)
    atan = staticmethod(mpmath.atan)
    atan2 = staticmethod(mpmath.atan2)
    abs = staticmethod(abs)
    pi = mpmath.pi

    @staticmethod
    def power(x, p):
        return x ** p

    @staticmethod
    def where(cond, a, b):
        return a if cond else b


def is_extended(v) -> bool:
    """True when ``v`` is an mpmath scalar (extended exponent range)."""
    return isinstance(v, mpmath.mpf)


def _ops(v):
    if isinstance(v, Taylor):
        v = v.c[0]
    return _MpOps if is_extended(v) else _NumpyOps


@contextmanager
def extended_precision(dps: int = EXTENDED_DPS):
    """Temporarily set mpmath's working precision."""
    with mpmath.workdps(dps):
        yield


# --------------------------------------------------------------------------
# monomial bookkeeping


def _monomials(order: int) -> list[tuple[int, int]]:
    return [(deg - j, j) for deg in range(order + 1) for j in range(deg + 1)]


_MONO = {k: _monomials(k) for k in range(4)}
_INDEX = {k: {m: i for i, m in enumerate(_MONO[k])} for k in range(4)}


def _mul_table(order: int) -> list[tuple[int, int, int]]:
    mono, index = _MONO[order], _INDEX[order]
    table = []
    for i, (a1, b1) in enumerate(mono):
        for j, (a2, b2) in enumerate(mono):
            if a1 + b1 + a2 + b2 <= order:
                table.append((i, j, index[(a1 + a2, b1 + b2)]))
    return table


_MUL = {k: _mul_table(k) for k in range(4)}


class Taylor:
    """Truncated Taylor polynomial in two seed variables.

    ``c[k]`` is the coefficient of ``dx**i * dy**j`` for ``(i, j) = _MONO[order][k]``,
    i.e. the partial derivative divided by ``i! j!``.
    """

    __slots__ = ("c", "order")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, c: Sequence, order: int):
        self.c = list(c)
        self.order = order

    @classmethod
    def variable(cls, value, which: int, order: int) -> "Taylor":
        c = [0.0] * len(_MONO[order])
        c[0] = value
        if order >= 1:
            c[1 + which] = mpmath.mpf(1) if is_extended(value) else 1.0
        return cls(c, order)

    @classmethod
    def constant(cls, value, order: int) -> "Taylor":
        c = [0.0] * len(_MONO[order])
        c[0] = value
        return cls(c, order)

    @property
    def value(self):
        return self.c[0]

    def coefficient(self, i: int, j: int):
        return self.c[_INDEX[self.order][(i, j)]]

    def derivative(self, i: int, j: int):
        return self.coefficient(i, j) * (math.factorial(i) * math.factorial(j))

    def diff(self, which: int) -> "Taylor":
        """Partial derivative as a Taylor polynomial of one lower order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 Taylor polynomial")
        lower = self.order - 1
        out = []
        for (i, j) in _MONO[lower]:
            if which == 0:
                out.append((i + 1) * self.coefficient(i + 1, j))
            else:
                out.append((j + 1) * self.coefficient(i, j + 1))
        return Taylor(out, lower)

    def truncate(self, order: int) -> "Taylor":
        return Taylor(self.c[: len(_MONO[order])], order)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Taylor":
        if isinstance(other, Taylor):
            if other.order != self.order:
                k = min(self.order, other.order)
                raise ValueError(f"order mismatch ({self.order} vs {other.order}); truncate to {k} first")
            return other
        return Taylor.constant(other, self.order)

    def __add__(self, other):
        if not isinstance(other, Taylor):
            c = list(self.c)
            c[0] = c[0] + other
            return Taylor(c, self.order)
        other = self._coerce(other)
        return Taylor([a + b for a, b in zip(self.c, other.c)], self.order)

    __radd__ = __add__

    def __neg__(self):
        return Taylor([-a for a in self.c], self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor([a * other for a in self.c], self.order)
        other = self._coerce(other)
        out = [0.0] * len(self.c)
        a, b = self.c, other.c
        for i, j, k in _MUL[self.order]:
            out[k] = out[k] + a[i] * b[j]
        return Taylor(out, self.order)

    __rmul__ = __mul__

    def reciprocal(self) -> "Taylor":
        x = self.c[0]
        inv = 1 / x
        return self._compose([inv, -inv * inv, 2 * inv ** 3, -6 * inv ** 4])

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor([a / other for a in self.c], self.order)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Taylor):
            return exp(log(self) * p)
        if float(p) == int(p) and abs(int(p)) <= 8:
            n = int(p)
            if n == 0:
                return Taylor.constant(self.c[0] * 0 + 1, self.order)
            base = self if n > 0 else self.reciprocal()
            acc = base
            for _ in range(abs(n) - 1):
                acc = acc * base
            return acc
        x = self.c[0]
        o = _ops(x)
        xp = o.power(x, p)
        d = [xp]
        coef = 1.0
        for k in range(1, self.order + 1):
            # x**p / x**k rather than x**(p - k): p - k rounds when p is a float
            coef *= p - (k - 1)
            d.append(coef * xp / x ** k)
        return self._compose(d)

    def __rpow__(self, base):
        return exp(self * _ops(self).log(base))

    def _compose(self, d: Sequence) -> "Taylor":
        """Compose a univariate function with derivatives ``d`` at ``c[0]``."""
        n = self.order
        h = Taylor([0.0] + self.c[1:], n)
        acc = Taylor.constant(d[n] / math.factorial(n), n)
        for k in range(n - 1, -1, -1):
            acc = acc * h + d[k] / math.factorial(k)
        return acc

    def __repr__(self):
        return f"Taylor(order={self.order}, c={self.c!r})"


# --------------------------------------------------------------------------
# elementary functions (dispatch on Taylor / ndarray / float / mpf)


def _unary(name, derivs):
    def fn(x):
        if isinstance(x, Taylor):
            return x._compose(derivs(x.c[0], x.order))
        return derivs(x, 0)[0]

    fn.__name__ = name
    return fn


def _exp_d(x, n):
    e = _ops(x).exp(x)
    return [e] * (n + 1)


def _log_d(x, n):
    o = _ops(x)
    inv = 1 / x
    return [o.log(x), inv, -inv * inv, 2 * inv ** 3][: n + 1]


def _sqrt_d(x, n):
    s = _ops(x).sqrt(x)
    return [s, 0.5 / s, -0.25 / s ** 3, 0.375 / s ** 5][: n + 1]


def _sin_d(x, n):
    o = _ops(x)
    s, c = o.sin(x), o.cos(x)
    return [s, c, -s, -c][: n + 1]


def _cos_d(x, n):
    o = _ops(x)
    s, c = o.sin(x), o.cos(x)
    return [c, -s, -c, s][: n + 1]


def _sech2_value(x):
    # sech^2 x = 4t/(1+t)^2 with t = exp(-2|x|); no overflow for large |x|
    o = _ops(x)
    t = o.exp(-2 * o.abs(x))
    return 4 * t / (1 + t) ** 2


def _tanh_d(x, n):
    t = _ops(x).tanh(x)
    s = _sech2_value(x)
    return [t, s, -2 * t * s, s * (4 * t * t - 2 * s)][: n + 1]


def _sech2_d(x, n):
    t = _ops(x).tanh(x)
    s = _sech2_value(x)
    return [s, -2 * t * s, s * (4 * t * t - 2 * s), 8 * t * s * (2 * s - t * t)][: n + 1]


def _atan_d(x, n):
    q = 1 / (1 + x * x)
    return [_ops(x).atan(x), q, -2 * x * q * q, (6 * x * x - 2) * q ** 3][: n + 1]


exp = _unary("exp", _exp_d)
log = _unary("log", _log_d)
sqrt = _unary("sqrt", _sqrt_d)
sin = _unary("sin", _sin_d)
cos = _unary("cos", _cos_d)
tanh = _unary("tanh", _tanh_d)
sech2 = _unary("sech2", _sech2_d)
atan = _unary("atan", _atan_d)


def atan2(y, x):
    """Two-argument arctangent, differentiable away from the origin."""
    if not isinstance(y, Taylor) and not isinstance(x, Taylor):
        return _ops(y).atan2(y, x)
    order = y.order if isinstance(y, Taylor) else x.order
    yt = y if isinstance(y, Taylor) else Taylor.constant(y, order)
    xt = x if isinstance(x, Taylor) else Taylor.constant(x, order)
    y0, x0 = yt.c[0], xt.c[0]
    theta0 = _ops(y0).atan2(y0, x0)
    # rotate by -theta0: the remaining angle has zero constant term
    num = yt * x0 - xt * y0
    den = xt * x0 + yt * y0
    return atan(num / den) + theta0


# --------------------------------------------------------------------------
# jets


@dataclass(frozen=True)
class Jet:
    """Value and partial derivatives of a scalar field at a point.

    ``first`` holds (f_x, f_y) or (f_r, f_theta); ``second`` holds the three
    second derivatives (xx, xy, yy) / (rr, r-theta, theta-theta); ``third`` holds
    (xxx, xxy, xyy, yyy) or the polar analogues, and is ``None`` for order 2.
    """

    order: int
    coords: str
    point: tuple
    value: Any
    first: tuple
    second: tuple
    third: tuple | None = None

    @classmethod
    def from_taylor(cls, t: Taylor, coords: str, point: tuple) -> "Jet":
        d = [t.derivative(i, j) for (i, j) in _MONO[t.order]]
        third = tuple(d[6:10]) if t.order >= 3 else None
        return cls(t.order, coords, tuple(point), d[0], tuple(d[1:3]), tuple(d[3:6]), third)

    def to_taylor(self, order: int | None = None) -> Taylor:
        order = self.order if order is None else order
        d = [self.value, *self.first, *self.second]
        if order >= 3:
            if self.third is None:
                raise ValueError("jet has no third-order entries")
            d += list(self.third)
        c = [v / (math.factorial(i) * math.factorial(j)) for v, (i, j) in zip(d, _MONO[order])]
        return Taylor(c, order)

    def entries(self) -> list:
        out = [self.value, *self.first, *self.second]
        if self.third is not None:
            out += list(self.third)
        return out

    def max_abs(self):
        vals = [np.abs(np.asarray(e, dtype=float)) if not is_extended(e) else abs(e) for e in self.entries()]
        if any(is_extended(v) for v in vals):
            return max(vals)
        return np.max(np.stack(np.broadcast_arrays(*vals)), axis=0)

    # Cartesian names
    fx = property(lambda s: s.first[0])
    fy = property(lambda s: s.first[1])
    fxx = property(lambda s: s.second[0])
    fxy = property(lambda s: s.second[1])
    fyy = property(lambda s: s.second[2])
    # polar names
    fr = property(lambda s: s.first[0])
    ft = property(lambda s: s.first[1])
    frr = property(lambda s: s.second[0])
    frt = property(lambda s: s.second[1])
    ftt = property(lambda s: s.second[2])


def _as_num(v):
    if is_extended(v) or isinstance(v, Taylor):
        return v
    return np.asarray(v, dtype=float)


def _any_nonpositive(r) -> bool:
    if is_extended(r):
        return r <= 0
    return bool(np.any(np.asarray(r) <= 0))


def _check_finite(jet: Jet) -> Jet:
    for e in jet.entries():
        if is_extended(e):
            if not mpmath.isfinite(e):
                raise NonFiniteError("non-finite jet entry")
        elif not np.all(np.isfinite(e)):
            raise NonFiniteError("non-finite jet entry")
    return jet


def eval_jet(field, p, order: int = 2) -> Jet:
    """Cartesian jet of ``field`` at ``p = (x, y)`` (scalars or arrays)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    x, y = (_as_num(v) for v in p)
    field.check_domain(x, y)
    X = Taylor.variable(x, 0, order)
    Y = Taylor.variable(y, 1, order)
    t = field.evaluate_cartesian(X, Y)
    if not isinstance(t, Taylor):
        t = Taylor.constant(t, order)
    return _check_finite(Jet.from_taylor(t, "cartesian", (x, y)))


def eval_polar_jet(field, p, order: int = 2) -> Jet:
    """Polar jet obtained by seeding ``r`` and ``theta`` directly."""
    r, theta = (_as_num(v) for v in p)
    if _any_nonpositive(r):
        raise DomainError("polar jets require r > 0")
    x = r * _ops(r).cos(theta)
    y = r * _ops(r).sin(theta)
    field.check_domain(x, y)
    R = Taylor.variable(r, 0, order)
    T = Taylor.variable(theta, 1, order)
    t = field.evaluate_polar(R, T)
    if not isinstance(t, Taylor):
        t = Taylor.constant(t, order)
    return _check_finite(Jet.from_taylor(t, "polar", (r, theta)))


def jet_cartesian_to_polar(j: Jet, p, order: int | None = None) -> Jet:
    """Convert a Cartesian jet to a polar jet at ``p = (r, theta)``.

    The chain rule is applied by substituting ``dx = (r+dr)cos(theta+dtheta) - x``
    and ``dy`` likewise into the Cartesian Taylor polynomial; for the first two
    orders this reproduces f_r = c f_x + s f_y, f_theta = r(-s f_x + c f_y),
    f_rr = c^2 f_xx + 2cs f_xy + s^2 f_yy and so on.
    """
    if j.coords != "cartesian":
        raise ValueError("expected a Cartesian jet")
    r, theta = (_as_num(v) for v in p)
    if _any_nonpositive(r):
        raise DomainError("polar jets require r > 0")
    order = j.order if order is None else order
    if order > j.order:
        raise ValueError("requested polar order exceeds the jet order")
    o = _ops(r)
    x0, y0 = r * o.cos(theta), r * o.sin(theta)
    R = Taylor.variable(r, 0, order)
    T = Taylor.variable(theta, 1, order)
    dx = R * cos(T) - x0
    dy = R * sin(T) - y0
    cart = j.to_taylor(order)
    powers_x = [Taylor.constant(1.0, order)]
    powers_y = [Taylor.constant(1.0, order)]
    for _ in range(order):
        powers_x.append(powers_x[-1] * dx)
        powers_y.append(powers_y[-1] * dy)
    acc = Taylor.constant(0.0, order)
    for k, (i, jj) in enumerate(_MONO[order]):
        acc = acc + powers_x[i] * powers_y[jj] * cart.c[k]
    return Jet.from_taylor(acc, "polar", (r, theta))


def hat_jet(f, q, exterior_radius: float | None = None) -> Jet:
    """Polar jet of ``f^(u, v) = f(u/rho^2, v/rho^2)`` at ``q = (rho, theta)``.

    Uses r = 1/rho and rho f^_rho = -r f_r, rho^2 f^_rhorho = 2 r f_r + r^2 f_rr,
    f^_theta = f_theta, f^_rhotheta = -r f_rtheta / rho, f^_thetatheta = f_thetatheta.
    """
    rho, theta = (_as_num(v) for v in q)
    R = f.domain.radius if exterior_radius is None else exterior_radius
    bad = (rho <= 0) | ((rho * R >= 1) if R > 0 else False)
    if np.any(np.asarray(bad)):
        raise DomainError(f"rho must lie in (0, 1/R) with R = {R}")
    r = 1 / rho
    pj = eval_polar_jet(f, (r, theta), order=2)
    fr, ft = pj.first
    frr, frt, ftt = pj.second
    first = (-r * r * fr, ft)
    second = ((2 * r * fr + r * r * frr) * r * r, -r * frt * r, ftt)
    return Jet(2, "polar", (rho, theta), pj.value, first, second)
