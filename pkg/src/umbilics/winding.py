"""Rotation indices of vector and line fields along closed curves.

Angles are accumulated between consecutive samples with the two-argument
arctangent; any parameter interval whose angular step is too large is bisected
until every step is below pi/2 (vector fields) or pi/4 (line fields).  Fields
whose components underflow in double precision are re-evaluated with mpmath
numbers, and angles are always accumulated as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import mpmath
import numpy as np

from .errors import (
    DomainError,
    EquiDiagonalError,
    NoConvergence,
    NonFiniteError,
    ParseError,
    TangentZeroError,
    UmbilicOnCurveError,
    ZeroOnCurveError,
)
from .identifiers import LineSample, direction_field, identifier_field
from .jets import Point2, extended_precision, is_extended

__all__ = [
    "HalfIndex",
    "WindingReport",
    "CurveSpec",
    "circle",
    "parametric",
    "parse_curve",
    "vector_field_index",
    "line_field_index",
    "sign_change_index",
    "umbilic_index_via_D",
    "umbilic_index_via_Delta",
    "umbilic_index_direct",
    "inverted_index",
    "hessian_flow_index",
    "index_at_infinity",
    "RadiusSearch",
    "find_valid_radius",
    "find_small_radius",
]

TWO_PI = 2 * math.pi
MAX_DEPTH = 24
INITIAL_SAMPLES = 256
# double-precision magnitudes below this trigger the mpmath re-evaluation
TINY = 1e-250
ZERO_REL = 1e-8
# optional cap on |log| magnitude ratio between neighbouring samples (off by default)
LOG_JUMP = None


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class WindingReport:
    index: Any
    samples: int
    min_magnitude: Any
    max_step_angle: float
    refined: bool
    depth: int = 0
    total_angle: float = 0.0
    residual: float = 0.0
    extended: bool = False

    def as_dict(self) -> dict:
        idx = self.index
        return {
            "index": str(idx) if isinstance(idx, HalfIndex) else int(idx),
            "samples": self.samples,
            "min_magnitude": mpmath.nstr(self.min_magnitude, 6) if is_extended(self.min_magnitude) else float(self.min_magnitude),
            "max_step_angle": round(self.max_step_angle, 12),
            "refined": self.refined,
            "depth": self.depth,
            "residual": round(self.residual, 12),
            "extended_precision": self.extended,
        }


@dataclass(frozen=True, order=False)
class HalfIndex:
    """An exact half-integer, stored as twice its value."""

    twice: int
    report: WindingReport | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if int(self.twice) != self.twice:
            raise ValueError("twice must be an integer")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value) -> "HalfIndex":
        fr = Fraction(value).limit_denominator(2) if not isinstance(value, Fraction) else value
        if (2 * fr).denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(2 * fr))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    def __float__(self):
        return self.twice / 2

    def __str__(self):
        return str(self.value)

    def _coerce(self, other) -> "HalfIndex":
        return other if isinstance(other, HalfIndex) else HalfIndex.of(other)

    def __add__(self, other):
        return HalfIndex(self.twice + self._coerce(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfIndex(self.twice - self._coerce(other).twice)

    def __rsub__(self, other):
        return HalfIndex(self._coerce(other).twice - self.twice)

    def __neg__(self):
        return HalfIndex(-self.twice)

    def __eq__(self, other):
        if isinstance(other, HalfIndex):
            return self.twice == other.twice
        try:
            return self.value == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.twice)

    def with_report(self, report: WindingReport) -> "HalfIndex":
        return HalfIndex(self.twice, report)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveSpec:
    """A closed curve t in [0, 2pi] -> plane, traversed with increasing t.

    ``kind`` is ``circle`` (counterclockwise) or ``parametric``.
    """

    kind: str
    center: Point2 = Point2(0.0, 0.0)
    radius: Any = 1.0
    map: Callable | None = None

    def __post_init__(self):
        if self.kind == "circle" and not self.radius > 0:
            raise DomainError("circle radius must be positive")
        if self.kind == "parametric":
            a, b = self.point(np.array([0.0, TWO_PI]))
            if abs(a[0] - a[1]) > 1e-12 * (1 + abs(a[0])) or abs(b[0] - b[1]) > 1e-12 * (1 + abs(b[0])):
                raise DomainError("parametric curve is not closed")

    def point(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            R = float(self.radius)
            return self.center[0] + R * np.cos(t), self.center[1] + R * np.sin(t)
        x, y = self.map(t)
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    def point_mp(self, t):
        """Single point with mpmath coordinates (extended evaluation)."""
        if self.kind == "circle":
            R = mpmath.mpf(self.radius)
            tt = mpmath.mpf(float(t))
            return mpmath.mpf(self.center[0]) + R * mpmath.cos(tt), mpmath.mpf(self.center[1]) + R * mpmath.sin(tt)
        x, y = self.map(np.asarray([float(t)]))
        return mpmath.mpf(float(np.asarray(x)[0])), mpmath.mpf(float(np.asarray(y)[0]))

    def winding_about_origin(self) -> int:
        if self.kind == "circle":
            d = math.hypot(float(self.center[0]), float(self.center[1]))
            R = float(self.radius)
            if abs(d - R) <= 1e-14 * R:
                raise DomainError("curve passes through the origin")
            return 1 if d < R else 0
        rep = vector_field_index(lambda x, y: (x, y), self)
        return int(rep.index)

    def describe(self) -> str:
        if self.kind == "circle":
            c = "" if (self.center[0] == 0 and self.center[1] == 0) else f"@{self.center[0]:g},{self.center[1]:g}"
            return f"circle:{mpmath.nstr(self.radius, 17) if is_extended(self.radius) else repr(float(self.radius))}{c}"
        return "parametric"


def circle(radius, center=(0.0, 0.0)) -> CurveSpec:
    return CurveSpec("circle", Point2(*center), radius)


def parametric(fn: Callable) -> CurveSpec:
    return CurveSpec("parametric", map=fn)


def parse_curve(text: str) -> CurveSpec:
    """``circle:R`` or ``circle:R@cx,cy``."""
    head, _, rest = text.partition(":")
    if head != "circle" or not rest:
        raise ParseError(f"unknown curve {text!r}")
    rad, _, ctr = rest.partition("@")
    try:
        center = tuple(float(v) for v in ctr.split(",")) if ctr else (0.0, 0.0)
        if len(center) != 2:
            raise ValueError("center needs two coordinates")
        return circle(float(rad), center)
    except (ValueError, DomainError) as exc:
        raise ParseError(f"bad curve {text!r}: {exc}") from None


# --------------------------------------------------------------------------
# sampling with automatic extended precision


DPS_LADDER = (30, 60, 120, 240, 480, 960)
# narrowest turning window accepted by the radius search (2^-20 of the initial grid step)
MIN_WIDTH = TWO_PI / INITIAL_SAMPLES * 2.0 ** -20
AGREE_ANGLE = 1e-6


class _Sampler:
    """Evaluates a field along a curve at the lowest trustworthy precision.

    Level 0 is double precision on numpy arrays; level k >= 1 evaluates point
    by point with mpmath at ``DPS_LADDER[k - 1]`` digits.  Double precision is
    abandoned when components underflow or overflow, and :meth:`calibrate`
    raises the level until two consecutive levels agree on a set of test
    parameters.  ``kind`` is ``vector`` (field returns (vx, vy)) or ``line``
    (field returns a LineSample or a bare angle).
    """

    def __init__(self, fn, curve: CurveSpec, kind: str, precision: str = "auto"):
        if precision not in ("auto", "float", "extended"):
            raise ValueError("precision must be auto, float or extended")
        self.fn, self.curve, self.kind = fn, curve, kind
        self.precision = precision
        self.level = 1 if precision == "extended" else 0

    @property
    def extended(self) -> bool:
        return self.level > 0

    @property
    def dps(self) -> int:
        return 15 if self.level == 0 else DPS_LADDER[self.level - 1]

    def _split(self, out):
        if self.kind == "vector":
            vx, vy = out
            return vx, vy
        if isinstance(out, LineSample):
            return out.angle, out.magnitude
        return out, None

    def _float(self, t):
        x, y = self.curve.point(t)
        with np.errstate(all="ignore"):
            try:
                a, b = self._split(self.fn(x, y))
            except (NonFiniteError, FloatingPointError, OverflowError, ZeroDivisionError):
                return None
            a = np.broadcast_to(np.asarray(a, dtype=float), t.shape)
            b = np.ones_like(a) if b is None else np.broadcast_to(np.asarray(b, dtype=float), t.shape)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            return None
        mag = np.hypot(a, b) if self.kind == "vector" else np.abs(b)
        if self.precision == "auto" and np.any(mag < TINY):
            return None
        return list(a), list(b)

    def _mp(self, t, level: int):
        out_a, out_b = [], []
        with extended_precision(DPS_LADDER[level - 1]):
            for ti in t:
                a, b = self._split(self.fn(*self.curve.point_mp(ti)))
                out_a.append(_to_mpf(a))
                out_b.append(mpmath.mpf(1) if b is None else _to_mpf(b))
        return out_a, out_b

    def _at(self, t, level: int):
        if level == 0:
            return self._float(t)
        if level > len(DPS_LADDER):
            raise NoConvergence("field not resolved at the highest working precision")
        return self._mp(t, level)

    def components(self, t):
        """Raw components at the current level, escalating on underflow."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        while True:
            out = self._at(t, self.level)
            if out is not None:
                return out
            if self.precision == "float":
                raise NonFiniteError("field underflowed or overflowed in double precision")
            self.level += 1

    def _angles(self, a, b):
        if self.kind == "vector":
            if a and is_extended(a[0]):
                ang = [float(mpmath.atan2(y, x)) for x, y in zip(a, b)]
                mag = [mpmath.sqrt(x * x + y * y) for x, y in zip(a, b)]
            else:
                ang = list(np.arctan2(b, a))
                mag = list(np.hypot(a, b))
            return np.array(ang, dtype=float), mag
        return np.array([float(v) for v in a], dtype=float), [abs(v) for v in b]

    def __call__(self, t):
        return self._angles(*self.components(t))

    def _agree(self, lo, hi) -> bool:
        period = TWO_PI if self.kind == "vector" else math.pi
        (al, ml), (ah, mh) = self._angles(*lo), self._angles(*hi)
        if np.any(np.abs(_wrap(al - ah, period)) > AGREE_ANGLE):
            return False
        return all(abs(x - y) <= 1e-3 * abs(y) for x, y in zip(ml, mh))

    def calibrate(self, t) -> int:
        """Raise the level until it agrees with a much more precise one on ``t``.

        The reference has four times the digits (two rungs up), since a
        quantity such as 1 - tanh(x) can round to zero identically at two
        neighbouring precisions and make them agree on the same wrong value.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.precision == "float":
            return self.level
        while True:
            lo = self.components(t)
            try:
                hi = self._at(t, max(self.level + 2, 2))
            except (TypeError, AttributeError):
                if self.level > 0:
                    raise
                # a plain numpy field that cannot take mpmath scalars
                self.precision = "float"
                return self.level
            if self._agree(lo, hi):
                return self.level
            self.level += 1


def _to_mpf(v):
    if isinstance(v, np.ndarray):
        v = v.item()
    return mpmath.mpf(v)


def _calibration_points(n: int, probes) -> np.ndarray:
    t = (np.arange(16) + 0.25) * TWO_PI / 16
    if probes is not None and len(probes):
        t = np.concatenate([t, np.mod(np.asarray(probes, dtype=float), TWO_PI)])
    return t


def _wrap(d, period):
    return (d + period / 2) % period - period / 2


def _log_mag(m) -> float:
    if m == 0:
        return -math.inf
    return float(mpmath.log(m)) if is_extended(m) else math.log(float(m))


def _accumulate(sampler: _Sampler, period: float, max_step: float, n0: int, zero_error,
                probes=None, log_jump: float | None = LOG_JUMP) -> dict:
    """Adaptive angle accumulation over t in [0, 2pi].

    An interval is bisected while its wrapped angular step is >= ``max_step``
    or, when ``log_jump`` is set, while the field magnitude changes by more
    than a factor exp(log_jump) across it.  The second trigger catches narrow
    windows in which a rapidly shrinking field turns almost a full revolution
    between two samples whose angles happen to be close.
    """
    t = np.linspace(0.0, TWO_PI, n0 + 1)
    if probes is not None and len(probes):
        extra = np.mod(np.asarray(probes, dtype=float), TWO_PI)
        t = np.unique(np.concatenate([t, extra[(extra > 0) & (extra < TWO_PI)]]))

    def full(tt):
        a, m = sampler(tt[:-1])
        return np.append(a, a[0]), list(m) + [m[0]]

    sampler.calibrate(_calibration_points(n0, probes))
    ang, mag = full(t)
    depth = 0
    while True:
        d = _wrap(np.diff(ang), period)
        bad = np.abs(d) >= max_step
        if log_jump is not None:
            lm = np.array([_log_mag(m) for m in mag])
            with np.errstate(invalid="ignore"):
                jump = np.abs(np.diff(lm))
            bad |= ~(jump <= log_jump)
        if not bad.any():
            break
        depth += 1
        if depth > MAX_DEPTH:
            _raise_unresolved(mag, bad, zero_error)
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (t[idx] + t[idx + 1])
        level = sampler.level
        new_ang, new_mag = sampler(mids)
        t = np.insert(t, idx + 1, mids)
        if sampler.level != level:
            # switched to mpmath part-way: resample everything consistently
            ang, mag = full(t)
            continue
        ang = np.insert(ang, idx + 1, new_ang)
        for k, (i, m) in enumerate(zip(idx, new_mag)):
            mag.insert(i + 1 + k, m)
    for m in mag:
        if m == 0:
            raise zero_error("field vanishes exactly on the curve")
    return {
        "total": float(np.sum(d)),
        "samples": len(t) - 1,
        "min_magnitude": min(mag),
        "max_step": float(np.max(np.abs(d))),
        "depth": depth,
        "extended": sampler.extended,
    }


def _raise_unresolved(mag, bad, zero_error):
    mags = [float(m) if not is_extended(m) else m for m in mag]
    ref = sorted(mags)[len(mags) // 2]
    near = min(min(mags[i], mags[i + 1]) for i in np.nonzero(bad)[0])
    if ref == 0 or near <= ZERO_REL * ref:
        raise zero_error("field (nearly) vanishes on the curve; refinement did not converge")
    raise NoConvergence(f"angle refinement exceeded depth {MAX_DEPTH}")


def vector_field_index(fn: Callable, curve: CurveSpec, *, samples: int = INITIAL_SAMPLES, precision: str = "auto",
                       probes=None, log_jump: float | None = LOG_JUMP) -> WindingReport:
    """Winding number of the vector field ``fn(x, y) -> (vx, vy)`` along ``curve``.

    ``probes`` are curve parameters always included in the initial grid.
    """
    sampler = _Sampler(fn, curve, "vector", precision)
    acc = _accumulate(sampler, TWO_PI, math.pi / 2, samples, ZeroOnCurveError, probes, log_jump)
    w = acc["total"] / TWO_PI
    k = round(w)
    residual = abs(w - k)
    if residual >= 0.01:
        raise NoConvergence(f"winding residual {residual:.3g} too large")
    return WindingReport(
        int(k), acc["samples"], acc["min_magnitude"], acc["max_step"], acc["depth"] > 0,
        acc["depth"], acc["total"], residual, acc["extended"],
    )


def line_field_index(fn: Callable, curve: CurveSpec, *, samples: int = INITIAL_SAMPLES, precision: str = "auto",
                     zero_error=UmbilicOnCurveError, probes=None, log_jump: float | None = LOG_JUMP) -> WindingReport:
    """Half-integer index of the line field ``fn(x, y) -> LineSample | angle``."""
    sampler = _Sampler(fn, curve, "line", precision)
    acc = _accumulate(sampler, math.pi, math.pi / 4, samples, zero_error, probes, log_jump)
    w = acc["total"] / math.pi
    k = round(w)
    residual = abs(w - k)
    if residual >= 0.02:
        raise NoConvergence(f"line-field residual {residual:.3g} too large")
    return WindingReport(
        HalfIndex(k), acc["samples"], acc["min_magnitude"], acc["max_step"], acc["depth"] > 0,
        acc["depth"], acc["total"], residual, acc["extended"],
    )


# --------------------------------------------------------------------------
# index formulas


def _half(twice: int, report: WindingReport) -> HalfIndex:
    return HalfIndex(twice, report)


def _with_probes(f, curve: CurveSpec, kw: dict) -> dict:
    """Add the surface's symmetry angles as forced samples on centred circles."""
    if "probes" in kw or f.probe_angles is None or curve.kind != "circle":
        return kw
    if curve.center[0] != 0 or curve.center[1] != 0:
        return kw
    return {**kw, "probes": list(f.probe_angles(float(curve.radius)))}


def umbilic_index_via_D(f, curve: CurveSpec, **kw) -> HalfIndex:
    """Half the index of D_f = (d1, d2)."""
    rep = vector_field_index(identifier_field(f, "D"), curve, **_with_probes(f, curve, kw))
    return _half(rep.index, rep)


def umbilic_index_via_Delta(f, curve: CurveSpec, **kw) -> HalfIndex:
    """I_f(curve) = w0 + ind(Delta_f)/2 with w0 the winding of the curve about o."""
    w0 = curve.winding_about_origin()
    rep = vector_field_index(identifier_field(f, "Delta"), curve, **_with_probes(f, curve, kw))
    return _half(2 * w0 + rep.index, rep)


def umbilic_index_direct(f, curve: CurveSpec, **kw) -> HalfIndex:
    """Index of the principal line field itself."""
    rep = line_field_index(direction_field(f, "principal"), curve, **_with_probes(f, curve, kw))
    return rep.index.with_report(rep)


def inverted_index(I_gamma) -> HalfIndex:
    """Index at the inverted point: 2 - I."""
    return 2 - (I_gamma if isinstance(I_gamma, HalfIndex) else HalfIndex.of(I_gamma))


def hessian_flow_index(g, curve: CurveSpec, route: str = "direct", **kw) -> HalfIndex:
    """Index of the eigen-flow of Hess g along ``curve``.

    ``cartesian``: ind(d_g)/2; ``polar``: w0 + ind(delta_g)/2; ``direct``: the
    eigen-direction line field.
    """
    kw = _with_probes(g, curve, kw)
    if route == "cartesian":
        rep = vector_field_index(identifier_field(g, "d_g"), curve, **kw)
        return _half(rep.index, rep)
    if route == "polar":
        w0 = curve.winding_about_origin()
        rep = vector_field_index(identifier_field(g, "delta_g"), curve, **kw)
        return _half(2 * w0 + rep.index, rep)
    if route == "direct":
        rep = line_field_index(direction_field(g, "hessian"), curve, zero_error=EquiDiagonalError, **kw)
        return rep.index.with_report(rep)
    raise ValueError(f"unknown route {route!r}")


def index_at_infinity(f, radius, **kw) -> HalfIndex:
    """Eigen-flow index of Hess f along the counterclockwise circle of ``radius``."""
    return hessian_flow_index(f, circle(radius), "direct", **kw)


# --------------------------------------------------------------------------
# sign-change counting


def _sgn(v) -> int:
    return int(v > 0) - int(v < 0)


def sign_change_index(f, curve: CurveSpec, *, samples: int = 720, precision: str = "auto",
                      probe_angles=None, return_zeros: bool = False):
    """ind(Delta_f) from the sign changes of delta1 along the curve.

    Each transversal zero t_j of delta1 contributes eps = 0 if delta2 < 0 and
    eps = sign(delta1'(t_j)) if delta2 > 0; the index is -sum(eps).
    """
    sampler = _Sampler(identifier_field(f, "Delta"), curve, "vector", precision)
    step = TWO_PI / samples
    t = (np.arange(samples) + 0.5) * step
    if probe_angles is not None:
        t = np.unique(np.concatenate([t, np.mod(np.asarray(probe_angles, dtype=float), TWO_PI)]))
    sampler.calibrate(_calibration_points(samples, probe_angles))
    d1, _ = sampler.components(t)
    d1, _ = sampler.components(t)  # level may have risen during the first pass
    ev = sampler.components
    signs = [_sgn(v) for v in d1]
    if all(s == 0 for s in signs):
        raise TangentZeroError("delta1 vanishes identically along the curve")
    n = len(t)
    zeros = []
    for i in range(n):
        j = (i + 1) % n
        a, b = t[i], t[j] if j else t[j] + TWO_PI
        if signs[i] == 0:
            zeros.append(float(a))
        elif signs[j] != 0 and signs[i] != signs[j]:
            zeros.append(_bisect(ev, a, b, signs[i]) % TWO_PI)
    eps_sum = 0
    detail = []
    for tz in zeros:
        h = 1e-7 if not sampler.extended else 1e-12
        (lo, hi), _ = ev(np.array([tz - h, tz + h]))
        slo, shi = _sgn(lo), _sgn(hi)
        if slo == shi or slo == 0 or shi == 0:
            raise TangentZeroError(f"zero of delta1 at t = {tz:.6g} is not transversal")
        deriv = (hi - lo) / (2 * h)
        _, (d2,) = ev(np.array([tz]))
        if d2 == 0:
            raise ZeroOnCurveError(f"delta1 and delta2 vanish together at t = {tz:.6g}")
        eps = 0 if d2 < 0 else _sgn(deriv)
        eps_sum += eps
        detail.append((tz, float(deriv) if not is_extended(deriv) else deriv, _sgn(d2), eps))
    if return_zeros:
        return -eps_sum, detail
    return -eps_sum


def _bisect(ev, a: float, b: float, sa: int, tol: float = 1e-14) -> float:
    for _ in range(60):
        if b - a <= tol * max(1.0, abs(a)):
            break
        mid = 0.5 * (a + b)
        (v,), _ = ev(np.array([mid % TWO_PI]))
        s = _sgn(v)
        if s == 0:
            return mid
        if s == sa:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


# --------------------------------------------------------------------------
# valid-radius search


@dataclass(frozen=True)
class RadiusSearch:
    """Outcome of a radius search; ``conditions`` records the checked signs."""

    radius: Any
    steps: int
    conditions: dict

    def as_dict(self) -> dict:
        r = self.radius
        return {
            "radius": mpmath.nstr(r, 17) if is_extended(r) else float(r),
            "steps": self.steps,
            "conditions": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in self.conditions.items()},
        }


def _count_sign_changes(f, which: str, r, m: int, samples: int) -> int:
    t = (np.arange(samples) + 0.5) * TWO_PI / samples
    sampler = _Sampler(identifier_field(f, which), circle(r), "vector")
    sampler.calibrate(_calibration_points(samples, f.probe_angles(float(r)) if f.probe_angles else None))
    v1, _ = sampler.components(t)
    v1, _ = sampler.components(t)
    s = [_sgn(v) for v in v1]
    n = len(s)
    return sum(1 for i in range(n) if s[i] != 0 and s[(i + 1) % n] != 0 and s[i] != s[(i + 1) % n])


def _radius_conditions(f, which: str, r, m: int, samples: int, d1_sign: int | None) -> dict:
    h = 1e-6 / m
    key = np.array([0.0, math.pi / m, TWO_PI - h, h, math.pi / m - h, math.pi / m + h])
    sampler = _Sampler(identifier_field(f, which), circle(r), "vector", "extended")
    sampler.calibrate(key)
    v1, v2 = sampler.components(key)
    cond = {"v2(0) > 0": bool(v2[0] > 0), "v2(pi/m) < 0": bool(v2[1] < 0)}
    if not (cond["v2(0) > 0"] and cond["v2(pi/m) < 0"]):
        return cond
    slope0 = (v1[3] - v1[2]) / (2 * h)
    slope_pi = (v1[5] - v1[4]) / (2 * h)
    cond["sign dv1/dtheta(0)"] = _sgn(slope0)
    if d1_sign is not None:
        cond["slope sign as expected"] = _sgn(slope0) == d1_sign
    # angular width over which the field turns at theta = 0 and pi/m; the
    # adaptive bisection has to resolve it within its depth budget
    width = min(abs(v2[0] / slope0), abs(v2[1] / slope_pi)) if slope0 != 0 and slope_pi != 0 else 0.0
    cond["turning width"] = float(width)
    cond["turning width resolvable"] = bool(width > MIN_WIDTH)
    if not cond["turning width resolvable"]:
        return cond
    n = _count_sign_changes(f, which, r, m, samples)
    cond["sign changes of v1"] = n
    cond["2m sign changes"] = n == 2 * m
    return cond


def _accept(cond: dict) -> bool:
    return all(v for k, v in cond.items() if isinstance(v, (bool, np.bool_)))


def find_valid_radius(f, r0: float = 2.0, factor: float = 2.0, r_max: float = 2.0 ** 160, *,
                      samples: int = 720, which: str = "Delta", d1_sign: int | None = 1) -> RadiusSearch:
    """First r = r0 * factor^k (k >= 0) where the circle passes the sign tests.

    Tests: v2(0) > 0 > v2(pi/m), v1 has exactly 2m sign changes, and the slope
    of v1 at theta = 0 has sign ``d1_sign``; (v1, v2) is the identifier named
    by ``which`` (``Delta`` for the surfaces g_m).
    """
    m = int(f.param("m", 1))
    r, steps = r0, 0
    last = {}
    while r <= r_max:
        cond = _radius_conditions(f, which, r, m, samples, d1_sign)
        last = cond
        if _accept(cond) and "2m sign changes" in cond:
            return RadiusSearch(r, steps, cond)
        r *= factor
        steps += 1
    raise NoConvergence(f"no valid radius up to {r_max:g} (last conditions: {last})")


def find_small_radius(f, r0: float = 0.5, factor: float = 0.5, r_min: float = 2.0 ** -160, *,
                      samples: int = 720, which: str = "delta_g", d1_sign: int | None = -1) -> RadiusSearch:
    """Shrinking search around the origin, e.g. for delta_lambda of Lambda_m."""
    m = int(f.param("m", 1))
    r, steps = r0, 0
    last = {}
    while r >= r_min:
        cond = _radius_conditions(f, which, r, m, samples, d1_sign)
        last = cond
        if _accept(cond) and "2m sign changes" in cond:
            return RadiusSearch(r, steps, cond)
        r *= factor
        steps += 1
    raise NoConvergence(f"no valid small radius down to {r_min:g} (last conditions: {last})")
