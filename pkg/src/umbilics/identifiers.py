"""Umbilic and equi-diagonal identifiers, fundamental forms and shape matrices.

Everything here is plain algebra on jet entries, so the functions work
unchanged on scalars, numpy arrays (a batch of points) and mpmath numbers.
The field builders at the bottom wrap a surface into vectorised callables
``(x, y) -> (vx, vy)`` or ``(x, y) -> LineSample`` for the winding module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

import numpy as np

from .errors import EquiDiagonalError, UmbilicError
from .jets import Jet, _ops, eval_jet, eval_polar_jet, is_extended

__all__ = [
    "Sym2",
    "PlaneVector",
    "LineSample",
    "fundamental_forms",
    "cartesian_identifiers",
    "polar_identifiers",
    "hessian_identifier_cartesian",
    "hessian_identifier_polar",
    "shape_matrix_A",
    "shape_matrix_B",
    "v_A",
    "is_umbilic",
    "principal_direction",
    "principal_line",
    "hessian_direction",
    "hessian_line",
    "identifier_field",
    "direction_field",
    "VECTOR_FIELDS",
    "LINE_FIELDS",
    "ScanResult",
    "umbilic_candidates",
]

TOL_UMB = 1e-9


@dataclass(frozen=True)
class Sym2:
    """Real symmetric 2x2 matrix [[a11, a12], [a12, a22]]."""

    a11: Any
    a12: Any
    a22: Any

    @property
    def trace(self):
        return self.a11 + self.a22

    @property
    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a12

    def matrix(self) -> np.ndarray:
        """Stacked ``(..., 2, 2)`` float array."""
        a11, a12, a22 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (self.a11, self.a12, self.a22)))
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    def traceless_norm(self):
        """Frobenius norm of the trace-free part (zero iff a multiple of Id)."""
        o = _ops(self.a11)
        d = self.a11 - self.a22
        return o.sqrt(d * d / 2 + 2 * self.a12 * self.a12)


class PlaneVector(NamedTuple):
    vx: Any
    vy: Any

    def norm(self):
        return _ops(self.vx).sqrt(self.vx * self.vx + self.vy * self.vy)


class LineSample(NamedTuple):
    """A line direction (angle mod pi) with a non-degeneracy magnitude."""

    angle: Any
    magnitude: Any


# --------------------------------------------------------------------------
# Cartesian quantities


def fundamental_forms(j: Jet) -> tuple[Sym2, Sym2]:
    fx, fy = j.first
    fxx, fxy, fyy = j.second
    first = Sym2(1 + fx * fx, fx * fy, 1 + fy * fy)
    return first, Sym2(fxx, fxy, fyy)


def cartesian_identifiers(j: Jet) -> PlaneVector:
    """(d1, d2); both vanish exactly at umbilics of the graph."""
    fx, fy = j.first
    fxx, fxy, fyy = j.second
    h = 1 + fx * fx
    d1 = h * fxy - fx * fy * fxx
    d2 = h * fyy - fxx * (1 + fy * fy)
    return PlaneVector(d1, d2)


def hessian_identifier_cartesian(j: Jet) -> PlaneVector:
    """d_g = (2 g_xy, g_yy - g_xx)."""
    gxx, gxy, gyy = j.second
    return PlaneVector(2 * gxy, gyy - gxx)


def shape_matrix_A(j: Jet) -> Sym2:
    fx, fy = j.first
    fxx, fxy, fyy = j.second
    h = 1 + fx * fx
    k2 = 1 + fx * fx + fy * fy
    k = _ops(k2).sqrt(k2)
    l = -h * fxy + fx * fy * fxx
    a11 = fx * fy * (fx * fy * fxx - 2 * h * fxy) + h * h * fyy
    return Sym2(a11, l * k, k2 * fxx)


def v_A(m: Sym2) -> PlaneVector:
    return PlaneVector(m.a11 - m.a22, m.a12)


# --------------------------------------------------------------------------
# polar quantities


def _radius(j: Jet, p):
    r = j.point[0] if p is None else p[0]
    return r


def polar_identifiers(j: Jet, p=None) -> PlaneVector:
    """(delta1, delta2) from a polar jet; ``p`` defaults to the jet's point."""
    r = _radius(j, p)
    fr, ft = j.first
    frr, frt, ftt = j.second
    h = 1 + fr * fr
    d1 = -ft * (h + r * fr * frr) + r * h * frt
    d2 = h * (r * fr + ftt) - frr * (r * r + ft * ft)
    return PlaneVector(d1, d2)


def hessian_identifier_polar(j: Jet, p=None) -> PlaneVector:
    """delta_g = (2(r g_rt - g_t), -r^2 g_rr + r g_r + g_tt)."""
    r = _radius(j, p)
    gr, gt = j.first
    grr, grt, gtt = j.second
    return PlaneVector(2 * (r * grt - gt), -r * r * grr + r * gr + gtt)


def shape_matrix_B(j: Jet, p=None) -> Sym2:
    r = _radius(j, p)
    fr, ft = j.first
    frr, frt, ftt = j.second
    h = 1 + fr * fr
    k2 = ft * ft + r * r * h
    k = _ops(k2).sqrt(k2)
    l = ft * (h + r * fr * frr) - r * h * frt
    b11 = r * fr * fr * ft * ft * frr + h * fr * (-2 * r * ft * frt + 2 * ft * ft + r * r * h) + r * h * h * ftt
    return Sym2(b11, l * k, r * k2 * frr)


# --------------------------------------------------------------------------
# directions


def _scale(j: Jet):
    return 1 + j.max_abs()


def is_umbilic(j: Jet, tol: float = TOL_UMB):
    d1, d2 = cartesian_identifiers(j)
    o = _ops(d1)
    return o.abs(d1) + o.abs(d2) <= tol * _scale(j)


def principal_line(j: Jet) -> LineSample:
    """Larger-curvature principal direction of I^-1 II as an angle in [0, pi).

    I = L L^T (Cholesky); the eigenvector w of L^-1 II L^-T for the larger
    eigenvalue is pulled back by L^-T.  The magnitude is the eigenvalue gap of
    the reduced matrix, zero exactly at umbilics.
    """
    first, second = fundamental_forms(j)
    o = _ops(first.a11)
    l11 = o.sqrt(first.a11)
    l21 = first.a12 / l11
    l22 = o.sqrt(first.a22 - l21 * l21)
    # M = L^-1 II L^-T
    m11 = second.a11 / (l11 * l11)
    m12 = (second.a12 - l21 * second.a11 / l11) / (l11 * l22)
    m22 = (second.a22 - 2 * l21 * second.a12 / l11 + l21 * l21 * second.a11 / (l11 * l11)) / (l22 * l22)
    phi = o.atan2(2 * m12, m11 - m22) / 2
    w1, w2 = o.cos(phi), o.sin(phi)
    vx = w1 / l11 - l21 * w2 / (l11 * l22)
    vy = w2 / l22
    gap = o.sqrt((m11 - m22) ** 2 + 4 * m12 * m12)
    return LineSample(_mod_pi(o.atan2(vy, vx)), gap)


def principal_direction(j: Jet, tol: float = TOL_UMB):
    """Angle in [0, pi) of the larger principal curvature direction."""
    if np.any(is_umbilic(j, tol)):
        raise UmbilicError("principal direction requested at an umbilic")
    return principal_line(j).angle


def hessian_line(j: Jet) -> LineSample:
    """Larger-eigenvalue eigen-direction of the Cartesian Hessian."""
    gxx, gxy, gyy = j.second
    o = _ops(gxx)
    phi = o.atan2(2 * gxy, gxx - gyy) / 2
    return LineSample(_mod_pi(phi), o.sqrt((gxx - gyy) ** 2 + 4 * gxy * gxy))


def hessian_direction(j: Jet, tol: float = TOL_UMB):
    s = hessian_line(j)
    if np.any(s.magnitude <= tol * _scale(j)):
        raise EquiDiagonalError("Hessian is a multiple of the identity")
    return s.angle


def _mod_pi(a):
    if is_extended(a):
        return a % _ops(a).pi
    return np.mod(a, np.pi)


# --------------------------------------------------------------------------
# vectorised fields for winding


def _polar_point(x, y):
    o = _ops(x)
    return o.sqrt(x * x + y * y), o.atan2(y, x)


def _delta(f, x, y):
    p = _polar_point(x, y)
    return polar_identifiers(eval_polar_jet(f, p), p)


def _delta_g(f, x, y):
    p = _polar_point(x, y)
    return hessian_identifier_polar(eval_polar_jet(f, p), p)


VECTOR_FIELDS: dict[str, Callable] = {
    "D": lambda f, x, y: cartesian_identifiers(eval_jet(f, (x, y))),
    "Delta": _delta,
    "d_g": lambda f, x, y: hessian_identifier_cartesian(eval_jet(f, (x, y))),
    "delta_g": _delta_g,
    "v_A": lambda f, x, y: v_A(shape_matrix_A(eval_jet(f, (x, y)))),
}

LINE_FIELDS: dict[str, Callable] = {
    "principal": lambda f, x, y: principal_line(eval_jet(f, (x, y))),
    "hessian": lambda f, x, y: hessian_line(eval_jet(f, (x, y))),
}


def identifier_field(f, which: str) -> Callable:
    """Vector field ``(x, y) -> PlaneVector`` named by ``which``.

    ``D`` and ``Delta`` are the Cartesian and polar umbilic identifiers,
    ``d_g`` and ``delta_g`` the Hessian identifiers, ``v_A`` the field built
    from the matrix A~_f.
    """
    try:
        fn = VECTOR_FIELDS[which]
    except KeyError:
        raise ValueError(f"unknown identifier field {which!r}") from None
    return lambda x, y: fn(f, x, y)


def direction_field(f, which: str) -> Callable:
    """Line field ``(x, y) -> LineSample``: ``principal`` or ``hessian``."""
    try:
        fn = LINE_FIELDS[which]
    except KeyError:
        raise ValueError(f"unknown line field {which!r}") from None
    return lambda x, y: fn(f, x, y)


# --------------------------------------------------------------------------
# grid scan for umbilics


@dataclass(frozen=True)
class ScanResult:
    """Candidate cells ``(x0, x1, y0, y1, twice_index)`` plus grid extrema of d1, d2."""

    rect: tuple
    grid: tuple
    candidates: list
    d1_range: tuple
    d2_range: tuple
    min_abs_d2: float

    def as_dict(self) -> dict:
        return {
            "rect": list(self.rect),
            "grid": list(self.grid),
            "candidates": [list(c) for c in self.candidates],
            "d1_range": list(self.d1_range),
            "d2_range": list(self.d2_range),
            "min_abs_d2": self.min_abs_d2,
        }


def _boundary_winding(f, x0, x1, y0, y1, per_edge: int = 16) -> int:
    """Winding number of D_f around a cell, from densely sampled edges."""
    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
    xs = np.concatenate([x0 + (x1 - x0) * t, np.full_like(t, x1), x1 - (x1 - x0) * t, np.full_like(t, x0)])
    ys = np.concatenate([np.full_like(t, y0), y0 + (y1 - y0) * t, np.full_like(t, y1), y1 - (y1 - y0) * t])
    d1, d2 = cartesian_identifiers(eval_jet(f, (xs, ys)))
    ang = np.arctan2(d2, d1)
    step = np.diff(np.append(ang, ang[0]))
    step = (step + np.pi) % (2 * np.pi) - np.pi
    return int(round(step.sum() / (2 * np.pi)))


def umbilic_candidates(f, rect=(-1.0, 1.0, -1.0, 1.0), grid=(50, 50), tol: float = TOL_UMB) -> ScanResult:
    """Grid cells that may contain an umbilic.

    ``grid`` counts nodes per axis.  A cell is kept when a corner is an
    umbilic to tolerance, or when both d1 and d2 change sign over its corners
    and D_f has non-zero winding around its boundary.
    """
    xa, xb, ya, yb = (float(v) for v in rect)
    nx, ny = int(grid[0]), int(grid[1])
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 x 2 nodes")
    X, Y = np.meshgrid(np.linspace(xa, xb, nx), np.linspace(ya, yb, ny), indexing="xy")
    j = eval_jet(f, (X, Y))
    d1, d2 = (np.asarray(v, dtype=float) for v in cartesian_identifiers(j))
    zero = (np.abs(d1) + np.abs(d2)) <= tol * _scale(j)

    def corners(a):
        return np.stack([a[:-1, :-1], a[:-1, 1:], a[1:, :-1], a[1:, 1:]])

    c1, c2, cz = corners(d1), corners(d2), corners(zero)
    changes = (c1.min(0) <= 0) & (c1.max(0) >= 0) & (c2.min(0) <= 0) & (c2.max(0) >= 0)
    xs, ys = X[0], Y[:, 0]
    found = []
    for iy, ix in zip(*np.nonzero(changes | cz.any(0))):
        cell = (float(xs[ix]), float(xs[ix + 1]), float(ys[iy]), float(ys[iy + 1]))
        if cz[:, iy, ix].any():
            found.append((*cell, None))
            continue
        try:
            w = _boundary_winding(f, *cell)
        except ArithmeticError:
            w = None
        if w != 0:
            found.append((*cell, w))
    return ScanResult(tuple(rect), (nx, ny), found, (float(d1.min()), float(d1.max())),
                      (float(d2.min()), float(d2.max())), float(np.abs(d2).min()))
