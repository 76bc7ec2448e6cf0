"""Inversion of graph ends, regularity verdicts and the dual-index check.

The inversion x -> x/|x|^2 sends the graph of f over r > R to a surface
through the origin, parametrised over the punctured disk rho < 1/R by

    Psi_f(u, v) = (u, v, rho^2 fhat) / (rho^2 fhat^2 + 1),
    fhat(u, v) = f(u/rho^2, v/rho^2).

Regularity at the origin is judged from sampled sup-sequences at growing
radii; the reports always carry the raw sequences.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .catalog import SurfaceSpec, make_dual
from .errors import DomainError, NoConvergence
from .jets import Point2, Taylor, eval_polar_jet, hat_jet
from .winding import HalfIndex, circle, hessian_flow_index, index_at_infinity

__all__ = [
    "InversionPoint",
    "invert_graph",
    "graph_uv",
    "graph_height",
    "graph_gradient",
    "section5_lambda",
    "Witness",
    "RegularityReport",
    "LEVELS",
    "check_regularity",
    "LimitSequence",
    "HattedLimitReport",
    "hatted_quantities",
    "printed_k_uv",
    "ad_k_uv",
    "check_hatted_limits",
    "DualityResult",
    "duality_check",
    "export_inversion_obj",
    "write_obj",
    "write_json",
]

LEVELS = ("Fails", "C0", "Differentiable", "C1", "C2projection")
TOL_LIMIT = 1e-3
# boundedness: allowed log-log growth rate of the sup over the last radii
BOUND_SLOPE = 0.05


def _exterior_radius(f: SurfaceSpec) -> float:
    return f.domain.radius if f.domain.kind == "exterior" else 0.0


def _check_rho(f: SurfaceSpec, rho) -> None:
    R = _exterior_radius(f)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0) or (R > 0 and np.any(rho * R >= 1)):
        raise DomainError(f"{f.label}: need 0 < rho < 1/R with R = {R:g}")


def _fhat(f: SurfaceSpec, rho, theta):
    return f.evaluate_polar(1.0 / rho, theta)


# --------------------------------------------------------------------------
# the map and its graph


@dataclass(frozen=True)
class InversionPoint:
    uv: Point2
    xyz: tuple


def invert_graph(f: SurfaceSpec, q) -> InversionPoint:
    u, v = float(q[0]), float(q[1])
    rho = math.hypot(u, v)
    _check_rho(f, rho)
    fh = float(_fhat(f, rho, math.atan2(v, u)))
    k = (rho * fh) ** 2
    return InversionPoint(Point2(u, v), (u / (k + 1), v / (k + 1), rho * rho * fh / (k + 1)))


def graph_uv(f: SurfaceSpec, XY, tol: float = 1e-12, max_iter: int = 500) -> Point2:
    """Solve (X, Y) = Pi(Psi_f(u, v)) for (u, v).

    Pi o Psi_f keeps the polar angle, so only rho is unknown:
    rho / (1 + phi^2) = s with phi = rho fhat.  The fixed-point map
    rho <- s (1 + phi^2) is iterated with damping, starting from rho = s,
    accelerated by Newton steps whenever they lower the residual.
    """
    X, Y = float(XY[0]), float(XY[1])
    s = math.hypot(X, Y)
    if s == 0:
        raise DomainError("the origin is the image of the puncture")
    theta = math.atan2(Y, X)
    R = _exterior_radius(f)
    rho_max = 1.0 / R if R > 0 else math.inf

    def resid(rho):
        phi = rho * float(_fhat(f, rho, theta))
        return rho / (1 + phi * phi) - s

    rho, omega = s, 1.0
    err = abs(resid(rho))
    for _ in range(max_iter):
        if err < tol * min(1.0, s):
            return Point2(rho * math.cos(theta), rho * math.sin(theta))
        # Newton step with a difference quotient; fall back to the damped
        # fixed-point map when it does not reduce the residual
        dr = 1e-7 * rho
        slope = (resid(rho + dr) - resid(rho - dr)) / (2 * dr) if rho - dr > 0 else 0.0
        cands = []
        if slope != 0 and math.isfinite(slope):
            step = resid(rho) / slope
            cands += [rho - step, rho - step / 2, rho - step / 4]
        phi = rho * float(_fhat(f, rho, theta))
        cands.append((1 - omega) * rho + omega * s * (1 + phi * phi))
        moved = False
        for cand in cands:
            if 0 < cand < rho_max:
                e = abs(resid(cand))
                if e < err:
                    rho, err, moved = cand, e, True
                    break
        if not moved:
            omega /= 2
            if omega < 1e-12:
                break
    if err < tol:
        return Point2(rho * math.cos(theta), rho * math.sin(theta))
    raise NoConvergence(f"graph inversion did not converge at {XY} (residual {err:.3g})")


def graph_height(f: SurfaceSpec, XY, tol: float = 1e-12) -> float:
    """Z_f(X, Y), the height of the inverted graph over (X, Y)."""
    uv = graph_uv(f, XY, tol)
    rho = math.hypot(*uv)
    phi = rho * float(_fhat(f, rho, math.atan2(uv[1], uv[0])))
    return rho * phi / (1 + phi * phi)


def _uv_taylors(f: SurfaceSpec, u, v, order: int = 2):
    """Taylor polynomials of h, k, X, Y, Z in the seeds (u, v)."""
    U = Taylor.variable(u, 0, order)
    V = Taylor.variable(v, 1, order)
    g = make_dual(f)
    h = g.evaluate_cartesian(U, V)
    q = U * U + V * V
    k = h * h / q
    d = k + 1
    return h, k, U / d, V / d, h / d


def graph_gradient(f: SurfaceSpec, XY) -> tuple[float, float, float]:
    """(Z, Z_X, Z_Y) of the inverted graph by the chain rule through (u, v)."""
    u, v = graph_uv(f, XY)
    _, _, X, Y, Z = _uv_taylors(f, u, v, order=1)
    J = np.array([[X.derivative(1, 0), X.derivative(0, 1)], [Y.derivative(1, 0), Y.derivative(0, 1)]], dtype=float)
    gz = np.array([Z.derivative(1, 0), Z.derivative(0, 1)], dtype=float)
    zx, zy = np.linalg.solve(J.T, gz)
    return float(Z.value), float(zx), float(zy)


def section5_lambda(f: SurfaceSpec, XY) -> float:
    """Tangent-sphere radius of the inverted graph: Z w / (1 + w), w = sqrt(1 + |grad Z|^2)."""
    z, zx, zy = graph_gradient(f, XY)
    w = math.sqrt(1 + zx * zx + zy * zy)
    return z * w / (1 + w)


# --------------------------------------------------------------------------
# regularity


@dataclass(frozen=True)
class Witness:
    criterion: str
    kind: str  # "limit", "bound" or "strict"
    values: tuple
    radii: tuple
    passed: bool


@dataclass(frozen=True)
class RegularityReport:
    surface: str
    level: str
    c: float
    witnesses: tuple

    def witness(self, criterion: str) -> Witness:
        for w in self.witnesses:
            if w.criterion == criterion:
                return w
        raise KeyError(criterion)

    def passes(self, level: str) -> bool:
        return LEVELS.index(self.level) >= LEVELS.index(level)

    def as_dict(self) -> dict:
        return {
            "surface": self.surface,
            "level": self.level,
            "c": self.c,
            "witnesses": [asdict(w) for w in self.witnesses],
        }


def _sup_refined(fn, thetas: np.ndarray, rounds: int = 3, n: int = 101) -> float:
    """sup |fn| over the circle: grid maximum, then zoom around the best sample."""
    vals = np.abs(fn(thetas))
    i = int(np.argmax(vals))
    best = float(vals[i])
    step = (thetas[1] - thetas[0]) if len(thetas) > 1 else math.pi
    center = thetas[i]
    for _ in range(rounds):
        local = np.linspace(center - step, center + step, n)
        lv = np.abs(fn(local))
        j = int(np.argmax(lv))
        if lv[j] > best:
            best = float(lv[j])
            center = local[j]
        step = 2 * step / (n - 1)
    return best


def _regularity_quantities(f: SurfaceSpec, c: float) -> dict:
    def jet(r, t):
        return eval_polar_jet(f, (np.full_like(t, r), t))

    def f_over_r(r, t):
        return jet(r, t).value / r

    def eq29(r, t):
        j = jet(r, t)
        return (j.value ** 2 - 2 * r * j.value * j.fr) / (r * r)

    return {
        "f/r bounded": ("bound", "C0", f_over_r),
        "|(f^2 - 2 r f f_r)/r^2| < 1": ("strict", "C0", eq29),
        "lim f/r = 0": ("limit", "Differentiable", f_over_r),
        "(a) lim f_r = 0": ("limit", "C1", lambda r, t: jet(r, t).fr),
        "(b) lim f_theta/r = 0": ("limit", "C1", lambda r, t: jet(r, t).ft / r),
        "r^(1-c/2) f_r bounded": ("bound", "C2projection", lambda r, t: r ** (1 - c / 2) * jet(r, t).fr),
        "r^(-c/2) f_theta bounded": ("bound", "C2projection", lambda r, t: r ** (-c / 2) * jet(r, t).ft),
        "r^(2-c) f_rr bounded": ("bound", "C2projection", lambda r, t: r ** (2 - c) * jet(r, t).frr),
        "r^(1-c) f_rtheta bounded": ("bound", "C2projection", lambda r, t: r ** (1 - c) * jet(r, t).frt),
        "r^(-c) f_thetatheta bounded": ("bound", "C2projection", lambda r, t: r ** (-c) * jet(r, t).ftt),
    }


def _verdict(kind: str, seq: list[float], radii: list[float], tol_limit: float) -> bool:
    s = np.asarray(seq, dtype=float)
    if not np.all(np.isfinite(s)):
        return False
    if kind == "strict":
        return bool(np.all(s < 1))
    if kind == "limit":
        tail = s[-4:]
        return bool(np.all(np.diff(tail) < 0) and tail[-1] < tol_limit)
    tail, rr = s[-3:], np.asarray(radii[-3:])
    if tail[0] == 0:
        return bool(np.all(tail == 0))
    slope = math.log(max(tail[-1], 1e-300) / tail[0]) / math.log(rr[-1] / rr[0])
    return slope <= BOUND_SLOPE


def check_regularity(f: SurfaceSpec, level: str = "C2projection", c: float | None = None,
                     radii=None, n_theta: int = 720, tol_limit: float = TOL_LIMIT) -> RegularityReport:
    """Numeric regularity ladder of the inverted graph at the origin.

    Each criterion reports sup over a theta-grid (offset by half a step, plus
    the surface's probe angles) at r = R * 4^k, k = 1..10 (R = 1 when f is
    defined on the whole plane).  ``c`` defaults to 2a for the g_m family
    and 0 otherwise.
    """
    if level not in LEVELS[1:]:
        raise ValueError(f"unknown level {level!r}")
    if c is None:
        c = 2 * f.param("a") if f.kind in ("Fm", "Gm") else 0.0
    R = _exterior_radius(f) or 1.0
    radii = [R * 4.0 ** k for k in range(1, 11)] if radii is None else [float(r) for r in radii]
    base = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    wanted = LEVELS.index(level)
    witnesses = []
    for name, (kind, lvl, fn) in _regularity_quantities(f, c).items():
        if LEVELS.index(lvl) > wanted:
            continue
        seq = []
        for r in radii:
            thetas = base
            if f.probe_angles is not None:
                thetas = np.sort(np.concatenate([base, np.mod(f.probe_angles(r), 2 * math.pi)]))
            try:
                seq.append(_sup_refined(lambda t: np.asarray(fn(r, t), dtype=float), thetas))
            except (ArithmeticError, ValueError):
                seq.append(math.inf)
        witnesses.append(Witness(name, kind, tuple(seq), tuple(radii), _verdict(kind, seq, radii, tol_limit)))
    reached = "Fails"
    for lvl in LEVELS[1:wanted + 1]:
        if all(w.passed for w in witnesses if _regularity_quantities_level(w.criterion) == lvl):
            reached = lvl
        else:
            break
    return RegularityReport(f.label, reached, float(c), tuple(witnesses))


_CRITERION_LEVEL = {name: lvl for name, (_, lvl, _) in _regularity_quantities(SurfaceSpec("x", "x"), 0.0).items()}


def _regularity_quantities_level(name: str) -> str:
    return _CRITERION_LEVEL[name]


# --------------------------------------------------------------------------
# limits at the origin of the inverted graph


def printed_k_uv(f: SurfaceSpec, q):
    """The expanded k_uv in terms of the hatted polar jet at q = (rho, theta)."""
    rho, t = q
    j = hat_jet(f, q)
    F = j.value
    Fr, Ft = j.first
    Frr, Frt, Ftt = j.second
    return (np.sin(2 * t) * (rho ** 2 * Fr ** 2 + F * (rho ** 2 * Frr + 3 * rho * Fr - Ftt) - Ft ** 2)
            + 2 * np.cos(2 * t) * (Ft * (rho * Fr + F) + rho * F * Frt))


def ad_k_uv(f: SurfaceSpec, q):
    rho, t = q
    _, k, _, _, _ = _uv_taylors(f, rho * np.cos(t), rho * np.sin(t))
    return k.derivative(1, 1)


def _printed_first(f: SurfaceSpec, q) -> dict:
    rho, t = q
    j = hat_jet(f, q)
    F = j.value
    Fr, Ft = j.first
    c, s = np.cos(t), np.sin(t)
    return {
        "h_u": rho * ((2 * F + rho * Fr) * c - Ft * s),
        "h_v": rho * ((2 * F + rho * Fr) * s + Ft * c),
        "k_u": 2 * F * rho * (c * (F + rho * Fr) - Ft * s),
        "k_v": 2 * F * rho * (s * (F + rho * Fr) + Ft * c),
        "rho^2 fhat_rho": rho ** 2 * Fr,
        "rho fhat_theta": rho * Ft,
    }


GROUPS = {
    "hatted": ("rho^2 fhat_rho", "rho fhat_theta"),
    "first": ("h_u", "h_v", "k_u", "k_v"),
    "rho k2": ("rho k_uu", "rho k_uv", "rho k_vv"),
    "Z Z2": ("Z Z_uu", "Z Z_uv", "Z Z_vv"),
    "rho h2": ("rho h_uu", "rho h_uv", "rho h_vv"),
}


def hatted_quantities(f: SurfaceSpec, rho: float, theta) -> dict:
    """Every sampled quantity of the limit suites at radius rho (arrays over theta)."""
    theta = np.asarray(theta, dtype=float)
    rr = np.full_like(theta, rho)
    out = _printed_first(f, (rr, theta))
    h, k, _, _, Z = _uv_taylors(f, rho * np.cos(theta), rho * np.sin(theta))
    out["rho k_uu"] = rho * k.derivative(2, 0)
    out["rho k_uv"] = rho * printed_k_uv(f, (rr, theta))
    out["rho k_vv"] = rho * k.derivative(0, 2)
    z = Z.value
    out["Z Z_uu"] = z * Z.derivative(2, 0)
    out["Z Z_uv"] = z * Z.derivative(1, 1)
    out["Z Z_vv"] = z * Z.derivative(0, 2)
    out["rho h_uu"] = rho * h.derivative(2, 0)
    out["rho h_uv"] = rho * h.derivative(1, 1)
    out["rho h_vv"] = rho * h.derivative(0, 2)
    return out


@dataclass(frozen=True)
class LimitSequence:
    name: str
    group: str
    rhos: tuple
    values: tuple
    decreasing: bool

    def value_at(self, rho: float) -> float:
        i = int(np.argmin(np.abs(np.log(np.asarray(self.rhos)) - math.log(rho))))
        return self.values[i]


@dataclass(frozen=True)
class HattedLimitReport:
    surface: str
    sequences: tuple
    k_uv_check: dict = field(default_factory=dict)

    def sequence(self, name: str) -> LimitSequence:
        for s in self.sequences:
            if s.name == name:
                return s
        raise KeyError(name)

    def failures(self, threshold: float = 1e-6, at_rho: float = 1e-5) -> list[str]:
        """Names of sequences that are not decreasing or exceed ``threshold`` at ``at_rho``."""
        return [s.name for s in self.sequences if not s.decreasing or s.value_at(at_rho) >= threshold]

    def as_dict(self) -> dict:
        return {
            "surface": self.surface,
            "sequences": [asdict(s) for s in self.sequences],
            "k_uv_check": self.k_uv_check,
        }


def _decays(v) -> bool:
    """Strictly decreasing, except that a sequence may sit at exactly zero."""
    return all(b < a or (a == 0 and b == 0) for a, b in zip(v, v[1:]))


def check_hatted_limits(f: SurfaceSpec, rhos=None, n_theta: int = 720,
                        k_uv_point=(0.01, 0.4)) -> HattedLimitReport:
    """Sup over theta of each limit quantity at rho = 10^-k, k = 1..6."""
    rhos = [10.0 ** -k for k in range(1, 7)] if rhos is None else [float(r) for r in rhos]
    R = _exterior_radius(f)
    if R > 0 and rhos[0] * R >= 1:
        raise DomainError(f"rho must stay below 1/R = {1 / R:g}")
    thetas = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    table: dict[str, list[float]] = {}
    for rho in rhos:
        th = thetas
        if f.probe_angles is not None:
            th = np.sort(np.concatenate([thetas, np.mod(f.probe_angles(1 / rho), 2 * math.pi)]))
        for name, val in hatted_quantities(f, rho, th).items():
            table.setdefault(name, []).append(float(np.max(np.abs(val))))
    seqs = []
    for group, names in GROUPS.items():
        for name in names:
            v = table[name]
            seqs.append(LimitSequence(name, group, tuple(rhos), tuple(v), _decays(v)))
    rho0, t0 = k_uv_point
    printed, ad = float(printed_k_uv(f, (rho0, t0))), float(ad_k_uv(f, (rho0, t0)))
    check = {"rho": rho0, "theta": t0, "printed": printed, "ad": ad,
             "relative": abs(printed - ad) / max(abs(ad), 1e-300)}
    return HattedLimitReport(f.label, tuple(seqs), check)


# --------------------------------------------------------------------------
# duality of Hessian indices


class DualityResult(NamedTuple):
    ind_infinity: HalfIndex
    ind_origin: HalfIndex
    total: HalfIndex


def duality_check(f: SurfaceSpec, radius_out, radius_in, **kw) -> DualityResult:
    """ind_inf(H_f) on the circle radius_out and ind_o(H_dual) on radius_in."""
    inf = index_at_infinity(f, radius_out, **kw)
    org = hessian_flow_index(make_dual(f), circle(radius_in), "direct", **kw)
    return DualityResult(inf, org, inf + org)


# --------------------------------------------------------------------------
# export


def write_obj(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as fh:
        for x, y, z in vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


def grid_faces(n_rows: int, n_cols: int) -> np.ndarray:
    """Two triangles per quad of a row-major (n_rows, n_cols) vertex grid."""
    faces = []
    for i in range(n_rows - 1):
        for j in range(n_cols - 1):
            a = i * n_cols + j
            b, c, d = a + 1, a + n_cols, a + n_cols + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    return np.asarray(faces, dtype=int)


def inversion_mesh(f: SurfaceSpec, rho_max: float = 0.5, n_rho: int = 200, n_theta: int = 720):
    """Vertices of Psi_f on a (rho, theta) grid; the theta = 0 seam is duplicated."""
    rho = rho_max * np.arange(1, n_rho + 1) / n_rho
    theta = np.linspace(0.0, 2 * math.pi, n_theta + 1)
    P, T = np.meshgrid(rho, theta, indexing="ij")
    _check_rho(f, P)
    fh = np.asarray(_fhat(f, P, T), dtype=float) * np.ones_like(P)
    k = (P * fh) ** 2
    u, v = P * np.cos(T), P * np.sin(T)
    verts = np.stack([u / (k + 1), v / (k + 1), P * P * fh / (k + 1)], -1).reshape(-1, 3)
    return verts, grid_faces(n_rho, n_theta + 1)


def export_inversion_obj(f: SurfaceSpec, path, rho_max: float = 0.5, n_rho: int = 200, n_theta: int = 720) -> int:
    verts, faces = inversion_mesh(f, rho_max, n_rho, n_theta)
    write_obj(path, verts, faces)
    return len(verts)


def write_json(path, report: Any) -> None:
    data = report.as_dict() if hasattr(report, "as_dict") else report
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
