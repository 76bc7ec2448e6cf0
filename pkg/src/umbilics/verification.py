"""Acceptance checks shared by ``umbilics verify`` and the test-suite.

Each ``criterion_N`` returns a :class:`CriterionResult` holding a verdict and
the numbers behind it.  Nothing here raises on a failed check; winding errors
inside a check are recorded as failures with their message.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import catalog as cat
from .errors import UmbilicsError
from .identifiers import (
    cartesian_identifiers,
    hessian_identifier_polar,
    identifier_field,
    polar_identifiers,
    principal_line,
    umbilic_candidates,
)
from .inversion import check_hatted_limits, check_regularity, duality_check
from .jets import eval_jet, eval_polar_jet, extended_precision
from .ribaucour import fact_a1_residual, gradient_from_normal, normal_from_gradient, phi_map
from .winding import (
    HalfIndex,
    circle,
    find_small_radius,
    find_valid_radius,
    hessian_flow_index,
    inverted_index,
    sign_change_index,
    umbilic_index_direct,
    umbilic_index_via_D,
    umbilic_index_via_Delta,
    vector_field_index,
)

__all__ = ["CriterionResult", "CRITERIA", "SUITES", "run_criterion", "run_suite"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool = True
    lines: list = field(default_factory=list)
    seconds: float = 0.0

    def check(self, ok, text: str) -> bool:
        ok = bool(ok)
        self.passed &= ok
        self.lines.append(("ok   " if ok else "FAIL ") + text)
        return ok

    def note(self, text: str) -> None:
        self.lines.append("     " + text)

    def summary(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.title} ({self.seconds:.1f} s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "lines": list(self.lines), "seconds": round(self.seconds, 3)}


def _guard(res: CriterionResult, label: str, fn: Callable):
    try:
        return fn()
    except UmbilicsError as exc:
        res.check(False, f"{label}: {type(exc).__name__}: {exc}")
    except (ArithmeticError, ValueError) as exc:
        res.check(False, f"{label}: {type(exc).__name__}: {exc}")
    return None


def _quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


# --------------------------------------------------------------------------
# 1-2: the cubic examples


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "Re z^3: umbilic index -1/2 by D, Delta and the line field")
    f, c = cat.rez3(), circle(0.1)
    for name, fn in (("D", umbilic_index_via_D), ("Delta", umbilic_index_via_Delta), ("direct", umbilic_index_direct)):
        idx = _guard(res, name, lambda: fn(f, c))
        if idx is not None:
            rep = idx.report
            res.check(idx == HalfIndex.of(-0.5) and rep.residual < 0.01,
                      f"{name}: index {idx}, residual {rep.residual:.2e}")
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "r^3 cos(theta): ind(Delta) = -1 and umbilic index 1/2 at three radii")
    f = cat.rez2zbar()
    for r in (0.05, 0.1, 0.2):
        rep = _guard(res, f"r={r}", lambda: vector_field_index(identifier_field(f, "Delta"), circle(r)))
        idx = _guard(res, f"r={r}", lambda: umbilic_index_via_Delta(f, circle(r)))
        if rep is not None and idx is not None:
            res.check(rep.index == -1 and idx == HalfIndex.of(0.5), f"r={r}: ind(Delta) = {rep.index}, I = {idx}")
    return res


# --------------------------------------------------------------------------
# 3: the exterior surfaces g_m


def _check_gm(res: CriterionResult, f) -> None:
    m = f.param("m")
    search = _guard(res, f.label, lambda: find_valid_radius(f))
    if search is None:
        return
    r = search.radius
    c = circle(r)
    I = _guard(res, f.label, lambda: umbilic_index_via_Delta(f, c))
    sc = _guard(res, f.label, lambda: sign_change_index(f, c))
    if I is None or sc is None:
        return
    ind = I.report.index
    cond = search.conditions
    with extended_precision(40):
        rm = mpmath.mpf(r)
        _, d2 = cat.closed_form_delta_g(f, (rm, mpmath.mpf(0)))
        _, d2pi = cat.closed_form_delta_g(f, (rm, mpmath.pi / m))
        mirror = d2 != 0 and abs(d2 + d2pi) <= 1e-9 * abs(d2)
    ok = (ind == -m and I == 1 - HalfIndex.of(m / 2) and sc == -m
          and cond["v2(0) > 0"] and cond["v2(pi/m) < 0"] and cond.get("slope sign as expected", False)
          and mirror and inverted_index(I) == 1 + HalfIndex.of(m / 2))
    rtxt = f"2^{math.log2(float(r)):.0f}"
    res.check(ok, f"{f.label}: r = {rtxt}, ind(Delta) = {ind}, by sign changes {sc}, I = {I}, "
                  f"inverted {inverted_index(I)}, delta2(pi/m) = -delta2(0): {bool(mirror)}")


def criterion_3(ms=range(1, 7), exponents=(0.1, 0.2)) -> CriterionResult:
    res = CriterionResult(3, "g_m: ind(Delta) = -m, I = 1 - m/2, inverted 1 + m/2 (tanh and 1 - e^-x)")
    for F in (cat.TANH, cat.ONE_MINUS_EXP):
        for a in exponents:
            for m in ms:
                _check_gm(res, _quiet(cat.gm, m, a, F))
    return res


# --------------------------------------------------------------------------
# 4: Lambda_m at the origin


def criterion_4(ms=range(1, 5), exponents=(0.3, 0.5), radii=(0.1, 0.3)) -> CriterionResult:
    res = CriterionResult(4, "Lambda_m: ind(delta_lambda) = m and Hessian index 1 + m/2 on r in {0.1, 0.3}")
    for a in exponents:
        for m in ms:
            L = cat.lambda_m(m, a)
            target = 1 + HalfIndex.of(m / 2)
            for r in radii:
                c = circle(r)
                rep = _guard(res, f"{L.label} r={r}", lambda: vector_field_index(identifier_field(L, "delta_g"), c))
                routes = [_guard(res, f"{L.label} r={r} {rt}", lambda: hessian_flow_index(L, c, rt))
                          for rt in ("cartesian", "polar", "direct")]
                if rep is None or None in routes:
                    continue
                res.check(rep.index == m and all(x == target for x in routes),
                          f"{L.label} r={r}: ind(delta) = {rep.index}, Hessian (cart, polar, direct) = "
                          f"{', '.join(str(x) for x in routes)}")
            search = _guard(res, L.label, lambda: find_small_radius(L))
            if search is not None:
                c = circle(search.radius)
                rep = vector_field_index(identifier_field(L, "delta_g"), c)
                routes = [hessian_flow_index(L, c, rt) for rt in ("cartesian", "polar", "direct")]
                res.note(f"{L.label} at searched r = {float(search.radius):.3g}: ind(delta) = {rep.index}, "
                         f"Hessian = {', '.join(str(x) for x in routes)}")
    return res


# --------------------------------------------------------------------------
# 5: duality


def criterion_5(ms=range(1, 7), a: float = 0.5, n_points: int = 500, seed: int = 0) -> CriterionResult:
    res = CriterionResult(5, "Duality: ind_o(H_dual) + ind_inf(H_f) = 2; dual(f_m - 1) = Lambda_m")
    rng = np.random.default_rng(seed)
    for m in ms:
        L = cat.lambda_m(m, a)
        f = _quiet(cat.fm, m, a, offset=0.0)
        search = _guard(res, L.label, lambda: find_small_radius(L))
        if search is None:
            continue
        r_in = float(search.radius)
        d = _guard(res, f.label, lambda: duality_check(f, 1 / r_in, r_in))
        if d is not None:
            res.check(d.total == 2 and d.ind_infinity == 1 - HalfIndex.of(m / 2) and d.ind_origin == 1 + HalfIndex.of(m / 2),
                      f"m={m}: ind_inf = {d.ind_infinity}, ind_o = {d.ind_origin}, sum = {d.total}")
        rho = rng.uniform(0.01, 0.99, n_points)
        th = rng.uniform(0, 2 * math.pi, n_points)
        g = cat.make_dual(f)
        u, v = rho * np.cos(th), rho * np.sin(th)
        dual_vals = np.asarray(g.evaluate_cartesian(u, v), dtype=float)
        lam_vals = np.asarray(L.evaluate_cartesian(u, v), dtype=float)
        err = float(np.max(np.abs(dual_vals - lam_vals) / np.maximum(1.0, np.abs(lam_vals))))
        res.check(err < 1e-11, f"m={m}: max |dual(f_m - 1) - Lambda_m| = {err:.2e} on {n_points} points")
    quad = cat.expression("x**2 - y**2", cat.Domain("exterior", 1.0))
    d = _guard(res, "x^2 - y^2", lambda: duality_check(quad, 2.0, 0.5))
    if d is not None:
        res.check(d.total == 2 and d.ind_infinity == 0 and d.ind_origin == 2,
                  f"x^2 - y^2: ind_inf = {d.ind_infinity}, ind_o = {d.ind_origin}, sum = {d.total}")
    return res


# --------------------------------------------------------------------------
# 6: umbilic-free surfaces


def criterion_6(grid: int = 400) -> CriterionResult:
    res = CriterionResult(6, "Bates and Ghomi-Howard: no umbilic candidates on [-20, 20]^2")
    rect = (-20.0, 20.0, -20.0, 20.0)
    b = umbilic_candidates(cat.bates(), rect, (grid, grid))
    res.check(not b.candidates and b.d1_range[0] > 0,
              f"Bates: {len(b.candidates)} candidates, min d1 = {b.d1_range[0]:.3e}")
    gh = cat.ghomi_howard(1.0)
    s = umbilic_candidates(gh, rect, (grid, grid))
    res.check(not s.candidates, f"GH: {len(s.candidates)} candidates"
              + (f", first cell x in [{s.candidates[0][0]:.4f}, {s.candidates[0][1]:.4f}], "
                 f"y in [{s.candidates[0][2]:.4f}, {s.candidates[0][3]:.4f}]" if s.candidates else ""))
    x = np.linspace(-20, 20, 200)
    _, d2a = cartesian_identifiers(eval_jet(gh, (x, np.zeros_like(x))))
    y = np.linspace(-math.sqrt(20), math.sqrt(20), 200)
    _, d2b = cartesian_identifiers(eval_jet(gh, (-y * y, y)))
    res.check(np.min(np.abs(d2a)) > 0 and np.min(np.abs(d2b)) > 0,
              f"GH: min |d2| on y = 0: {np.min(np.abs(d2a)):.3e}, on x = -y^2: {np.min(np.abs(d2b)):.3e} (200 samples each)")
    return res


# --------------------------------------------------------------------------
# 7-8: regularity of the inverted graphs


def criterion_7(ms=range(1, 7), exponents=(0.1, 0.2)) -> CriterionResult:
    res = CriterionResult(7, "Regularity ladder: f_m reaches C2projection; Bates and GH stop at Differentiable")
    ab = ("(a) lim f_r = 0", "(b) lim f_theta/r = 0")
    for a in exponents:
        for m in ms:
            f = _quiet(cat.fm, m, a)
            rep = check_regularity(f)
            finals = [rep.witness(k).values[-1] for k in ab]
            res.check(rep.level == "C2projection" and max(finals) < 1e-3,
                      f"{f.label}: level {rep.level}, final (a), (b) = {finals[0]:.2e}, {finals[1]:.2e}")
    for f in (cat.bates(), cat.ghomi_howard(1.0)):
        rep = check_regularity(f)
        finals = [rep.witness(k).values[-1] for k in ab]
        res.check(rep.level == "Differentiable" and max(finals) > 0.01,
                  f"{f.label}: level {rep.level}, final (a), (b) = {finals[0]:.3g}, {finals[1]:.3g}")
    return res


def criterion_8(ms=range(1, 7), a: float = 0.2) -> CriterionResult:
    res = CriterionResult(8, "Limit suites below 1e-6 by rho = 1e-5 for f_m; printed k_uv matches AD")
    for m in ms:
        f = _quiet(cat.fm, m, a)
        rep = check_hatted_limits(f)
        bad = rep.failures(1e-6, 1e-5)
        mono = all(s.decreasing for s in rep.sequences)
        worst = max(rep.sequences, key=lambda s: s.value_at(1e-5))
        res.check(not bad, f"{f.label}: all sequences decreasing: {mono}; {len(bad)} above 1e-6 at rho = 1e-5, "
                           f"largest {worst.name} = {worst.value_at(1e-5):.2e}")
        k = rep.k_uv_check
        res.check(k["relative"] < 1e-10, f"{f.label}: k_uv printed vs AD relative difference {k['relative']:.1e}")
    return res


# --------------------------------------------------------------------------
# 9: tangent-sphere reparametrisation


A1_SURFACES = (
    ("ellipsoidal", lambda: cat.expression("(x**2 + 2*y**2)/2")),
    ("rez3", cat.rez3),
    ("bates", cat.bates),
    ("gh", lambda: cat.ghomi_howard(1.0)),
    ("cubic", lambda: cat.expression("x**2/2 + y**3/3 + x*y/5")),
)


def a1_sample_points(f, n: int, rng, box: float = 0.5, min_gap: float = 1e-2) -> list:
    """Random points away from umbilics where Phi is comfortably invertible."""
    pts = []
    while len(pts) < n:
        p = rng.uniform(-box, box, 2)
        if float(principal_line(eval_jet(f, tuple(p))).magnitude) < min_gap:
            continue
        if abs(np.linalg.det(phi_map(f, p)[1])) <= 0.1:
            continue
        pts.append(p)
    return pts


def criterion_9(n_points: int = 50, seed: int = 1) -> CriterionResult:
    res = CriterionResult(9, "Curvature lines become Hessian eigen-lines of lambda; normal round trip")
    rng = np.random.default_rng(seed)
    for name, make in A1_SURFACES:
        f = make()
        worst = max(fact_a1_residual(f, p) for p in a1_sample_points(f, n_points, rng))
        res.check(worst < 1e-4, f"{name}: max residual over {n_points} points = {worst:.2e}")
    v = rng.normal(size=(1000, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v[:, 2] = -np.abs(v[:, 2])
    back = normal_from_gradient(*gradient_from_normal(v))
    err = float(np.max(np.abs(back - v)))
    res.check(err < 1e-13, f"normal -> gradient -> normal round trip on 1000 normals: {err:.1e}")
    return res


# --------------------------------------------------------------------------
# 10: property suites


def _fd_jet(f, p, h=1e-4):
    x, y = p
    ev = lambda a, b: float(f.evaluate_cartesian(a, b))
    fx = (ev(x + h, y) - ev(x - h, y)) / (2 * h)
    fy = (ev(x, y + h) - ev(x, y - h)) / (2 * h)
    fxx = (ev(x + h, y) - 2 * ev(x, y) + ev(x - h, y)) / h ** 2
    fyy = (ev(x, y + h) - 2 * ev(x, y) + ev(x, y - h)) / h ** 2
    fxy = (ev(x + h, y + h) - ev(x + h, y - h) - ev(x - h, y + h) + ev(x - h, y - h)) / (4 * h * h)
    return np.array([fx, fy, fxx, fxy, fyy])


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def criterion_10(seed: int = 2) -> CriterionResult:
    res = CriterionResult(10, "Properties: AD vs differences and printed forms, symmetry, refinement, rescaling")
    rng = np.random.default_rng(seed)
    surfaces = [cat.bates(), cat.ghomi_howard(1.0), cat.rez3(), _quiet(cat.fm, 3, 0.2), cat.lambda_m(2, 0.5)]
    worst = 0.0
    for f in surfaces:
        for _ in range(20):
            p = rng.uniform(1.5, 3.0) * np.array([math.cos(t := rng.uniform(0, 6.28)), math.sin(t)])
            j = eval_jet(f, tuple(p))
            ad = np.array([j.fx, j.fy, j.fxx, j.fxy, j.fyy], dtype=float)
            worst = max(worst, _rel(ad, _fd_jet(f, tuple(p))))
    res.check(worst < 1e-6, f"AD vs central differences: max relative {worst:.1e}")

    worst = 0.0
    for m in range(1, 7):
        for a in (0.1, 0.2):
            for F in (cat.TANH, cat.ONE_MINUS_EXP):
                g = _quiet(cat.gm, m, a, F)
                r, t = rng.uniform(2, 50, 30), rng.uniform(0, 2 * math.pi, 30)
                j = eval_polar_jet(g, (r, t))
                cf = cat.closed_form_polar_jet_g(g, (r, t))
                worst = max(worst, _rel(j.entries(), cf.entries()))
                worst = max(worst, _rel(polar_identifiers(j), cat.closed_form_delta_g(g, (r, t))))
        L = cat.lambda_m(m if m <= 4 else 4, 0.5)
        r, t = rng.uniform(0.05, 2, 30), rng.uniform(0, 2 * math.pi, 30)
        j = eval_polar_jet(L, (r, t))
        worst = max(worst, _rel(j.entries(), cat.closed_form_polar_jet_lambda(L, (r, t)).entries()))
        worst = max(worst, _rel(hessian_identifier_polar(j), cat.closed_form_zeta(L, (r, t))))
        jc = eval_jet(L, (r * np.cos(t), r * np.sin(t)), order=1)
        worst = max(worst, _rel((jc.fx, jc.fy), cat.closed_form_lambda_gradient(L, (r, t))))
    res.check(worst < 1e-9, f"AD vs printed closed forms: max relative {worst:.1e}")

    worst = 0.0
    for m in range(1, 7):
        g = _quiet(cat.fm, m, 0.2)
        r, t = rng.uniform(2, 50, 50), rng.uniform(0, 2 * math.pi, 50)
        a = np.array(polar_identifiers(eval_polar_jet(g, (r, t))), dtype=float)
        b = np.array(polar_identifiers(eval_polar_jet(g, (r, t + 2 * math.pi / m))), dtype=float)
        # relative to the field's size on each circle
        scale = np.maximum(1.0, np.max(np.abs(a), axis=0))
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    res.check(worst < 1e-12, f"2 pi/m symmetry of Delta for f_m: max relative {worst:.1e}")

    f, c = cat.rez3(), circle(0.1)
    idx = [umbilic_index_via_D(f, c, samples=n) for n in (64, 128, 256, 512)]
    res.check(len(set(idx)) == 1, f"Re z^3 index under sample doubling 64..512: {', '.join(map(str, idx))}")

    fld = identifier_field(cat.rez2zbar(), "Delta")
    base = vector_field_index(fld, circle(0.1)).index
    scaled = [vector_field_index(lambda x, y, s=s: tuple(s * v for v in fld(x, y)), circle(0.1)).index
              for s in (1e-6, 1e-3, 1e3, 1e6)]
    res.check(all(v == base for v in scaled), f"positive rescaling of Delta (1e-6..1e6): indices {base}, {scaled}")
    return res


# --------------------------------------------------------------------------
# registry


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}

SUITES = {
    "indices": (1, 2, 3, 4),
    "regularity": (7, 8),
    "duality": (5,),
    "ribaucour": (9,),
    "umbilics": (6,),
    "properties": (10,),
    "all": tuple(CRITERIA),
}


def run_criterion(n: int) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[n]()
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(name: str) -> list[CriterionResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return [run_criterion(n) for n in SUITES[name]]
