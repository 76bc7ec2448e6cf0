"""Tangent-sphere reparametrisation of a graph and the sphere-congruence surface.

At each point of the graph z = f(x, y) take the sphere tangent to the graph
and to the plane z = 0.  Its radius is

    lambda = f w / (1 + w),  w = sqrt(1 + f_x^2 + f_y^2),

and its contact point with the plane is (xi, eta) = (x, y) + lambda (nu_1, nu_2)
with nu = (f_x, f_y, -1)/w.  In the coordinates (xi, eta) the curvature lines
of the graph are the eigen-directions of the Hessian of lambda;
``fact_a1_residual`` measures how far a numerical evaluation is from that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import SurfaceSpec, closed_form_lambda_gradient
from .errors import DomainError, NoConvergence, UmbilicError
from .identifiers import is_umbilic, principal_line
from .jets import Point2, Taylor, eval_jet, sqrt

__all__ = [
    "RibaucourData",
    "sphere_radius",
    "ribaucour_data",
    "normal_from_gradient",
    "gradient_from_normal",
    "phi_map",
    "invert_phi",
    "lambda_hessian_fit",
    "lambda_hessian_chain",
    "fact_a1_residual",
    "sphere_normal",
    "lambda_nu",
    "sphere_congruence_surface",
    "congruence_mesh",
    "export_congruence_obj",
]

JACOBIAN_MIN = 0.1


@dataclass(frozen=True)
class RibaucourData:
    lam: float
    grad_lambda: tuple
    phi_image: Point2
    normal: tuple
    mu: float


def sphere_radius(f, fx, fy):
    w = sqrt(1 + fx * fx + fy * fy) if isinstance(fx, Taylor) else np.sqrt(1 + fx * fx + fy * fy)
    return f * w / (1 + w)


def normal_from_gradient(lx, ly) -> np.ndarray:
    """Unit normal (2 l_xi, 2 l_eta, l_xi^2 + l_eta^2 - 1) / (1 + l_xi^2 + l_eta^2)."""
    q = lx * lx + ly * ly
    return np.stack(np.broadcast_arrays(2 * lx, 2 * ly, q - 1), -1) / (1 + np.asarray(q))[..., None]


def gradient_from_normal(nu) -> tuple:
    """(nu_1, nu_2) / (1 - nu_3)."""
    nu = np.asarray(nu, dtype=float)
    d = 1 - nu[..., 2]
    return nu[..., 0] / d, nu[..., 1] / d


def ribaucour_data(f: SurfaceSpec, p) -> RibaucourData:
    x, y = float(p[0]), float(p[1])
    j = eval_jet(f, (x, y), order=1)
    fx, fy = float(j.fx), float(j.fy)
    w = math.sqrt(1 + fx * fx + fy * fy)
    lam = float(j.value) * w / (1 + w)
    nu = (fx / w, fy / w, -1 / w)
    lx, ly = gradient_from_normal(nu)
    lx, ly = float(lx), float(ly)
    return RibaucourData(lam, (lx, ly), Point2(x + lam * nu[0], y + lam * nu[1]), nu, 2 / (1 + lx * lx + ly * ly))


# --------------------------------------------------------------------------
# the map Phi and the Hessian of lambda in (xi, eta)


def _taylors(f: SurfaceSpec, x, y):
    """Order-2 Taylor polynomials of lambda, xi and eta in (x, y)."""
    F = f.evaluate_cartesian(Taylor.variable(x, 0, 3), Taylor.variable(y, 1, 3))
    fx, fy = F.diff(0), F.diff(1)
    f2 = F.truncate(2)
    w = sqrt(1 + fx * fx + fy * fy)
    lam = f2 * w / (1 + w)
    xi = Taylor.variable(x, 0, 2) + lam * fx / w
    eta = Taylor.variable(y, 1, 2) + lam * fy / w
    return lam, xi, eta


def _jac(xi: Taylor, eta: Taylor) -> np.ndarray:
    return np.array([[xi.derivative(1, 0), xi.derivative(0, 1)], [eta.derivative(1, 0), eta.derivative(0, 1)]], dtype=float)


def phi_map(f: SurfaceSpec, p) -> tuple[Point2, np.ndarray, float]:
    """(xi, eta), the Jacobian of Phi and lambda at p."""
    lam, xi, eta = _taylors(f, float(p[0]), float(p[1]))
    return Point2(float(xi.value), float(eta.value)), _jac(xi, eta), float(lam.value)


def invert_phi(f: SurfaceSpec, target, start, tol: float = 1e-14, max_iter: int = 50) -> Point2:
    """Damped Newton solve of Phi(x, y) = target from ``start``."""
    z = np.array(start, dtype=float)
    t = np.asarray(target, dtype=float)
    img, J, _ = phi_map(f, z)
    res = t - np.asarray(img)
    err = float(np.max(np.abs(res)))
    scale = 1 + float(np.max(np.abs(t)))
    for _ in range(max_iter):
        if err <= tol * scale:
            return Point2(float(z[0]), float(z[1]))
        step = np.linalg.solve(J, res)
        damp = 1.0
        while damp > 1e-6:
            cand = z + damp * step
            img_c, J_c, _ = phi_map(f, cand)
            res_c = t - np.asarray(img_c)
            e = float(np.max(np.abs(res_c)))
            if e < err:
                z, J, res, err = cand, J_c, res_c, e
                break
            damp /= 2
        else:
            break
    if err <= 1e2 * tol * scale:
        return Point2(float(z[0]), float(z[1]))
    raise NoConvergence(f"Phi inversion stalled at residual {err:.3g}")


def lambda_hessian_fit(f: SurfaceSpec, p, h: float = 1e-4) -> np.ndarray:
    """Hessian of lambda(xi, eta) by a quadratic least-squares fit on a 5x5 stencil.

    The stencil spacing is ``h`` times the smallest singular value of dPhi
    (capped at 1), so that nearly singular charts are sampled more finely.
    """
    x0 = np.asarray(p, dtype=float)
    c, J, _ = phi_map(f, x0)
    Jinv = np.linalg.inv(J)
    # step relative to the local scale of Phi: its smallest singular value
    h = h * min(1.0, float(np.linalg.svd(J, compute_uv=False)[-1]))
    rows, vals = [], []
    for i in range(-2, 3):
        for k in range(-2, 3):
            d = np.array([i * h, k * h])
            q = invert_phi(f, np.asarray(c) + d, x0 + Jinv @ d)
            _, _, lam = phi_map(f, q)
            rows.append([1.0, d[0], d[1], d[0] ** 2 / 2, d[0] * d[1], d[1] ** 2 / 2])
            vals.append(lam)
    coef, *_ = np.linalg.lstsq(np.asarray(rows), np.asarray(vals), rcond=None)
    return np.array([[coef[3], coef[4]], [coef[4], coef[5]]])


def lambda_hessian_chain(f: SurfaceSpec, p) -> np.ndarray:
    """Hessian of lambda(xi, eta) by the second-order chain rule."""
    lam, xi, eta = _taylors(f, float(p[0]), float(p[1]))
    J = _jac(xi, eta)
    JinvT = np.linalg.inv(J).T

    def hess(t: Taylor) -> np.ndarray:
        return np.array([[t.derivative(2, 0), t.derivative(1, 1)], [t.derivative(1, 1), t.derivative(0, 2)]], dtype=float)

    grad = JinvT @ np.array([lam.derivative(1, 0), lam.derivative(0, 1)], dtype=float)
    inner = hess(lam) - grad[0] * hess(xi) - grad[1] * hess(eta)
    return JinvT @ inner @ JinvT.T


def fact_a1_residual(f: SurfaceSpec, p, h: float = 1e-4, route: str = "fit") -> float:
    """Sine of the angle between the pushed-forward principal direction and
    the nearest eigen-direction of the Hessian of lambda in (xi, eta)."""
    j = eval_jet(f, (float(p[0]), float(p[1])))
    if is_umbilic(j):
        raise UmbilicError(f"{f.label}: umbilic at {tuple(p)}")
    a = float(principal_line(j).angle)
    _, J, _ = phi_map(f, p)
    if abs(np.linalg.det(J)) <= JACOBIAN_MIN:
        raise DomainError(f"Jacobian of Phi too small at {tuple(p)}")
    w = J @ np.array([math.cos(a), math.sin(a)])
    w /= np.linalg.norm(w)
    if route == "fit":
        H = lambda_hessian_fit(f, p, h)
    elif route == "chain":
        H = lambda_hessian_chain(f, p)
    else:
        raise ValueError(f"unknown route {route!r}")
    phi = 0.5 * math.atan2(2 * H[0, 1], H[0, 0] - H[1, 1])
    e1 = np.array([math.cos(phi), math.sin(phi)])
    s = abs(w[0] * e1[1] - w[1] * e1[0])
    return float(min(s, math.sqrt(max(0.0, 1 - s * s))))


# --------------------------------------------------------------------------
# the sphere-congruence surface of Lambda_m


def _lambda_gradient(Lam: SurfaceSpec, p, gradient: str):
    x, y = float(p[0]), float(p[1])
    if x == 0 and y == 0:
        raise DomainError("the congruence surface is evaluated away from the origin")
    if gradient == "printed":
        g = closed_form_lambda_gradient(Lam, (math.hypot(x, y), math.atan2(y, x)))
        val = float(Lam.evaluate_cartesian(x, y))
        return val, float(g[0]), float(g[1])
    if gradient != "ad":
        raise ValueError(f"unknown gradient source {gradient!r}")
    j = eval_jet(Lam, (x, y), order=1)
    return float(j.value), float(j.fx), float(j.fy)


def sphere_normal(Lam: SurfaceSpec, p, gradient: str = "ad") -> np.ndarray:
    _, lx, ly = _lambda_gradient(Lam, p, gradient)
    return normal_from_gradient(lx, ly)


def lambda_nu(Lam: SurfaceSpec, p, gradient: str = "ad") -> np.ndarray:
    val, lx, ly = _lambda_gradient(Lam, p, gradient)
    return val * normal_from_gradient(lx, ly)


def sphere_congruence_surface(Lam: SurfaceSpec, p, gradient: str = "ad") -> np.ndarray:
    """P(xi, eta) = (xi, eta, Lambda) - Lambda nu."""
    val, lx, ly = _lambda_gradient(Lam, p, gradient)
    return np.array([float(p[0]), float(p[1]), val]) - val * normal_from_gradient(lx, ly)


def congruence_mesh(Lam: SurfaceSpec, r_max: float = 0.5, n_r: int = 100, n_theta: int = 360):
    """Vertices of P on a polar grid (seam duplicated) and triangle faces."""
    from .inversion import grid_faces

    r = r_max * np.arange(1, n_r + 1) / n_r
    theta = np.linspace(0.0, 2 * math.pi, n_theta + 1)
    R, T = np.meshgrid(r, theta, indexing="ij")
    X, Y = R * np.cos(T), R * np.sin(T)
    j = eval_jet(Lam, (X, Y), order=1)
    val = np.asarray(j.value, dtype=float)
    nu = normal_from_gradient(np.asarray(j.fx, dtype=float), np.asarray(j.fy, dtype=float))
    verts = np.stack([X, Y, val], -1) - val[..., None] * nu
    return verts.reshape(-1, 3), grid_faces(n_r, n_theta + 1)


def export_congruence_obj(Lam: SurfaceSpec, path, r_max: float = 0.5, n_r: int = 100, n_theta: int = 360) -> int:
    from .inversion import write_obj

    verts, faces = congruence_mesh(Lam, r_max, n_r, n_theta)
    write_obj(path, verts, faces)
    return len(verts)
