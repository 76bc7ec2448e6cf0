from __future__ import annotations

import math

import numpy as np
import pytest

from umbilics import catalog
from umbilics.catalog import expression
from umbilics.errors import DomainError, UmbilicError
from umbilics.jets import eval_jet
from umbilics.ribaucour import (
    congruence_mesh,
    export_congruence_obj,
    fact_a1_residual,
    gradient_from_normal,
    invert_phi,
    lambda_hessian_chain,
    lambda_hessian_fit,
    lambda_nu,
    normal_from_gradient,
    phi_map,
    ribaucour_data,
    sphere_congruence_surface,
)

ELLIPSOIDAL = expression("(x^2 + 2*y^2)/2")


def test_flat_plane():
    d = ribaucour_data(expression("0"), (0.3, -0.2))
    assert d.lam == 0
    assert tuple(d.phi_image) == (0.3, -0.2)
    assert d.normal == (0.0, 0.0, -1.0)
    assert d.mu == 2.0


def test_critical_point_of_height_one():
    d = ribaucour_data(expression("1 + x^2 - x*y"), (0.0, 0.0))
    assert d.lam == pytest.approx(0.5)
    assert tuple(d.phi_image) == (0.0, 0.0)


def test_normalised_point_has_identity_jacobian():
    img, J, lam = phi_map(ELLIPSOIDAL, (0.0, 0.0))
    assert lam == 0
    np.testing.assert_allclose(J, np.eye(2), atol=1e-15)


def test_data_invariants(rng):
    f = catalog.bates()
    for x, y in rng.uniform(-2, 2, size=(20, 2)):
        d = ribaucour_data(f, (x, y))
        assert np.linalg.norm(d.normal) == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(normal_from_gradient(*d.grad_lambda), d.normal, atol=1e-12)
        assert 0 < d.mu <= 2


def test_gradient_of_lambda_in_new_coordinates():
    # lambda_xi, lambda_eta from the normal agree with the chain rule through Phi
    f = catalog.ghomi_howard()
    p = (0.3, -0.4)
    d = ribaucour_data(f, p)
    _, J, _ = phi_map(f, p)
    j = eval_jet(f, p)
    w = math.sqrt(1 + j.fx ** 2 + j.fy ** 2)
    h = 1e-6
    lam = lambda x, y: ribaucour_data(f, (x, y)).lam
    dl = np.array([(lam(p[0] + h, p[1]) - lam(p[0] - h, p[1])) / (2 * h), (lam(p[0], p[1] + h) - lam(p[0], p[1] - h)) / (2 * h)])
    np.testing.assert_allclose(np.linalg.solve(J.T, dl), d.grad_lambda, rtol=1e-7)
    assert w > 1


def test_normal_round_trip(rng):
    v = rng.normal(size=(1000, 3))
    v[:, 2] = -np.abs(v[:, 2])
    nu = v / np.linalg.norm(v, axis=1)[:, None]
    lx, ly = gradient_from_normal(nu)
    np.testing.assert_allclose(normal_from_gradient(lx, ly), nu, atol=1e-13)


def test_phi_inversion_round_trip():
    f = catalog.rez3()
    p = np.array([0.1, 0.02])
    img, J, _ = phi_map(f, p)
    q = invert_phi(f, np.asarray(img) + [1e-4, -2e-4], p)
    img2, _, _ = phi_map(f, q)
    assert tuple(img2) == pytest.approx((img[0] + 1e-4, img[1] - 2e-4), abs=1e-14)


@pytest.mark.parametrize("f,p", [(ELLIPSOIDAL, (0.1, 0.05)), (catalog.rez3(), (0.1, 0.02))])
@pytest.mark.parametrize("route", ["fit", "chain"])
def test_fact_a1(f, p, route):
    assert fact_a1_residual(f, p, route=route) < 1e-5


def test_fit_and_chain_hessians_agree():
    f = catalog.bates()
    p = (0.4, -0.7)
    H1, H2 = lambda_hessian_fit(f, p), lambda_hessian_chain(f, p)
    np.testing.assert_allclose(H1, H2, atol=1e-6 * np.max(np.abs(H2)))


def test_fact_a1_umbilic():
    with pytest.raises(UmbilicError):
        fact_a1_residual(catalog.paraboloid(), (0.0, 0.0))


def test_fact_a1_small_jacobian():
    # J = I + lam Hess f at a critical point, nearly singular here
    with pytest.raises(DomainError):
        fact_a1_residual(expression("1 - 0.95*x^2 + 0.3*y^2"), (0.0, 0.01))


def test_fact_a1_unknown_route():
    with pytest.raises(ValueError):
        fact_a1_residual(ELLIPSOIDAL, (0.1, 0.05), route="nope")


# sphere congruence of Lambda_m


LAM2 = catalog.lambda_m(2, 0.5)


def test_congruence_origin():
    with pytest.raises(DomainError):
        sphere_congruence_surface(LAM2, (0.0, 0.0))


def test_congruence_printed_gradient(rng):
    L = catalog.lambda_m(3, 0.5)
    for _ in range(20):
        r, t = rng.uniform(0.01, 0.5), rng.uniform(0, 2 * math.pi)
        p = (r * math.cos(t), r * math.sin(t))
        np.testing.assert_allclose(sphere_congruence_surface(L, p, "printed"), sphere_congruence_surface(L, p), rtol=1e-9, atol=1e-15)


def test_congruence_sample_point():
    P = sphere_congruence_surface(LAM2, (0.2, 0.0))
    lam = float(LAM2(0.2, 0.0))
    assert P[2] == pytest.approx(lam - lam * normal_from_gradient(*eval_jet(LAM2, (0.2, 0.0)).first)[2])


def test_lambda_nu_limits():
    for t in (0.0, 0.3, 1.7):
        vals = [np.max(np.abs(lambda_nu(LAM2, (r * math.cos(t), r * math.sin(t))))) for r in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-7


def test_congruence_tangent_plane_at_origin():
    for t in (0.0, 0.5, 2.0):
        h = 1e-6
        d = sphere_congruence_surface(LAM2, (h * math.cos(t), h * math.sin(t))) / h
        np.testing.assert_allclose(d, (math.cos(t), math.sin(t), 0.0), atol=1e-5)


def test_lambda_hessian_scaling():
    a = 0.5
    L = catalog.lambda_m(3, a)
    for t in (0.2, 1.0, 2.5):
        sups = []
        for r in (1e-2, 1e-3, 1e-4, 1e-5):
            j = eval_jet(L, (r * math.cos(t), r * math.sin(t)))
            sups.append(r ** (2 * a) * max(abs(v) for v in j.second))
        assert max(sups) < 10 * sups[0] + 10


def test_congruence_export(tmp_path):
    verts, faces = congruence_mesh(LAM2, n_r=4, n_theta=8)
    assert verts.shape == (4 * 9, 3)
    n = export_congruence_obj(LAM2, tmp_path / "p.obj", n_r=4, n_theta=8)
    assert n == 36
    assert (tmp_path / "p.obj").read_text().count("\nf ") == len(faces)
