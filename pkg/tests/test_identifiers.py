from __future__ import annotations

import math

import numpy as np
import pytest

from umbilics import catalog
from umbilics.catalog import expression
from umbilics.errors import EquiDiagonalError, UmbilicError
from umbilics.identifiers import (
    Sym2,
    cartesian_identifiers,
    fundamental_forms,
    hessian_direction,
    hessian_identifier_cartesian,
    hessian_identifier_polar,
    is_umbilic,
    polar_identifiers,
    principal_direction,
    shape_matrix_A,
    shape_matrix_B,
    umbilic_candidates,
    v_A,
)
from umbilics.jets import Jet, eval_jet, eval_polar_jet, jet_cartesian_to_polar
from umbilics.winding import circle, umbilic_index_direct


def cart(x, y):
    return x, y


def polar_xy(r, t):
    return r * math.cos(t), r * math.sin(t)


def test_rez3_identifiers():
    f = catalog.rez3()
    assert cartesian_identifiers(eval_jet(f, (0.0, 1.0))) == pytest.approx((-60.0, 0.0))
    assert cartesian_identifiers(eval_jet(f, (1.0, 0.0))) == pytest.approx((0.0, -66.0))


def test_paraboloid_identifiers(rng):
    f = catalog.paraboloid()
    x, y = rng.normal(size=(2, 10))
    d1, d2 = cartesian_identifiers(eval_jet(f, (x, y)))
    np.testing.assert_allclose(d1, -x * y, atol=1e-14)
    np.testing.assert_allclose(d2, x * x - y * y, atol=1e-14)
    assert cartesian_identifiers(eval_jet(f, (0.0, 0.0))) == (0.0, 0.0)


def test_polar_identifiers_rez2zbar():
    f = catalog.rez2zbar()
    d = polar_identifiers(eval_polar_jet(f, (0.1, math.pi / 2)))
    assert d[0] == pytest.approx(-0.002, rel=1e-12)
    assert d[1] == pytest.approx(0.0, abs=1e-15)
    d = polar_identifiers(eval_polar_jet(f, (0.1, 0.0)))
    assert d[0] == pytest.approx(0.0, abs=1e-15)
    assert d[1] == pytest.approx(-2e-3 * (2 - 9e-4), rel=1e-12)


def test_polar_identifiers_rez2zbar_closed_form(rng):
    f = catalog.rez2zbar()
    r = 0.05 + rng.random(20)
    t = 2 * math.pi * rng.random(20)
    d1, d2 = polar_identifiers(eval_polar_jet(f, (r, t)))
    np.testing.assert_allclose(d1, -2 * r ** 3 * np.sin(t), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(d2, -2 * r ** 3 * (2 - 3 * r ** 4 - 6 * r ** 4 * np.cos(2 * t)) * np.cos(t), rtol=1e-10, atol=1e-15)


def test_polar_identifiers_radial():
    for r in (0.3, 1.0, 2.5):
        d = polar_identifiers(eval_polar_jet(catalog.paraboloid(), (r, 0.4)))
        assert d[0] == pytest.approx(0.0, abs=1e-14)
        assert d[1] == pytest.approx(r ** 4, rel=1e-12)


def test_hessian_identifier_cartesian():
    g = expression("x^2 - y^2")
    assert hessian_identifier_cartesian(eval_jet(g, (0.3, -2.0))) == pytest.approx((0.0, -4.0))
    x, y = 0.4, -0.9
    assert hessian_identifier_cartesian(eval_jet(catalog.rez3(), (x, y))) == pytest.approx((-12 * y, -12 * x))


def test_hessian_identifier_polar():
    g = expression("r^2*cos(2*theta)", catalog.Domain("punctured"))
    r, t = 0.7, 0.3
    d = hessian_identifier_polar(eval_polar_jet(g, (r, t)))
    assert d == pytest.approx((-4 * r * r * math.sin(2 * t), -4 * r * r * math.cos(2 * t)))
    d = hessian_identifier_polar(eval_polar_jet(catalog.paraboloid(), (r, t)))
    assert d == pytest.approx((0.0, 0.0), abs=1e-14)


def test_hessian_routes_rotate_into_each_other():
    # delta_g is d_g rotated by -2t and scaled by r^2
    g = catalog.lambda_m(2, 0.5)
    r, t = 0.2, 0.3
    d = hessian_identifier_cartesian(eval_jet(g, polar_xy(r, t)))
    dp = hessian_identifier_polar(eval_polar_jet(g, (r, t)))
    c, s = math.cos(2 * t), math.sin(2 * t)
    rot = (r * r * (c * d[0] + s * d[1]), r * r * (-s * d[0] + c * d[1]))
    assert dp[0] == pytest.approx(rot[0], rel=1e-9)
    assert dp[1] == pytest.approx(rot[1], rel=1e-9)


def test_hessian_polar_matches_zeta():
    g = catalog.lambda_m(3, 0.5)
    p = (0.15, 2.4)
    z = catalog.closed_form_zeta(g, p)
    d = hessian_identifier_polar(eval_polar_jet(g, p))
    assert d == pytest.approx(z, rel=1e-9)


def test_shape_matrix_at_critical_point():
    j = Jet(2, "cartesian", (0, 0), 0.0, (0.0, 0.0), (2.0, 0.5, -3.0))
    A = shape_matrix_A(j)
    assert (A.a11, A.a12, A.a22) == (-3.0, -0.5, 2.0)
    A = shape_matrix_A(eval_jet(catalog.paraboloid(), (0.0, 0.0)))
    assert (A.a11, A.a12, A.a22) == (1.0, 0.0, 1.0)


def test_shape_matrix_identity(rng):
    f = catalog.bates()
    x, y = rng.uniform(-2, 2, size=(2, 50))
    j = eval_jet(f, (x, y))
    A = shape_matrix_A(j)
    fx, fy = j.first
    fxx, fxy, fyy = j.second
    h = 1 + fx * fx
    k = np.sqrt(1 + fx * fx + fy * fy)
    rhs = 2 * fx * fy / k * A.a12 + h * (-fxx * (1 + fy * fy) + h * fyy)
    np.testing.assert_allclose(A.a11 - A.a22, rhs, atol=1e-12)


def test_shape_matrix_B_radial():
    for r in (0.5, 1.2):
        B = shape_matrix_B(eval_polar_jet(catalog.paraboloid(), (r, 1.0)))
        assert B.a12 == pytest.approx(0.0, abs=1e-14)
        assert B.a11 - B.a22 == pytest.approx(r * (1 + r * r) * r ** 4, rel=1e-12)


def test_shape_matrix_B_identities():
    p = (0.1, math.pi / 4)
    j = eval_polar_jet(catalog.rez2zbar(), p)
    B = shape_matrix_B(j)
    fr, ft = j.first
    k = math.sqrt(ft * ft + p[0] ** 2 * (1 + fr * fr))
    assert -B.a12 / k == pytest.approx(polar_identifiers(j)[0], rel=1e-12)

    p = (5.0, 1.0)
    j = eval_polar_jet(catalog.fm(3, 0.2), p)
    B = shape_matrix_B(j)
    fr, ft = j.first
    d1, d2 = polar_identifiers(j)
    rhs = -2 * fr * ft * d1 + p[0] * (1 + fr * fr) * d2
    assert B.a11 - B.a22 == pytest.approx(rhs, rel=1e-9)


def test_fundamental_forms(rng):
    I, II = fundamental_forms(eval_jet(catalog.paraboloid(), (1.0, 0.0)))
    assert (I.a11, I.a12, I.a22) == (2.0, 0.0, 1.0)
    assert (II.a11, II.a12, II.a22) == (1.0, 0.0, 1.0)
    I, _ = fundamental_forms(eval_jet(catalog.bates(), (0.0, 0.0)))
    assert (I.a11, I.a12, I.a22) == (1.0, 0.0, 1.0)
    x, y = rng.uniform(-2, 2, size=(2, 20))
    j = eval_jet(catalog.ghomi_howard(), (x, y))
    I, _ = fundamental_forms(j)
    np.testing.assert_allclose(I.det, 1 + j.fx ** 2 + j.fy ** 2, rtol=1e-12)


def test_v_A():
    assert v_A(Sym2(1.0, 0.0, 1.0)) == (0.0, 0.0)
    assert v_A(Sym2(3.0, 1.0, -1.0)) == (4.0, 1.0)
    _, II = fundamental_forms(eval_jet(expression("x^2 - y^2"), (0.3, 0.1)))
    assert v_A(II) == (4.0, 0.0)


def test_principal_direction():
    assert principal_direction(eval_jet(expression("x^2/2"), (0.3, 0.8))) == pytest.approx(0.0, abs=1e-15)
    assert principal_direction(eval_jet(expression("x*y"), (0.0, 0.0))) == pytest.approx(math.pi / 4)
    with pytest.raises(UmbilicError):
        principal_direction(eval_jet(catalog.paraboloid(), (0.0, 0.0)))


def test_principal_direction_is_eigenvector(rng):
    f = catalog.bates()
    for x, y in rng.uniform(-2, 2, size=(10, 2)):
        j = eval_jet(f, (x, y))
        I, II = fundamental_forms(j)
        S = np.linalg.solve(I.matrix(), II.matrix())
        vals, vecs = np.linalg.eig(S)
        v = vecs[:, np.argmax(vals.real)].real
        a = principal_direction(j)
        assert abs(math.sin(a - math.atan2(v[1], v[0]))) < 1e-10


def test_line_field_winding_rez2zbar():
    assert umbilic_index_direct(catalog.rez2zbar(), circle(0.1)) == 0.5


def test_hessian_direction_equidiagonal():
    with pytest.raises(EquiDiagonalError):
        hessian_direction(eval_jet(catalog.paraboloid(), (0.2, 0.1)))


def test_umbilic_tests_agree(rng):
    # |d1| + |d2| small  <=>  A~ close to a multiple of the identity
    for surf in (catalog.bates(), catalog.paraboloid(), catalog.rez3(), catalog.ghomi_howard()):
        pts = rng.uniform(-1.5, 1.5, size=(2, 250))
        pts[:, :3] = 0.0
        j = eval_jet(surf, tuple(pts))
        scale = 1 + j.max_abs()
        d1, d2 = cartesian_identifiers(j)
        a = (np.abs(d1) + np.abs(d2)) < 1e-9 * scale
        b = shape_matrix_A(j).traceless_norm() < 1e-9 * scale ** 4
        assert np.array_equal(a, b)


def test_polar_cartesian_consistency(rng):
    f = catalog.ghomi_howard()
    r = 0.1 + 2 * rng.random(30)
    t = 2 * math.pi * rng.random(30)
    a = polar_identifiers(eval_polar_jet(f, (r, t)))
    b = polar_identifiers(jet_cartesian_to_polar(eval_jet(f, (r * np.cos(t), r * np.sin(t))), (r, t)))
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-13)


def test_rotation_covariance():
    alpha = math.pi / 6
    rotated = expression(f"(x*cos({alpha}) - y*sin({alpha}))^3 - 3*(x*cos({alpha}) - y*sin({alpha}))*(x*sin({alpha}) + y*cos({alpha}))^2")
    base = umbilic_candidates(catalog.rez3(), (-0.53, 0.47, -0.43, 0.57), (21, 21))
    rot = umbilic_candidates(rotated, (-0.53, 0.47, -0.43, 0.57), (21, 21))
    assert len(base.candidates) == len(rot.candidates) == 1
    c0, c1 = base.candidates[0], rot.candidates[0]
    assert c0[4] == c1[4] == -1
    for c in (c0, c1):
        assert c[0] <= 0 <= c[1] and c[2] <= 0 <= c[3]


def test_delta1_sign_structure():
    m = 3
    f = catalog.fm(m, 0.2)
    r = 2.0 ** 20
    t = np.linspace(0, 2 * math.pi, 3601)
    d1, _ = polar_identifiers(eval_polar_jet(f, (np.full_like(t, r), t)))
    mask = np.abs(np.sin(m * t)) > 1e-3
    assert np.all(np.sign(d1[mask]) == np.sign(np.sin(m * t[mask])))


def test_umbilic_scan_paraboloid():
    res = umbilic_candidates(catalog.paraboloid(), (-0.55, 0.45, -0.55, 0.45), (11, 11))
    assert len(res.candidates) == 1
    assert res.candidates[0][4] == 2
    assert res.as_dict()["grid"] == [11, 11]


def test_umbilic_scan_bates_is_empty():
    res = umbilic_candidates(catalog.bates(), (-3, 3, -3, 3), (61, 61))
    assert res.candidates == []
    assert res.d1_range[0] > 0


def test_is_umbilic_relative_tolerance():
    j = eval_jet(catalog.paraboloid(), (np.array([0.0, 1e-3]), np.array([0.0, 0.0])))
    assert list(is_umbilic(j)) == [True, False]
