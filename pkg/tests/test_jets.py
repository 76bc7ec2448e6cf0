from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from umbilics import catalog
from umbilics.catalog import SurfaceSpec, expression
from umbilics.errors import DomainError
from umbilics.jets import (
    PolarPoint,
    Taylor,
    eval_jet,
    eval_polar_jet,
    extended_precision,
    hat_jet,
    jet_cartesian_to_polar,
)

from conftest import central_jet


def test_polynomial_jet():
    j = eval_jet(catalog.rez3(), (1.0, 0.0))
    assert j.value == pytest.approx(1.0)
    assert j.first == pytest.approx((3.0, 0.0))
    assert j.second == pytest.approx((6.0, 0.0, -6.0))


def test_third_order_entries():
    j = eval_jet(catalog.rez3(), (0.5, -0.25), order=3)
    assert j.third == pytest.approx((6.0, 0.0, -6.0, 0.0))


def test_zero_field():
    j = eval_jet(expression("0"), (0.3, -1.7))
    assert all(e == 0 for e in j.entries())


def test_bates_against_finite_differences():
    f = catalog.bates()
    fn = lambda x, y: 2 + x * y / (math.sqrt(1 + x * x) * math.sqrt(1 + y * y))
    j = eval_jet(f, (1.0, 2.0))
    val, grad, hess = central_jet(fn, 1.0, 2.0)
    assert j.value == pytest.approx(val, rel=1e-12)
    assert j.first == pytest.approx(grad, rel=1e-6)
    assert j.second == pytest.approx(hess, rel=1e-6, abs=1e-7)


def test_vectorised_points_match_scalar():
    f = catalog.bates()
    xs = np.array([0.1, -0.7, 2.0])
    ys = np.array([1.0, 0.3, -0.4])
    j = eval_jet(f, (xs, ys))
    for k in range(3):
        s = eval_jet(f, (xs[k], ys[k]))
        assert np.asarray(j.second)[:, k] == pytest.approx(s.second, rel=1e-14)


def test_polar_conversion_cubic():
    j = eval_jet(catalog.rez2zbar(), (1.0, 0.0))
    pj = jet_cartesian_to_polar(j, (1.0, 0.0))
    assert pj.fr == pytest.approx(3.0)
    assert pj.ft == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("r,theta", [(0.4, 0.0), (1.3, 2.2), (2.0, 5.0)])
def test_polar_conversion_radial(r, theta):
    x, y = r * math.cos(theta), r * math.sin(theta)
    pj = jet_cartesian_to_polar(eval_jet(catalog.paraboloid(), (x, y)), (r, theta))
    assert pj.fr == pytest.approx(r)
    assert pj.second[0] == pytest.approx(1.0)
    assert pj.ft == pytest.approx(0.0, abs=1e-14)
    assert pj.frt == pytest.approx(0.0, abs=1e-14)
    assert pj.ftt == pytest.approx(0.0, abs=1e-14)


def test_polar_conversion_matches_closed_form():
    f = catalog.fm(5, 0.2)
    p = (2.0, 0.3)
    pj = jet_cartesian_to_polar(eval_jet(f, (2 * math.cos(0.3), 2 * math.sin(0.3))), p)
    cf = catalog.closed_form_polar_jet_g(f, p)
    np.testing.assert_allclose(pj.entries(), cf.entries(), rtol=1e-10, atol=1e-14)


def test_polar_seeding_agrees_with_conversion():
    f = catalog.lambda_m(3, 0.5)
    p = (0.35, 1.9)
    a = eval_polar_jet(f, p)
    b = jet_cartesian_to_polar(eval_jet(f, (p[0] * math.cos(p[1]), p[0] * math.sin(p[1]))), p)
    np.testing.assert_allclose(a.entries(), b.entries(), rtol=1e-10, atol=1e-15)


def test_polar_jet_rejects_origin():
    with pytest.raises(DomainError):
        eval_polar_jet(catalog.paraboloid(), (0.0, 1.0))


def test_polar_point_normalises_angle():
    assert PolarPoint.of(1.0, -math.pi / 2).theta == pytest.approx(1.5 * math.pi)


def test_hat_jet_constant():
    j = hat_jet(expression("1"), (0.5, 0.7))
    assert j.value == 1
    assert all(abs(e) < 1e-15 for e in j.entries()[1:])


def test_hat_jet_inverse_radius():
    # f = -1/r has f_r = 1/r^2
    f = expression("-1/sqrt(x*x + y*y)", catalog.Domain("punctured"))
    j = hat_jet(f, (0.5, 0.0))
    assert j.fr == pytest.approx(-1.0)


def test_hat_jet_matches_composed_expression():
    f = catalog.fm(3, 0.2)
    composed = SurfaceSpec("hat", "hat", polar=lambda rho, t: f.evaluate_polar(1 / rho, t))
    a = hat_jet(f, (0.1, 1.0))
    b = eval_polar_jet(composed, (0.1, 1.0))
    np.testing.assert_allclose(a.entries(), b.entries(), rtol=1e-9, atol=1e-12)


def test_hat_jet_domain():
    with pytest.raises(DomainError):
        hat_jet(catalog.fm(2, 0.2), (1.5, 0.0))


def test_extended_precision_backend():
    f = catalog.fm(2, 0.2)
    with extended_precision(40):
        j = eval_polar_jet(f, (mpmath.mpf(2) ** 100, mpmath.mpf("0.3")))
    assert isinstance(j.value, mpmath.mpf)
    assert float(j.value) == pytest.approx(1 + math.tanh(2 ** 20 * math.cos(0.6)))


def test_taylor_arithmetic_identities():
    x = Taylor.variable(0.3, 0, 3)
    y = Taylor.variable(-0.2, 1, 3)
    t = (x * y + 1) / (x * x + 2)
    back = t * (x * x + 2) - x * y
    assert back.value == pytest.approx(1.0)
    assert all(abs(c) < 1e-15 for c in back.c[1:])
