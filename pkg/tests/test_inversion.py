from __future__ import annotations

import json
import math

import numpy as np
import pytest

from umbilics import catalog
from umbilics.catalog import Domain, expression, make_dual
from umbilics.errors import DomainError
from umbilics.inversion import (
    LEVELS,
    ad_k_uv,
    check_hatted_limits,
    check_regularity,
    duality_check,
    export_inversion_obj,
    graph_gradient,
    graph_height,
    graph_uv,
    inversion_mesh,
    invert_graph,
    printed_k_uv,
    section5_lambda,
    write_json,
)
from umbilics.ribaucour import sphere_radius
from umbilics.winding import HalfIndex, find_small_radius


def test_invert_constant_graph():
    p = invert_graph(expression("1"), (1.0, 0.0))
    assert p.xyz == pytest.approx((0.5, 0.0, 0.5), abs=1e-15)


@pytest.mark.parametrize("q", [(0.3, 0.1), (-0.05, 0.2), (0.01, -0.01)])
def test_inversion_is_sphere_inversion(q):
    f = catalog.fm(3, 0.2)
    u, v = q
    rho2 = u * u + v * v
    x, y = u / rho2, v / rho2
    F = np.array([x, y, float(f(x, y))])
    np.testing.assert_allclose(invert_graph(f, q).xyz, F / F.dot(F), rtol=1e-13)


def test_inversion_domain():
    with pytest.raises(DomainError):
        invert_graph(catalog.fm(2, 0.2), (1.2, 0.0))
    with pytest.raises(DomainError):
        invert_graph(catalog.fm(2, 0.2), (0.0, 0.0))


def test_inversion_shrinks_to_origin():
    f = catalog.bates()
    norms = [np.linalg.norm(invert_graph(f, (10.0 ** -k * 0.6, 10.0 ** -k * 0.8)).xyz) for k in range(2, 9)]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-7


def test_graph_height_constant():
    assert graph_height(expression("1"), (0.5, 0.0)) == pytest.approx(0.5, abs=1e-6)
    assert graph_height(expression("1"), (0.2, 0.0)) == pytest.approx(invert_graph(expression("1"), graph_uv(expression("1"), (0.2, 0.0))).xyz[2], abs=1e-15)


def test_graph_height_bisection_oracle():
    f = catalog.fm(3, 0.2)
    target = 1e-3

    def forward(rho):
        phi = rho * float(f.evaluate_polar(1 / rho, 0.0))
        return rho / (1 + phi * phi), rho * phi / (1 + phi * phi)

    lo, hi = 0.5e-3, 2e-3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if forward(mid)[0] < target:
            lo = mid
        else:
            hi = mid
    (x_lo, z_lo), (x_hi, z_hi) = forward(lo), forward(hi)
    z = z_lo + (target - x_lo) * (z_hi - z_lo) / (x_hi - x_lo) if x_hi != x_lo else z_lo
    assert graph_height(f, (target, 0.0)) == pytest.approx(z, abs=1e-9)


def test_forward_backward(rng):
    f = catalog.fm(3, 0.2)
    for _ in range(20):
        rho = 10 ** rng.uniform(-4, -0.5)
        t = rng.uniform(0, 2 * math.pi)
        q = (rho * math.cos(t), rho * math.sin(t))
        p = invert_graph(f, q)
        back = graph_uv(f, p.xyz[:2])
        assert back == pytest.approx(q, rel=1e-10, abs=1e-14)
        assert graph_height(f, p.xyz[:2]) == pytest.approx(p.xyz[2], rel=1e-10)


def test_z_identity(rng):
    f = catalog.bates()
    for _ in range(10):
        u, v = rng.uniform(-0.3, 0.3, 2)
        rho = math.hypot(u, v)
        x, y = u / rho ** 2, v / rho ** 2
        phi = float(f(x, y)) * rho  # f / r
        assert invert_graph(f, (u, v)).xyz[2] == pytest.approx(rho * phi / (1 + phi * phi), rel=1e-13)


def test_height_slope_tends_to_lim_f_over_r():
    f = expression("2 + 0.5*sqrt(x*x + y*y)")
    ratios = [graph_height(f, (s * 0.6, s * 0.8)) / s for s in (1e-2, 1e-4, 1e-6)]
    assert ratios[-1] == pytest.approx(0.5, abs=1e-5)
    g = catalog.fm(2, 0.2)
    ratios = [abs(graph_height(g, (s, 0.0))) / s for s in (1e-2, 1e-4, 1e-6)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1e-5


def test_dual_involution(rng):
    for f in (catalog.bates(), catalog.ghomi_howard(), catalog.fm(3, 0.2)):
        gg = make_dual(make_dual(f))
        r = rng.uniform(2, 5, 50)
        t = rng.uniform(0, 2 * math.pi, 50)
        x, y = r * np.cos(t), r * np.sin(t)
        np.testing.assert_allclose(gg.evaluate_cartesian(x, y), f.evaluate_cartesian(x, y), rtol=1e-11)


def test_gradient_against_finite_differences():
    f = catalog.fm(3, 0.2)
    X, Y, h = 0.01, 0.004, 1e-7
    z, zx, zy = graph_gradient(f, (X, Y))
    fx = (graph_height(f, (X + h, Y)) - graph_height(f, (X - h, Y))) / (2 * h)
    fy = (graph_height(f, (X, Y + h)) - graph_height(f, (X, Y - h))) / (2 * h)
    assert z == pytest.approx(graph_height(f, (X, Y)), rel=1e-12)
    assert (zx, zy) == pytest.approx((fx, fy), rel=1e-5, abs=1e-8)


@pytest.mark.parametrize("XY", [(0.01, 0.004), (-0.02, 0.03), (0.001, -0.002)])
def test_section5_lambda_is_ribaucour_lambda(XY):
    f = catalog.fm(3, 0.2)
    z, zx, zy = graph_gradient(f, XY)
    lam = section5_lambda(f, XY)
    assert lam == pytest.approx(sphere_radius(z, zx, zy), rel=1e-12)
    # independent gradient from differences of the height function
    h = 1e-6 * math.hypot(*XY)
    gx = (graph_height(f, (XY[0] + h, XY[1])) - graph_height(f, (XY[0] - h, XY[1]))) / (2 * h)
    gy = (graph_height(f, (XY[0], XY[1] + h)) - graph_height(f, (XY[0], XY[1] - h))) / (2 * h)
    assert lam == pytest.approx(sphere_radius(graph_height(f, XY), gx, gy), rel=1e-9)


# regularity


@pytest.mark.parametrize("m,a", [(1, 0.2), (3, 0.1), (6, 0.2)])
def test_fm_regularity(m, a):
    rep = check_regularity(catalog.fm(m, a), n_theta=180)
    assert rep.level == "C2projection"
    assert rep.c == pytest.approx(2 * a)
    for w in rep.witnesses:
        assert list(w.radii) == sorted(w.radii)
        assert all(math.isfinite(v) for v in w.values)


def test_bates_regularity():
    rep = check_regularity(catalog.bates(), n_theta=180)
    assert rep.level == "Differentiable"
    assert rep.passes("C0") and not rep.passes("C1")
    w = rep.witness("(b) lim f_theta/r = 0")
    assert not w.passed
    assert w.values[-1] == pytest.approx(1.0, abs=1e-3)


def test_gh_regularity():
    rep = check_regularity(catalog.ghomi_howard(), n_theta=180)
    assert rep.level == "Differentiable"
    w = rep.witness("(a) lim f_r = 0")
    assert not w.passed
    assert w.values[-1] > 0.5


def test_regularity_level_argument():
    rep = check_regularity(catalog.bates(), level="C0", n_theta=90)
    assert rep.level == "C0"
    assert {w.criterion for w in rep.witnesses} == {"f/r bounded", "|(f^2 - 2 r f f_r)/r^2| < 1"}
    with pytest.raises(ValueError):
        check_regularity(catalog.bates(), level="C7")
    assert LEVELS[0] == "Fails"


def test_regularity_json(tmp_path):
    rep = check_regularity(catalog.fm(2, 0.2), level="C1", n_theta=90)
    path = tmp_path / "rep.json"
    write_json(path, rep.as_dict())
    data = json.loads(path.read_text())
    assert data["level"] == "C1"


# hatted limits


def test_hatted_limits_constant():
    rep = check_hatted_limits(expression("1"), n_theta=90)
    for name in ("h_u", "h_v", "k_u", "k_v"):
        s = rep.sequence(name)
        assert s.decreasing
        ratios = np.asarray(s.values[:-1]) / np.asarray(s.values[1:])
        np.testing.assert_allclose(ratios, 10.0, rtol=1e-6)
    assert rep.sequence("rho^2 fhat_rho").values == (0.0,) * 6


def test_hatted_limits_fm_decay():
    rep = check_hatted_limits(catalog.fm(3, 0.2), n_theta=180)
    assert all(s.decreasing for s in rep.sequences)
    # first derivatives of h decay roughly linearly in rho, the k_uu group
    # only like rho^(1 - 2a)
    hu = rep.sequence("h_u")
    assert 8 < hu.values[-2] / hu.values[-1] < 11
    kuu = rep.sequence("rho k_uu")
    assert kuu.values[-2] / kuu.values[-1] == pytest.approx(10.0 ** 0.6, rel=0.15)


def test_printed_k_uv_matches_ad():
    f = catalog.fm(3, 0.2)
    for q in ((0.01, 0.4), (0.2, 2.0), (1e-4, 5.5)):
        assert float(printed_k_uv(f, q)) == pytest.approx(float(ad_k_uv(f, q)), rel=1e-10)
    rep = check_hatted_limits(catalog.fm(3, 0.2), n_theta=30)
    assert rep.k_uv_check["relative"] < 1e-10


# duality


@pytest.mark.filterwarnings("ignore::UserWarning")
@pytest.mark.parametrize("m", [1, 4])
def test_duality_fm(m):
    r_in = float(find_small_radius(catalog.lambda_m(m, 0.5)).radius)
    d = duality_check(catalog.fm(m, 0.5, offset=0.0), 1 / r_in, r_in)
    assert d.total == 2
    assert d.ind_infinity == HalfIndex.of(1 - m / 2)
    assert d.ind_origin == HalfIndex.of(1 + m / 2)


def test_duality_saddle():
    d = duality_check(expression("x^2 - y^2", Domain("exterior", 1.0)), 2.0, 0.5)
    assert (d.ind_infinity, d.ind_origin, d.total) == (0, 2, 2)


# export


def test_mesh_symmetry():
    verts, faces = inversion_mesh(catalog.fm(5, 0.2), rho_max=0.5, n_rho=20, n_theta=100)
    assert verts.shape == (20 * 101, 3)
    assert faces.max() < len(verts)
    grid = verts.reshape(20, 101, 3)
    c, s = math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5)
    rot = grid[:, :100] @ np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]])
    np.testing.assert_allclose(rot, np.roll(grid[:, :100], -20, axis=1), atol=1e-13)


def test_export_obj(tmp_path):
    path = tmp_path / "m.obj"
    n = export_inversion_obj(catalog.fm(3, 0.2), path, n_rho=5, n_theta=12)
    lines = path.read_text().splitlines()
    assert n == 5 * 13
    assert sum(1 for l in lines if l.startswith("v ")) == n
    assert sum(1 for l in lines if l.startswith("f ")) == 2 * 4 * 12
