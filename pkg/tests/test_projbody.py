import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbody.core import AffineMap, FieldError, ball_indicator, bump, field_sum, gaussian, validate_params
from fracbody.projbody import (
    QuadConfig,
    anisotropic_energy,
    build_classical_body,
    build_frac_bodies,
    build_frac_body,
    classical_gauge,
    direct_double_energy,
    frac_gauge,
    frac_gauge_signed,
    gauge_powers,
    limit_scaling_report,
    limit_volume_report,
)
from fracbody.quadrature import BoxQuad, TGrid, sphere_grid
from fracbody.starbody import StarBody, ball, ellipsoid, volume


def indicator_gauge_power(ps):
    # phi(t) = 2 min(t, 1) for chi_[0,1] in any p
    return 2 / (1 - ps) + 2 / ps


@pytest.mark.parametrize("s,p", [(0.25, 2.0), (0.1, 3.0), (0.6, 1.5), (0.45, 2.0)])
def test_interval_indicator_oracle(s, p, quad):
    params = validate_params(1, s, p)
    f = ball_indicator(1, 0.5, center=[0.5])
    sym, plus, minus = gauge_powers(f, [1.0], params, quad)
    exact = indicator_gauge_power(params.ps)
    assert sym == pytest.approx(exact, rel=1e-10)
    assert plus == pytest.approx(exact / 2, rel=1e-10)
    assert minus == pytest.approx(exact / 2, rel=1e-10)
    assert frac_gauge(f, [-2.0], params, quad) ** params.ps == pytest.approx(exact, rel=1e-10)


def test_indicator_outside_sobolev_space_rejected(quad):
    with pytest.raises(FieldError, match="not in W"):
        gauge_powers(ball_indicator(1), [1.0], validate_params(1, 0.6, 2.0, sobolev=False), quad)


def test_zero_field_rejected(quad):
    with pytest.raises(FieldError):
        gauge_powers(gaussian(1, scale=0.0), [1.0], validate_params(1, 0.25, 2.0), quad)


def test_gaussian_p2_closed_form(quad):
    # phi(t) = 2 ||f||^2 (1 - exp(-t^2/2)) with ||f||^2 = sqrt(pi/2); for ps = 1/2
    # int t^{-3/2} (1 - exp(-t^2/2)) dt = 2^{3/4} Gamma(3/4)
    from scipy.special import gamma

    params = validate_params(1, 0.25, 2.0)
    exact = 2 * math.sqrt(math.pi / 2) * 2 ** 0.75 * gamma(0.75)
    got = gauge_powers(gaussian(1), [1.0], params, quad)[0]
    assert got == pytest.approx(exact, rel=1e-6)


def test_signed_variants_and_antipodes(coarse):
    f = field_sum(bump(2, 1.0), bump(2, 0.5, center=[0.6, 0.2], scale=1.5))
    params = validate_params(2, 0.5, 2.0)
    xi = np.array([0.6, 0.8])
    sym, plus, minus = gauge_powers(f, xi, params, coarse)
    assert plus + minus == pytest.approx(sym, rel=1e-12)
    _, plus_r, minus_r = gauge_powers(f, -xi, params, coarse)
    assert plus_r == pytest.approx(minus, rel=1e-8)
    assert minus_r == pytest.approx(plus, rel=1e-8)
    assert frac_gauge_signed(f, xi, params, "+", coarse) == pytest.approx(plus ** (1 / params.ps))
    with pytest.raises(ValueError):
        frac_gauge_signed(f, xi, params, "?", coarse)


@given(lam=st.floats(0.4, 2.5))
@settings(max_examples=10, deadline=None)
def test_dilation_scaling(lam):
    # f(x / lam) has gauge^{ps} scaled by lam^{n - ps}
    quad = QuadConfig(box=BoxQuad(None, 32), tgrid=TGrid(points=60))
    params = validate_params(2, 0.5, 2.0)
    f = bump(2, 1.0, center=[0.2, 0.0])
    g = f.transformed(AffineMap(lam * np.eye(2), None))
    xi = [0.3, -0.9]
    a = gauge_powers(f, xi, params, quad)
    b = gauge_powers(g, xi, params, quad)
    np.testing.assert_allclose(b, lam ** (2 - params.ps) * a, rtol=1e-4)


def test_sl_covariance_and_translation(quad):
    # gauge^{ps} of f o phi^{-1} at xi equals gauge^{ps} of f at A^{-1} xi
    params = validate_params(2, 0.5, 2.0)
    f = field_sum(bump(2, 1.0), bump(2, 0.4, center=[0.5, 0.0]))
    A = np.array([[1.4, 0.5], [0.1, 0.75]])
    A = A / math.sqrt(np.linalg.det(A))
    g = f.transformed(AffineMap(A, [0.7, -0.3]))
    for xi in ([1.0, 0.0], [0.0, 1.0], [0.6, -0.8]):
        u = np.linalg.solve(A, xi)
        a = gauge_powers(f, u, params, quad) * np.linalg.norm(u) ** params.ps
        b = gauge_powers(g, xi, params, quad)
        np.testing.assert_allclose(b, a, rtol=3e-3)


def test_radial_field_gives_ball(quad):
    params = validate_params(2, 0.5, 2.0)
    bodies = build_frac_bodies(gaussian(2), params, sphere_grid(2, 4), quad)
    rho = bodies["sym"].body.rho
    assert np.ptp(rho) / rho.mean() < 1e-6
    np.testing.assert_allclose(bodies["plus"].body.rho, bodies["minus"].body.rho, rtol=1e-10)


def test_bodies_are_deterministic_and_threads_agree(coarse):
    from dataclasses import replace

    params = validate_params(2, 0.5, 2.0)
    f = bump(2, 1.0, center=[0.3, 0.1])
    grid = sphere_grid(2, 4)
    a = build_frac_bodies(f, params, grid, coarse)
    b = build_frac_bodies(f, params, grid, replace(coarse, threads=2))
    for v in ("sym", "plus", "minus"):
        assert np.array_equal(a[v].body.rho, b[v].body.rho)
    single = build_frac_body(f, params, grid, "plus", coarse)
    assert np.array_equal(single.body.rho, a["plus"].body.rho)
    assert a["sym"].to_csv().startswith("node,gauge,rho\r\n")
    with pytest.raises(ValueError):
        build_frac_body(f, params, grid, "both", coarse)


def test_energy_identity_with_ball_and_body_volume(coarse):
    params = validate_params(2, 0.5, 2.0)
    f = gaussian(2)
    grid = sphere_grid(2, 4)
    body = build_frac_bodies(f, params, grid, coarse)["sym"]
    e = anisotropic_energy(f, ball(grid), params, coarse, body=body)
    # for the ball, energy = integral of gauge^{ps} over the sphere
    assert e == pytest.approx(float(np.dot(grid.weights, body.gauge_powers)))
    # homogeneity in K: energy(lam K) = lam^{n+ps} energy(K)
    e2 = anisotropic_energy(f, ball(grid, 1.5), params, coarse, body=body)
    assert e2 == pytest.approx(1.5 ** (2 + params.ps) * e)


@pytest.mark.parametrize(
    "f,K",
    [
        (gaussian(1), StarBody(sphere_grid(1, 1), [1.4, 0.6])),
        (bump(1, 1.0, center=[0.3]), StarBody(sphere_grid(1, 1), [0.8, 1.1])),
        (ball_indicator(1, 1.0), StarBody(sphere_grid(1, 1), [1.0, 1.0])),
    ],
)
def test_energy_identity_1d(f, K, quad):
    params = validate_params(1, 0.25, 2.0)
    e_id = anisotropic_energy(f, K, params, quad)
    e_dir = direct_double_energy(f, K, params, quad)
    assert e_id == pytest.approx(e_dir, rel=2e-3)


@pytest.mark.slow
def test_energy_identity_2d_ellipse(quad):
    params = validate_params(2, 0.5, 2.0)
    grid = quad.grid(2)
    f = bump(2, 1.0, center=[0.3, 0.0])
    K = ellipsoid(grid, np.diag([1.3, 0.8]))
    e_id = anisotropic_energy(f, K, params, quad)
    e_dir = direct_double_energy(f, K, params, quad)
    assert e_id == pytest.approx(e_dir, rel=5e-3)


def test_classical_gauge_gaussian(quad):
    # integral of |f'|^2 for exp(-x^2) is sqrt(pi / 2)
    assert classical_gauge(gaussian(1), [1.0], 2.0, "sym", quad) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-6)
    grid = sphere_grid(2, 8)
    body = build_classical_body(gaussian(2), 2.0, grid, "sym", quad).body
    assert np.ptp(body.rho) < 1e-8


def test_limit_reports_converge(quad):
    rows = limit_scaling_report(gaussian(1), [1.0], 2.0, [0.5, 0.8, 0.95], quad)
    res = [r["residual"] for r in rows]
    assert res[0] > res[1] > res[2]
    assert res[2] / rows[-1]["classical_gauge"] < 0.15
    vol_rows = limit_volume_report(gaussian(1), 2.0, [0.6, 0.9], quad)
    assert vol_rows[1]["residual"] < vol_rows[0]["residual"]
    with pytest.raises(ValueError):
        limit_scaling_report(gaussian(1), [1.0], 2.0, [0.9, 0.5], quad)


def test_volume_positive_finite(coarse):
    params = validate_params(3, 0.5, 2.0)
    quad3 = QuadConfig(sphere_level=3, box=BoxQuad(None, 16), tgrid=TGrid(points=30))
    body = build_frac_bodies(bump(3, 1.0, center=[0.2, 0.0, 0.0]), params, quad3.grid(3), quad3)["sym"].body
    assert 0 < volume(body) < math.inf
