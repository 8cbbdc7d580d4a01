import math

import numpy as np
import pytest

from pide_schauder import (CauchyExteriorProblem, ContractError, Grid, GridFunction,
                           fractional_laplacian, holder_modulated, pointwise_spatial_exponent,
                           solve, time_modulus, uniform_spatial_norm)
from pide_schauder.regularity import (MultiscaleView, annular_max, default_radii,
                                      guaranteed_time_exponent, origin_derivative, power_fit)
from pide_schauder.scheme import TaylorExpansion


def power_function(p, h=2.0 ** -9):
    g = Grid(1.0, h)
    return GridFunction(g, np.abs(g.nodes[:, 0]) ** p)


@pytest.mark.parametrize("p", [1.3, 1.8, 2.3])
def test_synthetic_power_exponent(p):
    fit = pointwise_spatial_exponent(power_function(p), None, [2.0 ** -j for j in range(2, 7)])
    assert fit.exponent == pytest.approx(p, abs=0.02)
    assert fit.constant == pytest.approx(1.0, rel=0.05)


def test_monotone_slack():
    for p in (1.3, 2.3):
        radii = [2.0 ** -j for j in range(2, 8)]
        full = pointwise_spatial_exponent(power_function(p), None, radii)
        short = pointwise_spatial_exponent(power_function(p), None, radii[:-1])
        assert abs(full.exponent - short.exponent) <= 2 * full.fit_residual + 1e-12


def test_polynomial_is_degenerate():
    g = Grid(1.0, 2.0 ** -6)
    u = GridFunction(g, 1.0 + 0.5 * g.nodes[:, 0])
    P = TaylorExpansion(1, 1.0, np.array([0.5]), np.zeros((1, 1)))
    fit = pointwise_spatial_exponent(u, P, [0.5, 0.25, 0.125])
    assert math.isnan(fit.exponent) and "degenerate" in fit.note
    assert fit.dropped == (0.5, 0.25, 0.125)


def test_radii_contract():
    u = power_function(2.0, h=2.0 ** -4)
    with pytest.raises(ContractError):
        pointwise_spatial_exponent(u, None, [0.5, 0.25, 0.125])  # 0.125 < 4h
    with pytest.raises(ContractError):
        pointwise_spatial_exponent(u, None, [0.5, 1.0, 0.25])


def test_power_fit_and_annulus():
    pts = np.array([[0.1], [0.2], [0.3], [0.75]])
    np.testing.assert_allclose(annular_max(pts, np.array([1.0, -2.0, 3.0, 4.0]), [1.0, 0.3]),
                               [4.0, 3.0])
    fit = power_fit([1.0, 0.5, 0.25, 0.125], [2.0, 0.5, 0.125, 0.0])
    assert fit.exponent == pytest.approx(2.0) and fit.dropped == (0.125,)
    assert default_radii(1.0, 0.1) == [1.0, 0.5, 0.25, 0.125]


def test_guaranteed_exponents():
    assert guaranteed_time_exponent(0, 1.3, 0.5) == 1.0
    assert guaranteed_time_exponent(1, 1.3, 0.5) == pytest.approx(0.8 / 1.3)
    assert guaranteed_time_exponent(2, 1.8, 0.4) == pytest.approx(0.2 / 1.8)


def test_origin_derivative_stencils():
    g = Grid(1.0, 2.0 ** -4)
    x = g.nodes[:, 0]
    v = x ** 4 - x ** 3 + 2 * x
    assert origin_derivative(v, g, 1)[0] == pytest.approx(2.0, abs=1e-12)
    assert origin_derivative(v, g, 2)[0] == pytest.approx(0.0, abs=1e-10)
    g2 = Grid(1.0, 0.125, 2)
    X = g2.nodes
    H = origin_derivative(X[:, 0] * X[:, 1] + X[:, 1] ** 2, g2, 2)
    np.testing.assert_allclose(H, [0.0, 1.0, 2.0], atol=1e-10)


def exact_mode_solution(dt=1e-4):
    def ex(x, t):
        return np.exp(-2 * np.pi * (t + 1)) * np.cos(np.atleast_2d(x)[:, 0])
    p = CauchyExteriorProblem(fractional_laplacian(1, 1.0), 0.0, 2.0, -0.25, 0.0, ex)
    return solve(p, 2.0 ** -5, dt)


def test_time_modulus_exact_mode():
    u = exact_mode_solution()
    fit = time_modulus(u, 0, [-(2.0 ** -j) for j in range(6, 12)])
    assert fit.exponent == pytest.approx(1.0, abs=0.05)
    # constant: |d/dt u(0, t)| at t = 0 is 2 pi exp(-2 pi)
    assert fit.constant == pytest.approx(2 * math.pi * math.exp(-2 * math.pi), rel=0.15)


def test_time_modulus_steady_is_degenerate():
    p = CauchyExteriorProblem(holder_modulated(1, 1.3, 0.5), 0.0, 1.0, -1.0, 0.0, 2.0)
    u = solve(p, 2.0 ** -4)
    fit = time_modulus(u, 1, [-0.5, -0.25, -0.125])
    assert math.isnan(fit.exponent)


def test_time_modulus_contracts():
    u = exact_mode_solution(dt=1e-2)
    with pytest.raises(ContractError):
        time_modulus(u, 0, [0.1, -0.1, -0.2])
    with pytest.raises(ContractError):
        time_modulus(u, 2, [-0.2, -0.1, -0.05], sigma=1.0, alpha=0.5)
    fit = time_modulus(u, 2, [-0.2, -0.1, -0.05])
    assert fit.note == ""  # fractional Laplacian is L3: no flag


def test_uniform_norm_affine_zero():
    g = Grid(1.5, 2.0 ** -5)
    u = GridFunction(g, 3.0 - 2.0 * g.nodes[:, 0])
    assert uniform_spatial_norm(u, 1.8, 1.0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ContractError):
        uniform_spatial_norm(u, 1.8, 1.5)


def test_uniform_norm_refinement_stable():
    def smoothed(h):
        g = Grid(1.5, h)
        x = g.nodes[:, 0]
        return GridFunction(g, np.abs(x) ** 1.8 * np.exp(-np.maximum(np.abs(x) - 1, 0) ** 2))
    a = uniform_spatial_norm(smoothed(2.0 ** -6), 1.8, 1.0)
    b = uniform_spatial_norm(smoothed(2.0 ** -7), 1.8, 1.0)
    assert 0.8 <= a / b <= 1.25
    # Hölder-0.8 quotient of 1.8 |x|^0.8 sign x, attained at x = -z: 3.6 / 2^0.8
    assert b == pytest.approx(3.6 / 2 ** 0.8, rel=0.05)


def test_multiscale_view_single():
    u = exact_mode_solution(dt=1e-2)
    v = MultiscaleView.single(u)
    pts, vals = v.point_cloud(0.0)
    assert pts.shape[0] == vals.shape[0] > 0
    assert v.effective_h(1.0) == u.grid.h
    with pytest.raises(ContractError):
        v.effective_h(10.0)


def test_benchmark_regularity(benchmark):
    from pide_schauder.regularity import resolvable_radii
    sp = pointwise_spatial_exponent(benchmark.view, benchmark.taylor,
                                    resolvable_radii(benchmark.seq))
    assert sp.exponent >= benchmark.sigma + benchmark.alpha - 0.2
    fit0 = time_modulus(benchmark.view, 0, [-(2.0 ** -j) for j in range(-1, 9)])
    assert fit0.exponent >= 1.0 - 0.2


def test_time_modulus_flags_no_power_law():
    from dataclasses import replace
    u = exact_mode_solution(dt=1e-3)
    t = np.minimum(u.times, -1e-12)
    s = np.abs(t) * (1 + 0.9 * np.sin(3 * np.log(np.abs(t))))
    s[-1] = 0.0
    osc = replace(u, values=s[:, None] * u.grid.nodes[None, :, 0])
    fit = time_modulus(osc, 1, [-(2.0 ** -j) for j in range(3, 8)])
    assert math.isfinite(fit.exponent)
    assert "no power law" in fit.note
