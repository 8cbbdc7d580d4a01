import math
import warnings

import numpy as np
import pytest

from pide_schauder import (ContractError, FitError, NearIntegerWarning, ScaleExhaustedError,
                           SchemeConfig, fit_decay_rate, fractional_laplacian, run_scheme,
                           solve_base, taylor_at_origin)
from pide_schauder.grid import Grid
from pide_schauder.scheme import (CorrectionSequence, CorrectionTerm, LevelField,
                                  build_correction, origin_jet)


def test_fit_decay_rate_exact_geometric():
    e = [5.0 ** (-1.8 * (i + 1)) for i in range(4)]
    fit = fit_decay_rate(e, 0.2)
    assert fit.exponent == pytest.approx(1.8, abs=1e-12)
    assert fit.constant == pytest.approx(5.0 ** -1.8)


def test_fit_decay_rate_perturbed():
    e = [5.0 ** (-1.8 * (i + 1)) for i in range(4)]
    e[2] *= 1.5
    fit = fit_decay_rate(e, 0.2)
    # oracle: least-squares slope of log e against i log 5
    s = np.arange(4) * math.log(5.0)
    slope = np.polyfit(s, np.log(e), 1)[0]
    assert fit.exponent == pytest.approx(-slope, abs=1e-12)
    assert abs(fit.exponent - 1.8) <= 0.15
    assert fit.fit_residual > 0


def test_fit_decay_rate_constant_and_errors():
    assert fit_decay_rate([0.1, 0.1, 0.1], 0.2).exponent == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(FitError):
        fit_decay_rate([0.1, 0.01], 0.2)
    with pytest.raises(FitError):
        fit_decay_rate([0.1, 0.0, 0.01], 0.2)


def _sequence(jets, rho=0.2, sigma=1.3, alpha=0.5):
    seq = CorrectionSequence(rho, sigma, alpha)
    for i, (v, g, H) in enumerate(jets):
        seq.terms.append(CorrectionTerm(i, None, v, np.atleast_1d(g), np.atleast_2d(H), abs(v)))
    return seq


def test_taylor_degrees():
    seq = _sequence([(1.0, 0.5, 0.2), (0.1, 0.05, 0.02)])
    assert taylor_at_origin(seq, 0.6, 0.3).degree == 0
    P1 = taylor_at_origin(seq, 1.3, 0.5)
    assert P1.degree == 1 and P1.value == pytest.approx(1.1)
    assert P1.gradient[0] == pytest.approx(0.55)
    assert P1(np.array([[2.0]]))[0] == pytest.approx(1.1 + 1.1)
    P2 = taylor_at_origin(seq, 1.8, 0.4)
    assert P2.degree == 2 and P2.hessian_entries == pytest.approx((0.22,))
    assert P2(np.array([[1.0]]))[0] == pytest.approx(1.1 + 0.55 + 0.11)
    # tail bound: last jet times q / (1 - q), q = rho^{sigma+alpha-k}
    assert P1.tail_bounds[0] == pytest.approx(0.1 * 0.2 ** 1.8 / (1 - 0.2 ** 1.8))
    assert P1.tail_bounds[1] == pytest.approx(0.05 * 0.2 ** 0.8 / (1 - 0.2 ** 0.8))


def test_taylor_near_integer_warning():
    seq = _sequence([(1.0, 0.0, 0.0)] * 3)
    with pytest.warns(NearIntegerWarning):
        P = taylor_at_origin(seq, 1.96, 0.07)
    assert P.warning is not None
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert taylor_at_origin(seq, 1.3, 0.5).warning is None


def test_scheme_config_validation():
    with pytest.raises(ContractError):
        SchemeConfig(rho=1.5)
    with pytest.raises(ContractError):
        SchemeConfig(i_max=0)
    with pytest.raises(ContractError):
        SchemeConfig(h=0.1, derivative_step=0.15).step
    assert SchemeConfig(h=0.25).step == 1.0


def test_origin_jet_on_quadratic():
    g = Grid(1.0, 2.0 ** -4)
    x = g.nodes[:, 0]
    v, grad, H = origin_jet(2 + 3 * x + 0.5 * 4 * x ** 2, g, 4 * g.h)
    assert v == pytest.approx(2.0) and grad[0] == pytest.approx(3.0)
    assert H[0, 0] == pytest.approx(4.0)


def test_level_field_zoom():
    g = Grid(1.0, 2.0 ** -5)
    times = np.array([-1.0, 0.0])
    vals = np.stack([np.sin(g.nodes[:, 0]), np.sin(g.nodes[:, 0]) + 1.0])
    lf = LevelField(g, times, vals, lambda p, t: np.full(len(p), 7.0))
    pts = np.array([[0.3], [5.0]])
    np.testing.assert_allclose(lf(pts, -0.5), [math.sin(0.3) + 0.5, 7.0], atol=1e-6)
    z = lf.zoomed(0.5, 1.0)
    np.testing.assert_allclose(z(np.array([[0.6]]), -1.0), [math.sin(0.3) + 0.5], atol=1e-6)


def test_scale_exhausted():
    cfg = SchemeConfig(h=0.25, base_radius=1.0, rho=0.2)
    with pytest.raises(ScaleExhaustedError):
        build_correction(1, lambda x, t: 0 * x[:, 0], fractional_laplacian(1, 1.0), 0.0, cfg)


def test_run_scheme_requires_matching_cylinder():
    k = fractional_laplacian(1, 1.3)
    cfg = SchemeConfig(h=2.0 ** -4, i_max=1)
    u = solve_base(k, 1.0, 0.0, cfg)
    with pytest.raises(ContractError):
        run_scheme(u, k, 1.0, SchemeConfig(h=2.0 ** -5, i_max=1))


def test_degenerate_small():
    k = fractional_laplacian(1, 1.3)
    cfg = SchemeConfig(h=2.0 ** -4, i_max=2)
    u = solve_base(k, 1.0, lambda x, t: np.cos(x[:, 0]), cfg)
    seq = run_scheme(u, k, 1.0, cfg, 0.5)
    assert seq.residual_norms == [0.0, 0.0, 0.0]
    assert seq.sups[1:] == [0.0, 0.0]


def test_benchmark_cascade_and_telescoping(benchmark):
    seq = benchmark.seq
    # maximum-principle cascade
    assert seq.cascade_violation() <= 1e-9
    # the residual vanishes outside the solve ball and at the initial time
    for i in range(len(seq.levels)):
        res = seq.residual(i)
        lv = seq.levels[i]
        assert np.max(np.abs(res[0])) <= 1e-12
        assert np.max(np.abs(res[:, ~lv.interior])) <= 1e-12
    # benchmark values (frozen from the reference run)
    np.testing.assert_allclose(seq.residual_norms,
                               [0.61557, 0.039513, 0.0023917, 0.00013616], rtol=1e-3)


def test_jet_step_refinement(benchmark):
    w = benchmark.seq.terms[0].solution
    g4 = origin_jet(w.values[-1], w.grid, 4 * w.grid.h)[1]
    g2 = origin_jet(w.values[-1], w.grid, 2 * w.grid.h)[1]
    g1 = origin_jet(w.values[-1], w.grid, 1 * w.grid.h)[1]
    # second-order central differences: the change shrinks about fourfold with the step
    assert abs(g2 - g1)[0] <= 0.5 * abs(g4 - g2)[0] + 1e-9
