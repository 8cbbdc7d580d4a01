import math

import numpy as np
import pytest

from pide_schauder import (ContractError, anisotropic_mixture, check_hypotheses, eval_kernel,
                           fractional_laplacian, holder_modulated, rescale_kernel, user_kernel)
from pide_schauder.kernel import holder_integral, sphere_area


def test_fractional_laplacian_value():
    k = fractional_laplacian(1, 1.0)
    # (2 - 1) * 2^{-2}
    assert eval_kernel(k, [0.3], [2.0], -0.1) == pytest.approx(0.25, rel=1e-15)
    k2 = fractional_laplacian(2, 1.5, coef=2.0)
    assert eval_kernel(k2, [0, 0], [[3.0, 4.0]])[0] == pytest.approx(0.5 * 2.0 * 5 ** -3.5)


def test_holder_modulated_value():
    s, a = 1.3, 0.5
    k = holder_modulated(1, s, a, 1.0, 2.0)
    c = 1 / (2 * math.sqrt(5))
    m = 1 + min(1.0, c * (0.3 ** a + 0.1 ** (a / s)))
    assert eval_kernel(k, [0.3], [2.0], -0.1)[0] == pytest.approx((2 - s) * m * 2 ** (-1 - s))


def test_kernel_symmetric_and_singular():
    k = holder_modulated(2, 1.5, 0.4)
    y = np.array([[0.3, -0.7], [2.0, 1.0]])
    np.testing.assert_allclose(eval_kernel(k, [0.2, 0.1], y), eval_kernel(k, [0.2, 0.1], -y))
    with pytest.raises(ContractError):
        eval_kernel(k, [0.0, 0.0], [0.0, 0.0])


def test_frozen_is_translation_invariant():
    k = holder_modulated(1, 1.3, 0.5)
    k0 = k.frozen()
    assert not k.translation_invariant and k0.translation_invariant
    assert eval_kernel(k0, [3.0], [0.5], -2.0)[0] == pytest.approx(eval_kernel(k, [0.0], [0.5])[0])


def test_rescale_identity_and_contraction():
    k = holder_modulated(1, 1.3, 0.5)
    r = 0.2
    kr = rescale_kernel(k, r)
    x, y, t = np.array([[0.7]]), np.array([[1.3]]), -0.4
    expected = r ** (1 + 1.3) * eval_kernel(k, r * x, r * y, r ** 1.3 * t)
    assert eval_kernel(kr, x, y, t)[0] == pytest.approx(expected[0])
    assert kr.holder_const == pytest.approx(k.holder_const * r ** 0.5)
    assert (kr.lambda_lo, kr.lambda_hi, kr.class_tag) == (k.lambda_lo, k.lambda_hi, k.class_tag)
    k0 = fractional_laplacian(1, 0.8)
    assert eval_kernel(rescale_kernel(k0, 0.3), [0.1], [0.4])[0] == pytest.approx(
        eval_kernel(k0, [0.1], [0.4])[0])


@pytest.mark.parametrize("k", [fractional_laplacian(1, 0.5), fractional_laplacian(2, 1.2),
                               holder_modulated(1, 1.3, 0.5), holder_modulated(2, 1.5, 0.4),
                               anisotropic_mixture(1.2)])
def test_builtin_kernels_certify(k):
    rep = check_hypotheses(k, 300, seed=1)
    assert rep.passed, rep.records()
    assert rep.class_tag == "L3"
    assert len(rep.checks) == 6


def test_certification_detects_violations():
    bad = user_kernel(lambda x, y, t: 3.0 * (2 - 1.0) * np.abs(y[:, 0]) ** -2.0, 1, 1.0,
                      1.0, 2.0, "L0", translation_invariant=True)
    rep = check_hypotheses(bad, 200)
    assert not rep.passed
    assert rep["ellipticity_upper"].worst_ratio == pytest.approx(1.5)
    lopsided = user_kernel(lambda x, y, t: (1.5 + 0.5 * np.sign(y[:, 0])) * np.abs(y[:, 0]) ** -2,
                           1, 1.0, 1.0, 2.0, "L0", translation_invariant=True)
    assert not check_hypotheses(lopsided, 200)["symmetry"].passed


def test_certification_deterministic():
    k = holder_modulated(1, 1.3, 0.5)
    assert check_hypotheses(k, 100, 7).records() == check_hypotheses(k, 100, 7).records()


def test_holder_integral_closed_form():
    # g = sqrt|x|: int |K(x,y,t) - K(0,y,0)| min(|y|^2, r^2) dy
    #   = (Lambda - lambda) g(x) * 2 * (2 / sigma) r^{2 - sigma}
    s, a = 1.3, 0.5
    k = holder_modulated(1, s, a, 1.0, 2.0, g=lambda x, t: np.sqrt(np.abs(x[:, 0])), g_const=1.0)
    for r in (1.0, 0.5, 0.1):
        exact = 0.7 ** a * 2 * (2 / s) * r ** (2 - s)
        assert holder_integral(k, [0.7], 0.0, r) == pytest.approx(exact, rel=1e-6)
    assert k.holder_const == pytest.approx(sphere_area(1) * 2 / s)
    assert holder_integral(fractional_laplacian(1, 1.0), [1.0], -1.0, 0.5) == 0.0


def test_holder_integral_bounded_by_declared_constant():
    k = holder_modulated(1, 1.3, 0.5)
    for x, t, r in [(0.5, -0.2, 1.0), (0.1, 0.0, 0.3), (1.0, -1.0, 0.5)]:
        bound = k.holder_const * (abs(x) ** 0.5 + abs(t) ** (0.5 / 1.3)) * r ** (2 - 1.3)
        assert holder_integral(k, [x], t, r) <= bound * (1 + 1e-8)


def test_custom_modulation_requires_constant():
    with pytest.raises(ContractError):
        holder_modulated(1, 1.3, 0.5, g=lambda x, t: 0 * x[:, 0])
