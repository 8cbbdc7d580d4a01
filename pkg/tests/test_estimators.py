import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pide_schauder import ContractError, PowerLawRegressor, SchauderEstimator, fractional_laplacian


def test_power_law_regressor_exact():
    x = np.array([1.0, 0.5, 0.25, 0.125, 0.0625])
    y = 3.0 * x ** 1.7
    est = PowerLawRegressor().fit(x.reshape(-1, 1), y)
    assert est.exponent_ == pytest.approx(1.7, abs=1e-12)
    assert est.constant_ == pytest.approx(3.0)
    np.testing.assert_allclose(est.predict([[2.0]]), [3.0 * 2 ** 1.7])
    assert est.score(x.reshape(-1, 1), y) == pytest.approx(1.0)


def test_power_law_regressor_contracts():
    with pytest.raises(NotFittedError):
        PowerLawRegressor().predict([[1.0]])
    with pytest.raises(ContractError):
        PowerLawRegressor().fit([[1.0], [0.5], [0.25]], [1.0, 0.0, 0.0])
    with pytest.raises(ContractError):
        PowerLawRegressor().fit([[-1.0], [0.5], [0.25]], [1.0, 1.0, 1.0])


def test_schauder_estimator_params_and_degenerate_fit():
    k = fractional_laplacian(1, 1.3)
    est = SchauderEstimator(kernel=k, rhs=1.0, exterior=lambda x, t: np.cos(x[:, 0]),
                            alpha=0.5, i_max=2, h=2.0 ** -4)
    params = est.get_params()
    assert params["i_max"] == 2 and params["rho"] == 0.2
    assert clone(est).get_params()["h"] == 2.0 ** -4
    with pytest.raises(NotFittedError):
        est.predict([[0.0]])
    est.fit()
    assert est.corrections_.residual_norms == [0.0, 0.0, 0.0]
    assert est.decay_fit_ is None
    X = np.array([[0.0], [0.1]])
    P = est.predict(X)
    assert P[0] == pytest.approx(est.taylor_.value)
    r = est.transform(X)
    assert r.shape == (2, 1)
    # the finest scale is a separate solve on interpolated data: agreement to discretization error
    assert abs(r[0, 0]) <= 1e-3
    assert est.set_params(i_max=3).i_max == 3


def test_schauder_estimator_requires_kernel():
    with pytest.raises(ContractError):
        SchauderEstimator().fit()
