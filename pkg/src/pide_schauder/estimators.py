"""scikit-learn style estimators over the numerical core.

:class:`PowerLawRegressor` fits ``y ~ C x^p`` in log-log coordinates.
:class:`SchauderEstimator` runs the multiscale construction for one problem and
predicts with the resulting Taylor polynomial at the origin.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ContractError
from .regularity import power_fit
from .scheme import SchemeConfig, fit_decay_rate, run_scheme, solve_base, taylor_at_origin

__all__ = ["PowerLawRegressor", "SchauderEstimator"]


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares power law ``y = C x^p`` fitted on ``log y`` against ``log x``.

    Samples with ``y == 0`` are dropped (and listed in ``fit_.dropped``).

    Attributes
    ----------
    exponent_, constant_, fit_residual_ : float
    fit_ : ExponentFit
    """

    def fit(self, X, y):
        x = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        y = check_array(np.asarray(y, dtype=float), ensure_2d=False).reshape(-1)
        if x.shape != y.shape:
            raise ContractError("X and y must have the same length")
        if np.any(x <= 0) or np.any(y < 0):
            raise ContractError("X must be positive and y non-negative")
        fit = power_fit(x, y)
        if not np.isfinite(fit.exponent):
            raise ContractError("fewer than 3 samples with a positive target")
        self.fit_ = fit
        self.exponent_ = fit.exponent
        self.constant_ = fit.constant
        self.fit_residual_ = fit.fit_residual
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        x = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        return self.constant_ * x ** self.exponent_


class SchauderEstimator(TransformerMixin, BaseEstimator):
    """Multiscale Schauder construction for ``u_t - L u = f`` around the origin.

    Parameters
    ----------
    kernel : KernelSpec
    rhs : callable or float
        ``f(x, t)``.
    exterior : callable, float or str
        Exterior and initial data ``g(x, t)`` of the scale-0 problem.
    alpha : float, optional
        Hölder exponent of the data; defaults to ``kernel.holder_alpha``.
    rho, i_max, h, dt, base_radius, tau, derivative_step, rule
        Forwarded to :class:`~pide_schauder.scheme.SchemeConfig`.

    Attributes
    ----------
    base_solution_ : SpaceTimeSolution
    corrections_ : CorrectionSequence
    taylor_ : TaylorExpansion
    decay_fit_ : ExponentFit
    """

    def __init__(self, kernel=None, rhs=0.0, exterior=0.0, alpha=None, rho=0.2, i_max=3,
                 h=2.0 ** -6, dt=None, base_radius=4.0, tau=0.5, derivative_step=None,
                 rule="moment"):
        self.kernel = kernel
        self.rhs = rhs
        self.exterior = exterior
        self.alpha = alpha
        self.rho = rho
        self.i_max = i_max
        self.h = h
        self.dt = dt
        self.base_radius = base_radius
        self.tau = tau
        self.derivative_step = derivative_step
        self.rule = rule

    def _config(self):
        return SchemeConfig(rho=self.rho, i_max=self.i_max, base_radius=self.base_radius,
                            tau=self.tau, derivative_step=self.derivative_step, h=self.h,
                            dt=self.dt, rule=self.rule)

    def fit(self, X=None, y=None):
        """Solve at scale 0 and run every scale; ``X`` and ``y`` are ignored."""
        if self.kernel is None:
            raise ContractError("kernel is required")
        cfg = self._config()
        alpha = self.kernel.holder_alpha if self.alpha is None else self.alpha
        if alpha is None:
            raise ContractError("alpha is required for kernels without a Hölder exponent")
        self.base_solution_ = solve_base(self.kernel, self.rhs, self.exterior, cfg)
        self.corrections_ = run_scheme(self.base_solution_, self.kernel, None, cfg, alpha)
        self.taylor_ = taylor_at_origin(self.corrections_, self.kernel.sigma, alpha)
        e = self.corrections_.residual_norms
        self.decay_fit_ = fit_decay_rate(e, self.rho) if len(e) >= 3 and min(e) > 0 else None
        self.n_features_in_ = self.kernel.dim
        return self

    def predict(self, X):
        """Taylor polynomial ``P(x)`` at the points ``X`` (shape ``(m, dim)``)."""
        check_is_fitted(self, "taylor_")
        X = check_array(X, dtype=float)
        return self.taylor_(X)

    def transform(self, X):
        """Remainder ``u(x, 0) - P(x)`` read from the finest scale covering each point."""
        check_is_fitted(self, "taylor_")
        X = check_array(X, dtype=float)
        seq = self.corrections_
        r = np.sqrt(np.sum(X * X, axis=1))
        out = np.empty(X.shape[0])
        for i, u in enumerate(seq.levels):
            s = seq.rho ** i
            mask = r <= s * u.problem.domain_radius * (1 + 1e-12)
            if np.any(mask):
                out[mask] = u.evaluate(X[mask] / s, 0.0)
        out -= self.taylor_(X)
        return out.reshape(-1, 1)
