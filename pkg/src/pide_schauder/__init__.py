"""Linear parabolic integro-differential equations ``u_t - L u = f`` with exterior data.

Kernels in the classes L0-L3, a monotone quadrature of the nonlocal operator, an
implicit Euler solver, the multiscale freeze-coefficient construction of the Taylor
polynomial at a point, and empirical Hölder-exponent analysis.
"""

from ._validation import ContractError, NearIntegerWarning
from .grid import Grid, GridFunction, second_difference
from .kernel import (CertificationReport, KernelSpec, anisotropic_mixture, check_hypotheses,
                     eval_kernel, fractional_laplacian, holder_modulated, rescale_kernel,
                     user_kernel)
from .operator import (QuadratureTable, StarNorm, apply_L, apply_L_all, build_quadrature,
                       pucci, pucci_all, star_norm_distance)
from .solver import (CauchyExteriorProblem, NumericalError, SpaceTimeSolution, compare, solve,
                     read_snapshot, steady_residual, write_csv, write_snapshot)
from .scheme import (CorrectionSequence, CorrectionTerm, ExponentFit, FitError,
                     ScaleExhaustedError, SchemeConfig, TaylorExpansion, build_correction,
                     fit_decay_rate, run_scheme, solve_base, taylor_at_origin)
from .regularity import (MultiscaleView, pointwise_spatial_exponent, time_modulus,
                         uniform_spatial_norm)
from .estimators import PowerLawRegressor, SchauderEstimator

__version__ = "0.1.0"

__all__ = [
    "ContractError", "NearIntegerWarning", "Grid", "GridFunction", "second_difference",
    "CertificationReport", "KernelSpec", "anisotropic_mixture", "check_hypotheses",
    "eval_kernel", "fractional_laplacian", "holder_modulated", "rescale_kernel", "user_kernel",
    "QuadratureTable", "StarNorm", "apply_L", "apply_L_all", "build_quadrature", "pucci",
    "pucci_all", "star_norm_distance", "CauchyExteriorProblem", "NumericalError",
    "SpaceTimeSolution", "compare", "solve", "read_snapshot", "steady_residual", "write_csv",
    "write_snapshot", "CorrectionSequence", "CorrectionTerm", "ExponentFit", "FitError",
    "ScaleExhaustedError", "SchemeConfig", "TaylorExpansion", "build_correction",
    "fit_decay_rate", "run_scheme", "solve_base", "taylor_at_origin", "MultiscaleView",
    "pointwise_spatial_exponent", "time_modulus", "uniform_spatial_norm", "PowerLawRegressor",
    "SchauderEstimator",
]
