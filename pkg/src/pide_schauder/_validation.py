"""Small argument checks shared by the public functions and estimators."""

import numbers
import warnings

import numpy as np


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class NearIntegerWarning(UserWarning):
    """sigma + alpha is close to an integer; Schauder constants degenerate."""


NEAR_INTEGER_EPS = 0.05


def check_sigma(sigma):
    if not isinstance(sigma, numbers.Real) or not 0.0 < sigma < 2.0:
        raise ContractError(f"sigma must lie in (0, 2), got {sigma!r}")
    return float(sigma)


def check_alpha(alpha):
    if not isinstance(alpha, numbers.Real) or not 0.0 < alpha < 1.0:
        raise ContractError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def check_dim(dim):
    if dim not in (1, 2):
        raise ContractError(f"only dimensions 1 and 2 are supported, got {dim!r}")
    return int(dim)


def check_positive(name, value, strict=True):
    value = float(value)
    if not np.isfinite(value) or (value <= 0.0 if strict else value < 0.0):
        raise ContractError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value!r}")
    return value


def check_finite(name, arr):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    return arr


def as_points(x, dim):
    """Coerce ``x`` to an ``(m, dim)`` float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    if dim == 1 and x.ndim == 1:
        return x.reshape(-1, 1)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise ContractError(f"point of length {x.shape[0]} in dimension {dim}")
        return x.reshape(1, dim)
    if x.shape[-1] != dim:
        raise ContractError(f"points have trailing size {x.shape[-1]}, expected {dim}")
    return x.reshape(-1, dim)


def near_integer(order, eps=NEAR_INTEGER_EPS):
    """Return the integer ``j`` in {1, 2, 3} with ``|order - j| < eps``, else None."""
    for j in (1, 2, 3):
        if abs(order - j) < eps:
            return j
    return None


def warn_near_integer(sigma, alpha, eps=NEAR_INTEGER_EPS):
    j = near_integer(sigma + alpha, eps)
    if j is None:
        return None
    msg = (f"sigma + alpha = {sigma + alpha:.4f} is within {eps} of the integer {j}; "
           "the regularity constants grow like 1/|sigma + alpha - j|")
    warnings.warn(msg, NearIntegerWarning, stacklevel=3)
    return msg
