"""Radial/angular quadrature used for kernel integrals over all of R^n."""

import numpy as np
from scipy.special import roots_legendre

GL_ORDER = 16
R_INNER = 1e-8
R_OUTER = 1e3


class IntegrationError(ArithmeticError):
    """Integrand is not integrable (or the tail estimate does not converge)."""


def gauss_legendre(order):
    x, w = roots_legendre(order)
    return x, w


def panel_nodes(breaks, order=GL_ORDER):
    """Gauss-Legendre nodes/weights on consecutive panels ``[breaks[i], breaks[i+1]]``."""
    breaks = np.asarray(breaks, dtype=float)
    xg, wg = gauss_legendre(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * xg[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * wg[None, :]
    return nodes.ravel(), weights.ravel()


def log_breaks(r0, r1, per_decade=4, extra=()):
    n = max(1, int(np.ceil(per_decade * np.log10(r1 / r0))))
    br = np.geomspace(r0, r1, n + 1)
    extra = [e for e in extra if r0 < e < r1]
    return np.unique(np.concatenate([br, extra]))


def directions(dim, n_angle=64):
    """Unit directions and angular weights such that sum(w * f(e)) ~ integral over S^{n-1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    # eight sectors with Gauss-Legendre; kinks of square-related integrands sit on sector ends
    per = max(2, n_angle // 8)
    br = np.linspace(0.0, 2 * np.pi, 9)
    th, w = panel_nodes(br, per)
    return np.stack([np.cos(th), np.sin(th)], axis=1), w


def radial_integral(f, dim, r_breaks=(), n_angle=64, per_decade=4,
                    r_inner=R_INNER, r_outer=R_OUTER):
    """Integrate ``f(r, e)`` over R^n in polar coordinates.

    ``f`` receives radii of shape ``(R,)`` and directions ``(D, dim)`` and returns an
    array of shape ``(D, R)`` of integrand values (without the Jacobian ``r^{n-1}``).
    Both ends are closed with power-law extrapolation; a non-integrable end raises
    :class:`IntegrationError`.
    """
    dirs, wd = directions(dim, n_angle)
    br = log_breaks(r_inner, r_outer, per_decade, extra=r_breaks)
    r, wr = panel_nodes(br)
    jac = r ** (dim - 1)
    vals = np.asarray(f(r, dirs), dtype=float)
    body = np.sum(wd[:, None] * vals * (wr * jac)[None, :])

    # power-law closure at both ends, per direction
    probe = np.array([r_inner, 2 * r_inner, r_outer / 2, r_outer])
    pv = np.abs(np.asarray(f(probe, dirs), dtype=float)) * probe[None, :] ** (dim - 1)
    inner = _power_end(pv[:, 0], pv[:, 1], probe[0], probe[1], left=True)
    outer = _power_end(pv[:, 2], pv[:, 3], probe[2], probe[3], left=False)
    # signed closure: use the sign of the integrand at the end points
    sv = np.sign(np.asarray(f(probe, dirs), dtype=float))
    return body + np.sum(wd * (inner * sv[:, 0] + outer * sv[:, 3]))


def _power_end(f0, f1, r0, r1, left):
    out = np.zeros_like(f0)
    nz = (f0 > 0) & (f1 > 0)
    if not np.any(nz):
        return out
    p = np.log(f1[nz] / f0[nz]) / np.log(r1 / r0)
    if left:
        if np.any(p <= -1 + 1e-9):
            raise IntegrationError("integrand is not integrable at the origin")
        out[nz] = f0[nz] * r0 / (p + 1)
    else:
        if np.any(p >= -1 - 1e-9):
            raise IntegrationError("tail estimate does not converge: integrand decays too slowly")
        out[nz] = f1[nz] * r1 / (-p - 1)
    return out
