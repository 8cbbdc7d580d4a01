"""Empirical Hölder moduli of computed solutions and their log-log power-law fits."""

from dataclasses import replace
import math

import numpy as np

from ._validation import ContractError, as_points
from .grid import GridFunction
from .scheme import ExponentFit
from .solver import SpaceTimeSolution

__all__ = [
    "ExponentFit", "MultiscaleView", "power_fit", "annular_max", "pointwise_spatial_exponent",
    "time_modulus", "uniform_spatial_norm", "guaranteed_time_exponent", "origin_derivative",
    "default_radii", "resolvable_radii",
]

# moduli below ROUNDING_FLOOR * (data magnitude) are treated as exact zeros
ROUNDING_FLOOR = 64 * np.finfo(float).eps

# a log-log fit whose worst residual exceeds this is reported as "no power law"
NO_POWER_LAW_RESIDUAL = 0.5

# 5-point central stencils (fourth order)
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def power_fit(s, m, note="", floor=0.0):
    """Least-squares fit of ``log m = log C + p log s``; moduli ``<= floor`` are dropped.

    Returns an :class:`ExponentFit`; with fewer than 3 usable points the fit is
    reported as degenerate (``exponent`` is NaN, ``constant`` 0).
    """
    s = np.asarray(s, dtype=float)
    m = np.asarray(m, dtype=float)
    order = np.argsort(-s)
    s, m = s[order], m[order]
    keep = m > floor
    dropped = tuple(s[~keep].tolist())
    if np.count_nonzero(keep) < 3:
        return ExponentFit(float("nan"), 0.0, 0.0, tuple(s[keep]), tuple(m[keep]), dropped,
                           (note + "; " if note else "") + "degenerate: modulus vanishes")
    ls, lm = np.log(s[keep]), np.log(m[keep])
    p, c = np.polyfit(ls, lm, 1)
    resid = float(np.max(np.abs(lm - (p * ls + c))))
    return ExponentFit(float(p), float(math.exp(c)), resid, tuple(s[keep].tolist()),
                       tuple(m[keep].tolist()), dropped, note)


def default_radii(r_max, r_min, ratio=0.5, count=7):
    """Geometric radii ``r_max * ratio^k`` above ``r_min`` (at most ``count``)."""
    out = [r_max * ratio ** k for k in range(count)]
    return [r for r in out if r >= r_min]


def resolvable_radii(seq, r_max=1.0, ratio=0.5):
    """Radii at which a correction sequence resolves ``u - P``.

    Below ``rho^(i_max - 1)`` the modulus is dominated by the untreated residual
    of the last level, so the radii stop there.
    """
    i_max = len(seq.terms) - 1
    return default_radii(r_max, seq.rho ** max(i_max - 1, 0), ratio, count=64)


# ---------------------------------------------------------------------------
# multiscale view of the genuine solutions

class MultiscaleView:
    """Genuine solutions at scales ``s_i`` in zoomed coordinates ``x_phys = s_i x``.

    A single :class:`SpaceTimeSolution` is the special case of one scale ``1``.
    """

    def __init__(self, levels, scales, sigma):
        if len(levels) != len(scales) or not levels:
            raise ContractError("levels and scales must be non-empty and of equal length")
        self.levels = list(levels)
        self.scales = [float(s) for s in scales]
        self.sigma = float(sigma)
        self.dim = levels[0].grid.dim

    @classmethod
    def single(cls, u, sigma=None):
        sigma = u.problem.kernel.sigma if sigma is None else sigma
        return cls([u], [1.0], sigma)

    @property
    def kernel(self):
        p = self.levels[0].problem
        return None if p is None else p.kernel

    def _reach(self, i):
        u = self.levels[i]
        R = u.grid.box_halfwidth
        if u.problem is not None:
            R = min(R, u.problem.domain_radius)
        return self.scales[i] * R

    def effective_h(self, r):
        """Spacing of the finest scale whose ball still contains radius ``r``."""
        best = None
        for i, u in enumerate(self.levels):
            if r <= self._reach(i) * (1 + 1e-12):
                best = self.scales[i] * u.grid.h
        if best is None:
            raise ContractError(f"radius {r} lies outside every scale")
        return best

    def point_cloud(self, t=0.0):
        """Physical nodes and values at time ``t``, finest available scale first."""
        pts, vals = [], []
        for i in reversed(range(len(self.levels))):
            u = self.levels[i]
            s = self.scales[i]
            k = u.index_of_time(t / s ** self.sigma)
            x = u.grid.nodes * s
            r = np.sqrt(np.sum(x * x, 1))
            mask = r <= self._reach(i) * (1 + 1e-12)
            if i < len(self.levels) - 1:
                mask &= r > self._reach(i + 1) * (1 + 1e-12)
            pts.append(x[mask])
            vals.append(u.values[k][mask])
        return np.concatenate(pts), np.concatenate(vals)

    def origin_series(self, i, j):
        """Physical times and ``nabla^j u(0, t)`` for every slice of scale ``i``."""
        u = self.levels[i]
        s = self.scales[i]
        jets = np.array([origin_derivative(u.values[k], u.grid, j) for k in range(u.n_slices)])
        return u.times * s ** self.sigma, jets * s ** (-j)

    def level_for_time(self, t, min_steps=4):
        """Finest scale whose time range contains ``t`` with ``|t| >= min_steps * dt``."""
        best = 0
        for i, u in enumerate(self.levels):
            ss = self.scales[i] ** self.sigma
            if -t <= -u.times[0] * ss * (1 + 1e-12) and -t >= min_steps * u.dt * ss:
                best = i
        return best


def _as_view(u):
    if isinstance(u, MultiscaleView):
        return u
    if isinstance(u, SpaceTimeSolution):
        return MultiscaleView.single(u)
    raise ContractError("expected a SpaceTimeSolution or a MultiscaleView")


def origin_derivative(values, grid, j):
    """``nabla^j u(0)`` from one flat slice using 5-point central stencils with step h.

    Returns a scalar for ``j = 0``, the gradient for ``j = 1`` and the Hessian
    (flattened) for ``j = 2``.
    """
    h = grid.h
    c = (grid.n - 1) // 2
    if c < 2:
        raise ContractError("grid too coarse for 5-point stencils")
    idx = np.arange(-2, 3)
    if grid.dim == 1:
        v = values[c + idx]
        if j == 0:
            return np.array([values[c]])
        if j == 1:
            return np.array([_D1 @ v / h])
        if j == 2:
            return np.array([_D2 @ v / h ** 2])
    else:
        V = values.reshape(grid.shape)
        if j == 0:
            return np.array([V[c, c]])
        if j == 1:
            return np.array([_D1 @ V[c + idx, c] / h, _D1 @ V[c, c + idx] / h])
        if j == 2:
            hxx = _D2 @ V[c + idx, c] / h ** 2
            hyy = _D2 @ V[c, c + idx] / h ** 2
            hxy = _D1 @ V[np.ix_(c + idx, c + idx)] @ _D1 / h ** 2
            return np.array([hxx, hxy, hyy])
    raise ContractError("derivative order must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# operations

def annular_max(points, values, radii):
    """``m(r) = max |values|`` over points with ``|x|`` in ``[r / sqrt 2, r]``."""
    r = np.sqrt(np.sum(points * points, axis=1))
    out = []
    for rad in radii:
        mask = (r >= rad / math.sqrt(2.0) * (1 - 1e-12)) & (r <= rad * (1 + 1e-12))
        out.append(float(np.max(np.abs(values[mask]))) if np.any(mask) else 0.0)
    return np.array(out)


def pointwise_spatial_exponent(u, P, radii, t=0.0):
    """Fit ``max_{|x| ~ r} |u(x, t) - P(x)| ~ C r^p``.

    Parameters
    ----------
    u : GridFunction, SpaceTimeSolution, MultiscaleView or (points, values)
        The slice ``t`` is used for time-dependent inputs.
    P : callable
        Polynomial (e.g. :class:`~pide_schauder.scheme.TaylorExpansion`); ``None``
        means zero.
    radii : sequence of float
        Strictly decreasing, at least 3, each at least four grid spacings.

    Returns
    -------
    ExponentFit
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3 or np.any(np.diff(radii) >= 0):
        raise ContractError("radii must be strictly decreasing with at least 3 entries")
    if isinstance(u, tuple):
        pts, vals = as_points(u[0], np.shape(u[0])[-1] if np.ndim(u[0]) > 1 else 1), \
            np.asarray(u[1], dtype=float)
        hmin = None
    elif isinstance(u, GridFunction):
        pts, vals, hmin = u.grid.nodes, u.flat, (lambda r, h=u.grid.h: h)
    else:
        view = _as_view(u)
        pts, vals = view.point_cloud(t)
        hmin = view.effective_h
    if hmin is not None:
        for r in radii:
            if r < 4 * hmin(r) * (1 - 1e-12):
                raise ContractError(f"radius {r} is below four grid spacings")
    pv = 0.0 if P is None else np.asarray(P(pts), dtype=float)
    diff = vals - pv
    m = annular_max(pts, diff, radii)
    floor = ROUNDING_FLOOR * max(float(np.max(np.abs(vals))), float(np.max(np.abs(pv))), 1e-300)
    note = "" if np.all(m > floor) else "radii with vanishing modulus dropped"
    return power_fit(radii, m, note, floor)


def guaranteed_time_exponent(j, sigma, alpha):
    """Time exponent of ``nabla^j u`` guaranteed at a C^{sigma+alpha} point."""
    if j == 0:
        return 1.0
    return (sigma + alpha - j) / sigma


def time_modulus(u, j, times, sigma=None, alpha=None):
    """Fit ``|nabla^j u(0, t) - nabla^j u(0, 0)| ~ C |t|^p`` over ``times`` (all < 0).

    For a :class:`MultiscaleView` every time is read on the finest scale resolving it,
    and both terms of the difference come from that same scale.
    """
    view = _as_view(u)
    sigma = view.sigma if sigma is None else sigma
    times = np.asarray(times, dtype=float)
    if np.any(times >= 0):
        raise ContractError("times must be negative")
    if j not in (0, 1, 2):
        raise ContractError("derivative order must be 0, 1 or 2")
    notes = []
    if alpha is not None and j > math.floor(sigma + alpha):
        raise ContractError("j exceeds floor(sigma + alpha)")
    k = view.kernel
    if j == 2 and k is not None and k.class_tag != "L3":
        notes.append("j = 2 with a kernel below L3: only some positive exponent is guaranteed")
    cache = {}
    mod = []
    scale = 0.0
    for t in times:
        i = view.level_for_time(t)
        if i not in cache:
            cache[i] = view.origin_series(i, j)
        ts, js = cache[i]
        cur = np.array([np.interp(t, ts, js[:, c]) for c in range(js.shape[1])])
        mod.append(float(np.linalg.norm(cur - js[-1])))
        lv = view.levels[i]
        scale = max(scale, float(np.max(np.abs(lv.values))) / (view.scales[i] * lv.grid.h) ** j)
    fit = power_fit(np.abs(times), np.array(mod), "; ".join(notes), ROUNDING_FLOOR * scale)
    if j >= 1 and math.isfinite(fit.exponent) and fit.fit_residual > NO_POWER_LAW_RESIDUAL:
        fit = replace(fit, note=(fit.note + "; " if fit.note else "") + "no power law")
    return fit


def _fd_derivative(V, h, order, dim):
    """Derivatives of order ``order`` on interior nodes (1D: array; 2D: list of arrays)."""
    if dim == 1:
        if order == 0:
            return [V]
        if order == 1:
            return [(V[2:] - V[:-2]) / (2 * h)]
        return [(V[2:] + V[:-2] - 2 * V[1:-1]) / h ** 2]
    if order == 0:
        return [V]
    if order == 1:
        return [(V[2:, 1:-1] - V[:-2, 1:-1]) / (2 * h), (V[1:-1, 2:] - V[1:-1, :-2]) / (2 * h)]
    hxx = (V[2:, 1:-1] + V[:-2, 1:-1] - 2 * V[1:-1, 1:-1]) / h ** 2
    hyy = (V[1:-1, 2:] + V[1:-1, :-2] - 2 * V[1:-1, 1:-1]) / h ** 2
    hxy = (V[2:, 2:] - V[2:, :-2] - V[:-2, 2:] + V[:-2, :-2]) / (4 * h * h)
    return [hxx, hxy, hyy]


def _holder_quotient(x, D, beta, max_points=400):
    """``sup |D(x) - D(z)| / |x - z|^beta`` over node pairs (``D`` is (m, c))."""
    if x.shape[0] > max_points:
        step = int(math.ceil(x.shape[0] / max_points))
        x, D = x[::step], D[::step]
    best = 0.0
    for a in range(x.shape[0] - 1):
        d = np.sqrt(np.sum((x[a + 1:] - x[a]) ** 2, axis=1))
        dv = np.sqrt(np.sum((D[a + 1:] - D[a]) ** 2, axis=1))
        best = max(best, float(np.max(dv / d ** beta)))
    return best


def uniform_spatial_norm(u, order, window, slices=None):
    """Worst Hölder quotient of ``nabla^d u`` (``d = floor(order)``) over time slices.

    Parameters
    ----------
    u : SpaceTimeSolution or GridFunction
    order : float
        Target regularity ``sigma + alpha``; the quotient uses ``order - d``.
    window : float
        Radius of the (cube) window ``|x|_inf <= window``; must keep a two-node margin.
    slices : sequence of int, optional
        Slice indices to scan (all by default).

    Returns
    -------
    float
    """
    if isinstance(u, GridFunction):
        grid, stack = u.grid, u.flat[None, :]
    else:
        grid, stack = u.grid, u.values
        if slices is not None:
            stack = stack[np.asarray(slices)]
    d = int(math.floor(order))
    beta = order - d
    if d > 2:
        raise ContractError("order must be below 3")
    if window > grid.box_halfwidth - 2 * grid.h + 1e-12:
        raise ContractError("window must keep a margin of two grid spacings")
    ax = grid.axis
    core = ax[1:-1] if d > 0 else ax
    if grid.dim == 1:
        xs = core[:, None]
    else:
        X, Y = np.meshgrid(core, core, indexing="ij")
        xs = np.stack([X.ravel(), Y.ravel()], 1)
    inwin = np.all(np.abs(xs) <= window + 1e-12, axis=1)
    best = 0.0
    for row in stack:
        V = row.reshape(grid.shape)
        Ds = _fd_derivative(V, grid.h, d, grid.dim)
        D = np.stack([np.ravel(c) for c in Ds], axis=1)[inwin]
        if beta == 0:
            best = max(best, float(np.max(np.abs(D))))
        else:
            best = max(best, _holder_quotient(xs[inwin], D, beta))
    return best
