"""Multiscale freeze-coefficient construction of the Taylor polynomial at the origin.

Scale ``i`` works in zoomed unit coordinates ``(x, t) -> (rho^i x, rho^{i sigma} t)``
on the cylinder ``B_R x (-R^sigma, 0]`` (``R = base_radius``), with the same grid at
every scale.  At scale ``i``:

* ``u_i`` solves the genuine equation with kernel ``rescale(K, rho^i)`` and right-hand
  side ``rho^{i sigma} f(rho^i x, rho^{i sigma} t)``; its exterior and initial data are
  the previous scale's ``u_{i-1}`` read at ``(rho x, rho^sigma t)``;
* ``V_i`` solves the frozen equation (kernel ``K(0, y; 0)``, right-hand side
  ``rho^{i sigma} f(0, 0)``) with the same data, so that ``u_i - V_i`` vanishes outside
  the ball and at the initial time;
* ``e_i = sup |u_i - V_i|`` over the cylinder;
* the correction ``w_i`` (``i >= 1``) solves the frozen equation with zero right-hand
  side and the previous residual ``u_{i-1} - V_{i-1}`` as data; ``w_0 = V_0``.

Interpolation between scales is monotone cubic (PCHIP) in space and linear in time,
so ``sup |w_{i+1}| <= e_i`` follows from the discrete maximum principle.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

from ._validation import (ContractError, NEAR_INTEGER_EPS, NearIntegerWarning, as_points,
                          check_positive, near_integer)
from .kernel import rescale_kernel
from .operator import build_quadrature
from .solver import CauchyExteriorProblem, SpaceTimeSolution, solve

__all__ = [
    "SchemeConfig", "CorrectionTerm", "CorrectionSequence", "TaylorExpansion",
    "ScaleExhaustedError", "FitError", "ExponentFit", "LevelField", "freeze_kernel",
    "build_correction", "run_scheme", "solve_base", "taylor_at_origin", "fit_decay_rate",
    "origin_jet",
]


class ScaleExhaustedError(RuntimeError):
    """The next scale cannot be resolved on the scale grid."""


class FitError(ValueError):
    """Too few usable points for a power-law fit."""


@dataclass(frozen=True)
class ExponentFit:
    """Power law ``m ~ constant * s^exponent`` fitted in log-log coordinates.

    ``radii`` holds the abscissae actually used (radii, times or ``rho^i``), in
    decreasing order; ``dropped`` the ones discarded because the modulus vanished.
    """

    exponent: float
    constant: float
    fit_residual: float
    radii: tuple = ()
    values: tuple = ()
    dropped: tuple = ()
    note: str = ""

    def record(self):
        return {"exponent": self.exponent, "constant": self.constant,
                "fit_residual": self.fit_residual, "radii": list(self.radii),
                "values": list(self.values), "dropped": list(self.dropped), "note": self.note}


@dataclass
class SchemeConfig:
    """Parameters of the multiscale run.

    Parameters
    ----------
    rho : float
        Scale factor in (0, 1).
    i_max : int
        Last scale index; scales ``0 .. i_max`` are computed.
    base_radius : float
        Radius of the unit-scale ball; time depth is ``base_radius ** sigma``.
    tau : float
        Interior margin: residual sups are also reported on ``B_{tau R}``.
    derivative_step : float, optional
        Step of the central differences for origin jets; defaults to ``4 h``.
    h, dt : float
        Grid spacing and time step of every scale grid (``dt`` defaults to
        ``h^{min(sigma, 1)}``).
    rule : {"moment", "cell"}
        Quadrature rule of the scale solves.
    """

    rho: float = 0.2
    i_max: int = 3
    base_radius: float = 4.0
    tau: float = 0.5
    derivative_step: float = None
    h: float = 2.0 ** -6
    dt: float = None
    rule: str = "moment"
    pad: float = None

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ContractError("rho must lie in (0, 1)")
        if int(self.i_max) < 1:
            raise ContractError("i_max must be >= 1")
        if not 0.0 < self.tau < 1.0:
            raise ContractError("tau must lie in (0, 1)")
        check_positive("base_radius", self.base_radius)
        check_positive("h", self.h)
        self.i_max = int(self.i_max)

    @property
    def step(self):
        s = 4.0 * self.h if self.derivative_step is None else self.derivative_step
        m = int(round(s / self.h))
        if m < 1 or abs(m * self.h - s) > 1e-9 * s:
            raise ContractError("derivative_step must be a positive multiple of h")
        return m * self.h

    def time_step(self, sigma):
        return self.h ** min(sigma, 1.0) if self.dt is None else self.dt


# ---------------------------------------------------------------------------
# fields on a scale grid

class LevelField:
    """Space-time field on one scale grid, PCHIP in space and linear in time.

    Outside the grid box ``outside(points, t)`` is returned (zero when ``None``).
    """

    def __init__(self, grid, times, values, outside=None):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.outside = outside
        self._cache = {}

    def _slice_interp(self, k):
        f = self._cache.get(k)
        if f is None:
            ax = self.grid.axis
            if self.grid.dim == 1:
                f = PchipInterpolator(ax, self.values[k], extrapolate=False)
            else:
                f = RegularGridInterpolator((ax, ax), self.values[k].reshape(self.grid.shape),
                                            method="pchip")
            self._cache[k] = f
        return f

    def _eval_slice(self, k, p):
        f = self._slice_interp(k)
        return f(p[:, 0]) if self.grid.dim == 1 else f(p)

    def __call__(self, points, t):
        p = as_points(points, self.grid.dim)
        out = np.zeros(p.shape[0])
        R = self.grid.box_halfwidth
        ins = np.all(np.abs(p) <= R * (1 + 1e-12), axis=1)
        if np.any(ins):
            pi = np.clip(p[ins], -R, R)
            k = int(np.clip(np.searchsorted(self.times, t) - 1, 0, len(self.times) - 2))
            t0, t1 = self.times[k], self.times[k + 1]
            s = float(np.clip((t - t0) / (t1 - t0), 0.0, 1.0))
            v = (1 - s) * self._eval_slice(k, pi) if s < 1 else 0.0
            if s > 0:
                v = v + s * self._eval_slice(k + 1, pi)
            out[ins] = v
        if self.outside is not None and not np.all(ins):
            out[~ins] = self.outside(p[~ins], t)
        return out

    def zoomed(self, rho, sigma):
        """``(x, t) -> self(rho x, rho^sigma t)``."""
        rs = rho ** sigma
        return lambda x, t: self(rho * as_points(x, self.grid.dim), rs * t)


def origin_jet(values, grid, step):
    """Value, gradient and Hessian at the origin by second-order central differences.

    ``values`` is one flat slice on ``grid``; ``step`` is a multiple of ``h``.
    """
    m = int(round(step / grid.h))
    c = (grid.n - 1) // 2
    if c - m < 0:
        raise ContractError("derivative step exceeds the grid")
    if grid.dim == 1:
        v = values
        g = np.array([(v[c + m] - v[c - m]) / (2 * step)])
        H = np.array([[(v[c + m] + v[c - m] - 2 * v[c]) / step ** 2]])
        return float(v[c]), g, H
    V = values.reshape(grid.shape)
    g = np.array([(V[c + m, c] - V[c - m, c]) / (2 * step), (V[c, c + m] - V[c, c - m]) / (2 * step)])
    hxx = (V[c + m, c] + V[c - m, c] - 2 * V[c, c]) / step ** 2
    hyy = (V[c, c + m] + V[c, c - m] - 2 * V[c, c]) / step ** 2
    hxy = (V[c + m, c + m] - V[c + m, c - m] - V[c - m, c + m] + V[c - m, c - m]) / (4 * step ** 2)
    return float(V[c, c]), g, np.array([[hxx, hxy], [hxy, hyy]])


# ---------------------------------------------------------------------------
# data types

@dataclass
class CorrectionTerm:
    """One correction ``w_i`` in zoomed coordinates with its physical origin jet."""

    i: int
    solution: SpaceTimeSolution
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    sup: float

    def jet(self):
        return self.value, self.gradient, self.hessian


@dataclass
class CorrectionSequence:
    """Corrections ``w_i``, their origin jets and the residual norms ``e_i``."""

    rho: float
    sigma: float
    alpha: float
    terms: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    interior_norms: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    approximants: list = field(default_factory=list)
    single_solve_error: float = None
    meta: dict = field(default_factory=dict)

    @property
    def origin_jets(self):
        return [t.jet() for t in self.terms]

    @property
    def sups(self):
        return [t.sup for t in self.terms]

    def expected(self, i):
        """The reference size ``rho^{(sigma+alpha)(i+1)}``."""
        return self.rho ** ((self.sigma + self.alpha) * (i + 1))

    def residual(self, i):
        """Residual ``u_i - V_i`` on the scale-``i`` grid, shape ``(slices, nodes)``."""
        return self.levels[i].values - self.approximants[i].values

    def cascade_violation(self, tol=1e-9):
        """Largest ``sup|w_{i+1}| - e_i`` (should be <= tol)."""
        out = -np.inf
        for i in range(len(self.terms) - 1):
            out = max(out, self.terms[i + 1].sup - self.residual_norms[i])
        return out

    def records(self):
        return [{"i": t.i, "e_i": self.residual_norms[t.i], "sup_w_i": t.sup,
                 "jet_i": {"value": t.value, "gradient": t.gradient.tolist(),
                           "hessian": t.hessian.tolist()}} for t in self.terms]

    def multiscale(self):
        """View of the genuine solutions at all scales, for the regularity analysis."""
        from .regularity import MultiscaleView
        return MultiscaleView(self.levels, [self.rho ** i for i in range(len(self.levels))],
                              self.sigma)


@dataclass
class TaylorExpansion:
    """``P(x) = value + gradient . x + x^T hessian x / 2`` truncated at ``degree``."""

    degree: int
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    tail_bounds: tuple = ()
    warning: str = None

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(x.shape[0], self.value)
        if self.degree >= 1:
            out = out + x @ self.gradient
        if self.degree >= 2:
            out = out + 0.5 * np.einsum("mi,ij,mj->m", x, self.hessian, x)
        return out

    @property
    def hessian_entries(self):
        """Upper-triangular Hessian entries (present when degree is 2)."""
        if self.degree < 2:
            return ()
        n = self.hessian.shape[0]
        return tuple(self.hessian[i, j] for i in range(n) for j in range(i, n))

    def record(self):
        return {"degree": self.degree, "value": self.value,
                "gradient": self.gradient.tolist() if self.degree >= 1 else [],
                "hessian": list(self.hessian_entries), "tail_bounds": list(self.tail_bounds),
                "warning": self.warning}


# ---------------------------------------------------------------------------
# operations

def freeze_kernel(k):
    """Translation-invariant kernel ``y -> K(0, y; 0)``."""
    return k.frozen()


def _scale_problem(kernel, rhs, data, cfg, name):
    R = cfg.base_radius
    return CauchyExteriorProblem(kernel, rhs, R, -R ** kernel.sigma, 0.0, data, name=name)


def _solve_scale(p, cfg, q=None):
    return solve(p, cfg.h, cfg.time_step(p.kernel.sigma), cfg.base_radius, cfg.rule,
                 cfg.pad, quadrature=q)


def solve_base(k, f, g, cfg):
    """Genuine solution on ``B_R x (-R^sigma, 0]`` on the scale grid of ``cfg``."""
    return _solve_scale(_scale_problem(k, f, g, cfg, "genuine-0"), cfg)


def _check_capacity(i, cfg):
    nodes_across = 2.0 * cfg.base_radius * cfg.rho / cfg.h
    if nodes_across < 8:
        raise ScaleExhaustedError(
            f"scale {i}: the next ball spans only {nodes_across:.1f} grid cells")
    if cfg.rho ** i < 1e-12:
        raise ScaleExhaustedError(f"scale {i}: rho^i underflows")


def build_correction(i, residual, k, f00, cfg, quadrature=None):
    """Correction ``w_i`` in zoomed unit coordinates.

    Parameters
    ----------
    i : int
        Scale index.
    residual : callable
        ``(x, t) -> values`` in scale-``i`` coordinates: the exterior/initial data of
        the correction (the rescaled previous residual for ``i >= 1``, the data of
        ``u`` for ``i = 0``).
    k : KernelSpec
        Kernel (frozen internally).
    f00 : float
        ``f(0, 0)``; used as right-hand side (scaled by ``rho^{i sigma}``) when
        ``i = 0`` only.
    cfg : SchemeConfig

    Returns
    -------
    CorrectionTerm
    """
    if i > 0:
        _check_capacity(i, cfg)
    k0 = freeze_kernel(k)
    rhs = f00 * cfg.rho ** (i * k.sigma) if i == 0 else 0.0
    w = _solve_scale(_scale_problem(k0, rhs, residual, cfg, f"correction-{i}"), cfg, quadrature)
    v, g, H = origin_jet(w.values[-1], w.grid, cfg.step)
    s = cfg.rho ** -i
    return CorrectionTerm(i, w, v, g * s, H * s * s, float(np.max(np.abs(w.values))))


def run_scheme(u, k, f, cfg, alpha=None):
    """Run the multiscale construction on the genuine solution ``u``.

    Parameters
    ----------
    u : SpaceTimeSolution
        Genuine solution at scale 0 on the grid of ``cfg`` (see :func:`solve_base`).
    k : KernelSpec
    f : callable or float
        Right-hand side ``f(x, t)``.
    cfg : SchemeConfig
    alpha : float, optional
        Hölder exponent used for the reference rate; defaults to ``k.holder_alpha``.

    Returns
    -------
    CorrectionSequence
    """
    alpha = k.holder_alpha if alpha is None else alpha
    p0 = u.problem
    if p0 is None:
        raise ContractError("u must carry its problem (exterior data)")
    R = cfg.base_radius
    if abs(u.grid.h - cfg.h) > 1e-12 or abs(p0.domain_radius - R) > 1e-12 \
            or abs(p0.t_start + R ** k.sigma) > 1e-9 or p0.t_end != 0.0:
        raise ContractError("u must be solved on the scale-0 cylinder of cfg")
    if f is None:
        fcall = p0.f
    elif callable(f):
        fcall = f
    else:
        fcall = (lambda x, t, c=float(f): np.full(as_points(x, k.dim).shape[0], c))
    f00 = float(np.asarray(fcall(np.zeros((1, k.dim)), 0.0)).ravel()[0])
    sigma, rho = k.sigma, cfg.rho
    k0 = freeze_kernel(k)
    q0 = build_quadrature(k0, u.grid, cfg.rule, cfg.pad)

    seq = CorrectionSequence(rho, sigma, alpha)
    data = p0.g
    genuine = u
    prev_res = None
    inner = u.grid.radius() <= cfg.tau * R + 1e-12
    for i in range(cfg.i_max + 1):
        if i > 0:
            _check_capacity(i, cfg)
            prev_field = LevelField(seq.levels[-1].grid, seq.levels[-1].times,
                                    seq.levels[-1].values, seq.levels[-1].problem.g)
            data = prev_field.zoomed(rho, sigma)
            ki = rescale_kernel(k, rho ** i)
            s = rho ** i
            ss = rho ** (i * sigma)
            fi = (lambda x, t, s=s, ss=ss: ss * fcall(s * as_points(x, k.dim), ss * t))
            genuine = _solve_scale(_scale_problem(ki, fi, data, cfg, f"genuine-{i}"), cfg)
        approx = _solve_scale(_scale_problem(k0, f00 * rho ** (i * sigma), data, cfg,
                                             f"frozen-{i}"), cfg, q0)
        if i == 0:
            w = approx
            v, g, H = origin_jet(w.values[-1], w.grid, cfg.step)
            term = CorrectionTerm(0, w, v, g, H, float(np.max(np.abs(w.values))))
        else:
            term = build_correction(i, prev_res.zoomed(rho, sigma), k, 0.0, cfg, q0)
        res = genuine.values - approx.values
        seq.levels.append(genuine)
        seq.approximants.append(approx)
        seq.terms.append(term)
        seq.residual_norms.append(float(np.max(np.abs(res))))
        seq.interior_norms.append(float(np.max(np.abs(res[:, inner]))))
        prev_res = LevelField(genuine.grid, genuine.times, res, None)
    seq.meta = {"f00": f00, "h": cfg.h, "dt": genuine.dt, "rule": cfg.rule,
                "exterior_surrogate": "scale-0 exterior data of u, read through the "
                                      "coarser scales beyond each scale box"}
    return seq


def taylor_at_origin(seq, sigma, alpha, eps=NEAR_INTEGER_EPS):
    """Sum the origin jets up to degree ``floor(sigma + alpha)``.

    A :class:`NearIntegerWarning` is emitted (and recorded) when ``sigma + alpha`` is
    within ``eps`` of an integer.  ``tail_bounds[k]`` bounds the truncation of the
    order-``k`` coefficient by a geometric tail with ratio ``rho^{sigma+alpha-k}``.
    """
    order = sigma + alpha
    degree = int(math.floor(order))
    msg = None
    j = near_integer(order, eps)
    if j is not None:
        msg = (f"sigma + alpha = {order:.4f} is within {eps} of the integer {j}; "
               "the regularity constants grow like 1/|sigma + alpha - j|")
        warnings.warn(msg, NearIntegerWarning, stacklevel=2)
    jets = seq.origin_jets
    n = jets[0][1].size
    value = float(sum(v for v, _, _ in jets))
    grad = np.sum([g for _, g, _ in jets], axis=0) if degree >= 1 else np.zeros(n)
    hess = np.sum([H for _, _, H in jets], axis=0) if degree >= 2 else np.zeros((n, n))
    tails = []
    for kord in range(degree + 1):
        qr = seq.rho ** (order - kord)
        last = [abs(jets[-1][0]), np.linalg.norm(jets[-1][1]), np.linalg.norm(jets[-1][2])][kord]
        tails.append(float(last * qr / (1 - qr)) if qr < 1 else float("inf"))
    return TaylorExpansion(degree, value, grad, hess, tuple(tails), msg)


def fit_decay_rate(errors, rho):
    """Fit ``e_i ~ C rho^{exponent * i}``: slope of ``log e_i`` against ``i log(1/rho)``."""
    e = np.asarray(errors, dtype=float)
    if e.size < 3:
        raise FitError("need at least 3 residual norms")
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise FitError("residual norms must be positive and finite")
    s = np.arange(e.size) * math.log(1.0 / rho)
    slope, icpt = np.polyfit(s, np.log(e), 1)
    resid = float(np.max(np.abs(np.log(e) - (slope * s + icpt))))
    return ExponentFit(float(-slope), float(math.exp(icpt)), resid,
                       tuple(rho ** np.arange(e.size)), tuple(e.tolist()))
