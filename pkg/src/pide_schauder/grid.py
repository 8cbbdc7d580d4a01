"""Uniform grids on boxes [-R, R]^n and grid functions with an exterior extension."""

from dataclasses import dataclass
import numbers

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from ._validation import ContractError, as_points, check_dim, check_finite, check_positive


@dataclass(frozen=True)
class Grid:
    """Node-aligned uniform grid covering ``[-box_halfwidth, box_halfwidth]^dim``."""

    box_halfwidth: float
    h: float
    dim: int = 1

    def __post_init__(self):
        check_dim(self.dim)
        check_positive("h", self.h)
        check_positive("box_halfwidth", self.box_halfwidth)
        cells = 2.0 * self.box_halfwidth / self.h
        if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
            raise ContractError("2 * box_halfwidth / h must be an integer")

    @property
    def n(self):
        """Nodes per axis."""
        return int(round(2.0 * self.box_halfwidth / self.h)) + 1

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self):
        return self.n ** self.dim

    @property
    def axis(self):
        return -self.box_halfwidth + self.h * np.arange(self.n)

    @property
    def nodes(self):
        ax = self.axis
        if self.dim == 1:
            return ax[:, None]
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    def radius(self):
        return np.sqrt(np.sum(self.nodes ** 2, axis=1))

    def index_of(self, points, tol=1e-9):
        """Flat node index for grid-aligned points inside the box, -1 otherwise."""
        p = as_points(points, self.dim)
        q = (p + self.box_halfwidth) / self.h
        iq = np.rint(q).astype(np.int64)
        ok = np.all(np.abs(q - iq) <= tol, axis=1) & np.all((iq >= 0) & (iq < self.n), axis=1)
        flat = iq[:, 0] if self.dim == 1 else iq[:, 0] * self.n + iq[:, 1]
        return np.where(ok, flat, -1)

    def inside(self, points, pad=1e-12):
        p = as_points(points, self.dim)
        return np.all(np.abs(p) <= self.box_halfwidth * (1 + pad), axis=1)

    def describe(self):
        return {"dim": self.dim, "h": self.h, "box_halfwidth": self.box_halfwidth, "n": self.n}


# ---------------------------------------------------------------------------
# exterior rules

class ExteriorRule:
    """Values of a grid function outside its box."""

    kind = "abstract"
    constant_value = None  # set when the rule is a constant (enables analytic tails)

    def evaluate(self, points, gf):
        raise NotImplementedError

    def far_mean(self, gf):
        """Mean value used to close integrals beyond the far-field radius."""
        raise NotImplementedError


class ZeroExterior(ExteriorRule):
    kind = "zero"
    constant_value = 0.0

    def evaluate(self, points, gf):
        return np.zeros(len(points))

    def far_mean(self, gf):
        return 0.0


class ConstantExterior(ExteriorRule):
    kind = "constant"

    def __init__(self, c):
        self.constant_value = float(c)

    def evaluate(self, points, gf):
        return np.full(len(points), self.constant_value)

    def far_mean(self, gf):
        return self.constant_value


class PeriodicExterior(ExteriorRule):
    """Periodic extension in every coordinate.

    The period defaults to the box width ``2 * box_halfwidth``; a shorter period lets
    e.g. ``cos x`` be extended from a node-aligned box that is not a whole number of
    periods wide.  Box values on ``[-R, -R + period)`` are the ones repeated.
    """

    kind = "periodic"

    def __init__(self, period=None):
        self.period = None if period is None else check_positive("period", period)

    def period_for(self, grid):
        P = 2.0 * grid.box_halfwidth if self.period is None else self.period
        if P > 2.0 * grid.box_halfwidth * (1 + 1e-12):
            raise ContractError("period exceeds the box width")
        return P

    def evaluate(self, points, gf):
        R = gf.grid.box_halfwidth
        P = self.period_for(gf.grid)
        return gf.interpolate(np.mod(points + R, P) - R)

    def far_mean(self, gf):
        R = gf.grid.box_halfwidth
        P = self.period_for(gf.grid)
        if self.period is None:
            sl = (slice(0, -1),) * gf.grid.dim
            return float(np.mean(gf.values[sl]))
        s = -R + P * (np.arange(256) + 0.5) / 256
        if gf.grid.dim == 1:
            return float(np.mean(gf.interpolate(s)))
        X, Y = np.meshgrid(s, s, indexing="ij")
        return float(np.mean(gf.interpolate(np.stack([X.ravel(), Y.ravel()], 1))))


class CallableExterior(ExteriorRule):
    """``g(points) -> values`` for points of shape ``(m, n)``."""

    kind = "callable"

    def __init__(self, func, mean=None):
        self.func = func
        self.mean = mean

    def evaluate(self, points, gf):
        return np.asarray(self.func(points), dtype=float).reshape(len(points))

    def far_mean(self, gf):
        return self.mean


def make_exterior(rule):
    """Normalise ``'zero' | 'periodic' | number | callable | ExteriorRule``."""
    if isinstance(rule, ExteriorRule):
        return rule
    if rule is None or (isinstance(rule, str) and rule == "zero"):
        return ZeroExterior()
    if isinstance(rule, str) and rule == "periodic":
        return PeriodicExterior()
    if isinstance(rule, tuple) and rule and rule[0] == "periodic":
        return PeriodicExterior(rule[1])
    if isinstance(rule, numbers.Real):
        return ZeroExterior() if rule == 0 else ConstantExterior(rule)
    if isinstance(rule, tuple) and rule and rule[0] == "constant":
        return ConstantExterior(rule[1])
    if callable(rule):
        return CallableExterior(rule)
    raise ContractError(f"unknown exterior rule {rule!r}")


class GridFunction:
    """One time slice ``u(x_i)`` on a :class:`Grid` plus its exterior extension."""

    def __init__(self, grid, values, exterior_rule="zero"):
        self.grid = grid
        values = np.asarray(values, dtype=float)
        if values.size != grid.size:
            raise ContractError(f"expected {grid.size} values, got {values.size}")
        self.values = check_finite("values", values).reshape(grid.shape)
        self.exterior = make_exterior(exterior_rule)
        self._interp = None

    @classmethod
    def from_function(cls, grid, func, exterior_rule=None):
        """Sample ``func(points)``; the exterior defaults to ``func`` itself."""
        vals = np.asarray(func(grid.nodes), dtype=float)
        ext = CallableExterior(func) if exterior_rule is None else exterior_rule
        return cls(grid, vals, ext)

    @property
    def flat(self):
        return self.values.ravel()

    @property
    def box_halfwidth(self):
        return self.grid.box_halfwidth

    @property
    def h(self):
        return self.grid.h

    def interpolate(self, points):
        """Cubic spline interpolation of box values (points are clipped to the box)."""
        p = as_points(points, self.grid.dim)
        ax = self.grid.axis
        if self._interp is None:
            k = min(3, self.grid.n - 1)
            if self.grid.dim == 1:
                self._interp = CubicSpline(ax, self.values) if k == 3 else None
            else:
                self._interp = RectBivariateSpline(ax, ax, self.values, kx=k, ky=k)
        R = self.grid.box_halfwidth
        p = np.clip(p, -R, R)
        if self.grid.dim == 1:
            if self._interp is None:
                return np.interp(p[:, 0], ax, self.values)
            return self._interp(p[:, 0])
        return self._interp.ev(p[:, 0], p[:, 1])

    def value_at(self, points):
        """u at arbitrary points: exact at nodes, interpolated inside, exterior outside."""
        p = as_points(points, self.grid.dim)
        out = np.empty(p.shape[0])
        idx = self.grid.index_of(p)
        on = idx >= 0
        out[on] = self.flat[idx[on]]
        rest = ~on
        if np.any(rest):
            ins = rest & self.grid.inside(p)
            if np.any(ins):
                out[ins] = self.interpolate(p[ins])
            outside = rest & ~ins
            if np.any(outside):
                out[outside] = self.exterior.evaluate(p[outside], self)
        return out

    def with_values(self, values):
        return GridFunction(self.grid, values, self.exterior)


def second_difference(u, x, y):
    """``u(x+y) + u(x-y) - 2 u(x)`` with points outside the box resolved by the exterior rule."""
    x = as_points(x, u.grid.dim)
    y = as_points(y, u.grid.dim)
    return u.value_at(x + y) + u.value_at(x - y) - 2.0 * u.value_at(x)
