"""Grid discretization of ``Lu(x) = int (u(x+y) + u(x-y) - 2u(x)) K(x, y; t) dy``.

Every grid offset ``y_j`` inside a square of half-width ``H`` carries a nonnegative
pair weight ``W_j``, so that

    Lu(x_i) ~ sum_j W_ij (u(x_i + y_j) + u(x_i - y_j) - 2 u(x_i)) + far(x_i),

where only one offset of each pair ``+-y_j`` is stored.  ``H`` covers every box node
from every other box node (plus an optional pad), the cell around ``y = 0`` is folded
onto the nearest-neighbour second differences, and the region ``|y|_inf > H`` is
handled according to the exterior rule of the grid function (analytic mass for
constant exteriors, radial quadrature otherwise).

Two cell rules are provided:

``"cell"``
    ``W_j = 2 int_{cell_j} K``; first-order accurate in the cell size, error
    ``O(h^{2-sigma})`` on smooth functions.
``"moment"``
    ``W_j = 2 int_{cell_j} |y|^2 K / |y_j|^2``; reproduces all second moments, so the
    error is dominated by higher-order terms.  Used by the multiscale scheme.
"""

from collections import namedtuple

import numpy as np

from ._quad import gauss_legendre, log_breaks, panel_nodes
from ._validation import ContractError, as_points, check_positive
from .grid import Grid, GridFunction, PeriodicExterior, second_difference
from .kernel import eval_kernel, sphere_area

__all__ = [
    "QuadratureTable", "build_quadrature", "apply_L", "apply_L_all", "pucci",
    "pucci_all", "star_norm_distance", "StarNorm", "Cylinder", "cosine_probes",
    "second_difference", "R_FAR",
]

R_FAR = 1e3
R_FAR_PERIODIC = 1e4
RULES = ("cell", "moment")

Cylinder = namedtuple("Cylinder", ["radius", "depth"])


# ---------------------------------------------------------------------------
# geometry helpers

def _square_radius(theta, H):
    """Distance from 0 to the boundary of the square of half-width H along angle theta."""
    return H / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))


def _half_angles(order=16):
    """Angles in [0, pi) split at the square's corners, with GL weights."""
    return panel_nodes(np.linspace(0.0, np.pi, 5), order)


def _half_offsets(J, dim):
    """Integer offsets in the square ``|j|_inf <= J``, one representative per +-pair."""
    if dim == 1:
        return np.arange(1, J + 1)[:, None]
    a = np.arange(-J, J + 1)
    A, B = np.meshgrid(a, a, indexing="ij")
    off = np.stack([A.ravel(), B.ravel()], axis=1)
    keep = (off[:, 0] > 0) | ((off[:, 0] == 0) & (off[:, 1] > 0))
    return off[keep]


def _power_cell_weights_1d(J, h, sigma, rule):
    j = np.arange(1, J + 1, dtype=float)
    lo, hi = (j - 0.5) * h, (j + 0.5) * h
    if rule == "cell":
        w = (2 - sigma) / sigma * (lo ** -sigma - hi ** -sigma)
    else:
        w = (hi ** (2 - sigma) - lo ** (2 - sigma)) / (j * h) ** 2
    w = 2.0 * w
    # folded singular cell: int_{|y|<h/2} y^2 K = 2 (h/2)^{2-sigma}
    w[0] += 2.0 * (0.5 * h) ** (2 - sigma) / h ** 2
    return w


def _cell_nodes_2d(offsets, h, order=6, refine_within=3, sub=4):
    """Tensor GL nodes over the cells of ``offsets`` (refined near the origin).

    Returns ``(cell_index, points, weights)`` with points in physical units.
    """
    xg, wg = gauss_legendre(order)
    near = np.max(np.abs(offsets), axis=1) <= refine_within
    idx, pts, wts = [], [], []
    for mask, s in ((~near, 1), (near, sub)):
        if not np.any(mask):
            continue
        # sub-cell centres relative to the cell centre, in units of h
        c = (np.arange(s) + 0.5) / s - 0.5
        lx = (c[:, None] + xg[None, :] / (2 * s)).ravel()
        lw = np.tile(wg / (2 * s), s)
        LX, LY = np.meshgrid(lx, lx, indexing="ij")
        LW = np.outer(lw, lw).ravel()
        loc = np.stack([LX.ravel(), LY.ravel()], axis=1)
        cells = np.nonzero(mask)[0]
        P = (offsets[cells][:, None, :] + loc[None, :, :]) * h
        idx.append(np.repeat(cells, loc.shape[0]))
        pts.append(P.reshape(-1, 2))
        wts.append(np.tile(LW * h * h, cells.size))
    return np.concatenate(idx), np.concatenate(pts), np.concatenate(wts)


def _shape_2d(sigma, angular):
    """``(2-sigma) a(e) |y|^{-2-sigma}`` for points ``(m, 2)``."""
    def f(y):
        r = np.sqrt(np.sum(y * y, axis=1))
        a = np.ones(r.size) if angular is None else angular(y / r[:, None])
        return (2 - sigma) * a * r ** (-2 - sigma)
    return f


def _power_cell_weights_2d(offsets, h, sigma, rule, angular):
    f = _shape_2d(sigma, angular)
    ci, pts, wts = _cell_nodes_2d(offsets, h)
    vals = f(pts)
    if rule == "moment":
        vals = vals * np.sum(pts * pts, axis=1)
    w = np.bincount(ci, weights=wts * vals, minlength=offsets.shape[0])
    if rule == "moment":
        w = w / (np.sum(offsets.astype(float) ** 2, axis=1) * h * h)
    w = 2.0 * w
    # folded singular cell: M_kk = int a(theta) e_k^2 r0(theta)^{2-sigma} dtheta over S^1
    th, wt = panel_nodes(np.linspace(0.0, 2 * np.pi, 9), 16)
    e = np.stack([np.cos(th), np.sin(th)], axis=1)
    a = np.ones(th.size) if angular is None else angular(e)
    r0 = _square_radius(th, 0.5 * h)
    for k in range(2):
        Mkk = np.sum(wt * a * e[:, k] ** 2 * r0 ** (2 - sigma))
        unit = np.zeros(2, dtype=int)
        unit[k] = 1
        pos = np.nonzero(np.all(offsets == unit, axis=1))[0][0]
        w[pos] += Mkk / h ** 2
    return w


def _far_mass(dim, sigma, H, angular, R=np.inf):
    """``int_{|y|_inf > H, |y| < R} (2-sigma) a(e) |y|^{-n-sigma}``; R must exceed sqrt(2) H."""
    if dim == 1:
        a = 1.0 if angular is None else float(angular(np.array([[1.0]]))[0])
        tail = 0.0 if np.isinf(R) else R ** -sigma
        return 2.0 * a * (2 - sigma) / sigma * (H ** -sigma - tail)
    th, wt = panel_nodes(np.linspace(0.0, 2 * np.pi, 9), 16)
    e = np.stack([np.cos(th), np.sin(th)], axis=1)
    a = np.ones(th.size) if angular is None else angular(e)
    r0 = _square_radius(th, H)
    tail = 0.0 if np.isinf(R) else R ** -sigma
    return float(np.sum(wt * a * (2 - sigma) / sigma * (r0 ** -sigma - tail)))


def _far_nodes(dim, H, r_far, periodic_width=None, per_decade=4, order=8, n_theta=8):
    """Half-space polar nodes ``y_q`` on ``H <= |y|_inf, |y| <= r_far`` with weights.

    ``sum_q w_q (F(y_q) + F(-y_q))`` approximates the integral of ``F`` over the region.
    """
    def radial(r0):
        if periodic_width is None:
            br = log_breaks(r0, r_far, per_decade)
        else:
            npan = int(np.ceil((r_far - r0) / periodic_width))
            br = np.linspace(r0, r_far, npan + 1)
        return panel_nodes(br, order)

    if dim == 1:
        r, w = radial(H)
        return r[:, None], w
    th, wt = _half_angles(n_theta)
    ys, ws = [], []
    for t, a in zip(th, wt):
        r, w = radial(_square_radius(t, H))
        ys.append(np.stack([r * np.cos(t), r * np.sin(t)], axis=1))
        ws.append(a * w * r)
    return np.concatenate(ys), np.concatenate(ws)


def _beyond_mass_pow(dim, sigma, R):
    return sphere_area(dim) * (2 - sigma) / sigma * R ** -sigma


# ---------------------------------------------------------------------------
# quadrature table

class QuadratureTable:
    """Precomputed pair weights of ``L`` for one kernel on one grid.

    Parameters
    ----------
    k : KernelSpec
    grid : Grid
    rule : {"cell", "moment"}
    pad : float, optional
        Extra length covered by explicit offsets beyond ``2 * box_halfwidth``.
        Defaults to 4 in one dimension and 0 in two.

    Attributes
    ----------
    offsets : ndarray (J, n) of int
        One representative offset of each pair.
    shape_weights : ndarray (J,)
        Pair weights of ``(2-sigma) a(e) |y|^{-n-sigma}`` (power-type kernels).
    power_weights : ndarray (J,)
        Pair weights of the pure envelope ``(2-sigma) |y|^{-n-sigma}``; used by Pucci.
    tail_coefficient : float
        Envelope mass of ``|y|_inf > H``.
    central_correction : float
        Mass ``int_{|y|<h/2} |y|^2 K`` folded onto the nearest neighbours (envelope).
    """

    def __init__(self, k, grid, rule="cell", pad=None):
        if rule not in RULES:
            raise ContractError(f"rule must be one of {RULES}")
        if grid.dim != k.dim:
            raise ContractError("kernel and grid dimensions differ")
        self.kernel = k
        self.grid = grid
        self.rule = rule
        self.sigma = k.sigma
        self.dim = k.dim
        h, n = grid.h, grid.n
        pad = (4.0 if k.dim == 1 else 0.0) if pad is None else check_positive("pad", pad, strict=False)
        self.pad = pad
        self.J = (n - 1) + int(np.ceil(pad / h - 1e-9))
        self.H = (self.J + 0.5) * h
        self.offsets = _half_offsets(self.J, k.dim)
        angular = getattr(k.form, "angular", None) if k.power_type else None
        if k.dim == 1:
            self.power_weights = _power_cell_weights_1d(self.J, h, k.sigma, rule)
            a = 1.0 if angular is None else float(angular(np.array([[1.0]]))[0])
            self.shape_weights = a * self.power_weights
        else:
            self.power_weights = _power_cell_weights_2d(self.offsets, h, k.sigma, rule, None)
            self.shape_weights = (self.power_weights if angular is None else
                                  _power_cell_weights_2d(self.offsets, h, k.sigma, rule, angular))
        self._angular = angular
        self.tail_coefficient = _far_mass(k.dim, k.sigma, self.H, None)
        self.shape_far_mass = _far_mass(k.dim, k.sigma, self.H, angular)
        self.central_correction = (2.0 * (0.5 * h) ** (2 - k.sigma) if k.dim == 1 else
                                   float(self.power_weights[self._unit_positions()[0]]))
        self.ring_weights = self.shape_weights

        # extended grid: box plus J nodes on every side
        self.n_ext = n + 2 * self.J
        ax = -grid.box_halfwidth - self.J * h + h * np.arange(self.n_ext)
        self.ext_axis = ax
        if k.dim == 1:
            self.ext_nodes = ax[:, None]
            box_ext = np.arange(n) + self.J
        else:
            X, Y = np.meshgrid(ax, ax, indexing="ij")
            self.ext_nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
            I, Jj = np.meshgrid(np.arange(n) + self.J, np.arange(n) + self.J, indexing="ij")
            box_ext = (I * self.n_ext + Jj).ravel()
        self.box_ext = box_ext
        in_box = np.zeros(self.ext_nodes.shape[0], dtype=bool)
        in_box[box_ext] = True
        self.off_ext = np.nonzero(~in_box)[0]
        stride = 1 if k.dim == 1 else self.n_ext
        lin = self.offsets[:, 0] if k.dim == 1 else self.offsets[:, 0] * stride + self.offsets[:, 1]
        self.idx_plus = box_ext[:, None] + lin[None, :]
        self.idx_minus = box_ext[:, None] - lin[None, :]
        self._far_cache = {}
        self._user_cache = {}

    # -- bookkeeping --------------------------------------------------------
    def _unit_positions(self):
        if self.dim == 1:
            return [0]
        return [int(np.nonzero(np.all(self.offsets == u, axis=1))[0][0])
                for u in (np.array([1, 0]), np.array([0, 1]))]

    def matches(self, k, grid):
        return (grid == self.grid and k.dim == self.kernel.dim and k.sigma == self.sigma
                and k.form is self.kernel.form)

    def check(self, k, grid):
        if not self.matches(k, grid):
            raise ContractError("quadrature table was built for a different kernel or grid")

    @property
    def N(self):
        return self.grid.size

    # -- kernel weights -----------------------------------------------------
    def node_weights(self, t, nodes=None):
        """Pair weights ``W`` of shape ``(m, J)`` and far masses ``(m,)`` at time ``t``."""
        k = self.kernel
        X = self.grid.nodes if nodes is None else self.grid.nodes[nodes]
        if k.power_type:
            m = k.form.modulation(X, np.full(X.shape[0], float(t)), k.sigma)
            return m[:, None] * self.shape_weights[None, :], m * self.shape_far_mass
        ratio, far_ratio = self._user_ratios(X, t)
        return ratio * self.power_weights[None, :], far_ratio * self.tail_coefficient

    def _user_ratios(self, X, t):
        """``K / envelope`` averaged over each cell; lies in [lambda, Lambda] by construction."""
        k, h = self.kernel, self.grid.h
        if self.dim == 1:
            xg, wg = gauss_legendre(4)
            off = self.offsets[:, 0].astype(float)
            ypts = ((off[:, None] + 0.5 * xg[None, :]) * h).reshape(-1, 1)
            cell = np.repeat(np.arange(off.size), xg.size)
            wts = np.tile(0.5 * wg * h, off.size)
        else:
            cell, ypts, wts = _cell_nodes_2d(self.offsets, h, order=3, refine_within=0)
        env = (2 - k.sigma) * np.sqrt(np.sum(ypts ** 2, 1)) ** (-k.dim - k.sigma)
        ratio = np.empty((X.shape[0], self.offsets.shape[0]))
        far = np.empty(X.shape[0])
        if self.dim == 1:
            edirs = np.array([[1.0]])
        else:
            th = np.linspace(0, np.pi, 8, endpoint=False)
            edirs = np.stack([np.cos(th), np.sin(th)], 1)
        for i, x in enumerate(X):
            kv = eval_kernel(k, x, ypts, t)
            num = np.bincount(cell, weights=wts * kv, minlength=ratio.shape[1])
            den = np.bincount(cell, weights=wts * env, minlength=ratio.shape[1])
            ratio[i] = num / den
            yf = self.H * edirs
            far[i] = np.mean(eval_kernel(k, x, yf, t)
                             / ((2 - k.sigma) * self.H ** (-k.dim - k.sigma)))
        return ratio, far

    def far_kernel(self, t, y, nodes=None):
        """Kernel values ``K(x_i, y_q; t)`` of shape ``(m, Q)`` at far nodes."""
        k = self.kernel
        X = self.grid.nodes if nodes is None else self.grid.nodes[nodes]
        r = np.sqrt(np.sum(y * y, 1))
        if k.power_type:
            e = y / r[:, None]
            a = (np.ones(r.size) if self._angular is None else self._angular(e))
            m = k.form.modulation(X, np.full(X.shape[0], float(t)), k.sigma)
            return m[:, None] * ((2 - k.sigma) * a * r ** (-k.dim - k.sigma))[None, :]
        out = np.empty((X.shape[0], y.shape[0]))
        for i, x in enumerate(X):
            out[i] = eval_kernel(k, x, y, t)
        return out

    def far_quadrature(self, mode, period=None):
        """Cached far nodes for ``mode`` in {"periodic", "callable"}."""
        key = (mode, period)
        if key not in self._far_cache:
            if mode == "periodic":
                r_far = R_FAR_PERIODIC if self.dim == 1 else 2e2
                y, w = _far_nodes(self.dim, self.H, r_far, periodic_width=period / 4.0,
                                  n_theta=8 if self.dim == 1 else 16)
            else:
                r_far = R_FAR
                y, w = _far_nodes(self.dim, self.H, r_far)
            self._far_cache[key] = (y, w, r_far)
        return self._far_cache[key]

    # -- matrices -----------------------------------------------------------
    def matrix(self, t, far_mode="constant"):
        """Dense blocks ``(A_box, A_off)`` with ``Lu = A_box u + A_off u_off + far``.

        ``u_off`` are the values at the off-box extended nodes ``ext_nodes[off_ext]``.
        The diagonal carries ``-2 sum_j W_ij - 2 m_far(x_i)``; for ``far_mode`` other
        than "constant" the far mass is the one of the matching far quadrature.
        """
        W, mfar = self.node_weights(t)
        N = self.N
        A = np.zeros((N, self.ext_nodes.shape[0]))
        rows = np.arange(N)[:, None]
        A[rows, self.idx_plus] = W
        A[rows, self.idx_minus] += W
        diag = -2.0 * W.sum(axis=1) - 2.0 * self._far_total(t, mfar, far_mode)
        A[np.arange(N), self.box_ext] += diag
        return A[:, self.box_ext], A[:, self.off_ext]

    def _far_total(self, t, mfar, far_mode, nodes=None):
        if far_mode == "constant":
            return mfar
        y, w, r_far = self.far_quadrature(*far_mode)
        Kq = self.far_kernel(t, y, nodes)
        beyond = self._beyond_mass(t, r_far, nodes)
        return 2.0 * Kq @ w + beyond

    def _beyond_mass(self, t, r_far, nodes=None):
        k = self.kernel
        X = self.grid.nodes if nodes is None else self.grid.nodes[nodes]
        if self.dim == 1:
            edirs = np.array([[1.0]])
        else:
            th = np.linspace(0, np.pi, 16, endpoint=False)
            edirs = np.stack([np.cos(th), np.sin(th)], 1)
        yb = r_far * edirs
        env = (2 - k.sigma) * r_far ** (-k.dim - k.sigma)
        ratio = np.mean(self.far_kernel(t, yb, nodes) / env, axis=1)
        return ratio * _beyond_mass_pow(self.dim, k.sigma, r_far)

    def exterior_terms(self, t, g, far_mode, nodes=None, mean=None):
        """Far contributions that do not involve ``u(x_i)`` for data function ``g``.

        ``far_mode`` is "constant" with ``g`` a number, or a tuple from
        :meth:`far_mode_of`.  Returns shape ``(m,)``.
        """
        if far_mode == "constant":
            _, mfar = self.node_weights(t, nodes)
            return 2.0 * float(g) * mfar
        y, w, r_far = self.far_quadrature(*far_mode)
        X = self.grid.nodes if nodes is None else self.grid.nodes[nodes]
        Kq = self.far_kernel(t, y, nodes)
        m, Q = Kq.shape
        P = (X[:, None, :] + y[None, :, :]).reshape(-1, self.dim)
        M = (X[:, None, :] - y[None, :, :]).reshape(-1, self.dim)
        gp = g(P).reshape(m, Q)
        gm = g(M).reshape(m, Q)
        body = 2.0 * np.sum(Kq * w[None, :] * (gp + gm), axis=1)
        if mean is None:
            # mean value beyond r_far: average of g over the outermost panel
            last = slice(max(0, Q - 8), Q)
            gbar = 0.5 * (gp[:, last].mean(axis=1) + gm[:, last].mean(axis=1))
        else:
            gbar = mean
        return body + 2.0 * gbar * self._beyond_mass(t, r_far, nodes)


def build_quadrature(k, grid, rule="cell", pad=None):
    """Build the :class:`QuadratureTable` of ``k`` on ``grid``."""
    return QuadratureTable(k, grid, rule, pad)


def _far_mode(u):
    ext = u.exterior
    if ext.constant_value is not None:
        return "constant", ext.constant_value
    if isinstance(ext, PeriodicExterior):
        return ("periodic", ext.period_for(u.grid)), None
    mean = ext.far_mean(u)
    if mean is not None:
        return "constant", mean
    return ("callable", None), None


def _ext_values(u, q):
    """Values of ``u`` on the extended grid (box values plus exterior rule)."""
    v = np.empty(q.ext_nodes.shape[0])
    v[q.box_ext] = u.flat
    v[q.off_ext] = u.exterior.evaluate(q.ext_nodes[q.off_ext], u)
    return v


def _node_indices(grid, x):
    if x is None:
        return np.arange(grid.size)
    idx = grid.index_of(x)
    if np.any(idx < 0):
        raise ContractError("x must be grid nodes inside the box")
    return idx


def apply_L_all(u, q, t=0.0, nodes=None):
    """``Lu`` at all box nodes (or the flat indices ``nodes``)."""
    nodes = np.arange(q.N) if nodes is None else np.asarray(nodes)
    mode, cval = _far_mode(u)
    ev = _ext_values(u, q)
    W, mfar = q.node_weights(t, nodes)
    un = u.flat[nodes]
    delta = ev[q.idx_plus[nodes]] + ev[q.idx_minus[nodes]] - 2.0 * un[:, None]
    near = np.sum(W * delta, axis=1)
    if mode == "constant":
        far = 2.0 * (cval - un) * mfar
    else:
        mean = u.exterior.far_mean(u) if mode[0] == "periodic" else None
        far = (q.exterior_terms(t, u.value_at, mode, nodes, mean)
               - 2.0 * un * q._far_total(t, mfar, mode, nodes))
    return near + far


def apply_L(u, k, x, t, q):
    """Discrete ``Lu(x, t)`` at the node(s) ``x``.

    Parameters
    ----------
    u : GridFunction
    k : KernelSpec
    x : array_like
        One node or an array of nodes, shape ``(m, n)`` or ``(m,)`` in 1D.
    t : float
    q : QuadratureTable
        Must have been built for ``k`` and ``u.grid``.

    Returns
    -------
    float or ndarray
    """
    q.check(k, u.grid)
    nodes = _node_indices(u.grid, x)
    out = apply_L_all(u, q, t, nodes)
    return float(out[0]) if out.size == 1 else out


def _pucci_split(delta, W, lam, Lam, sign):
    lo, hi = (lam, Lam) if sign == "-" else (Lam, lam)
    return W * (lo * np.maximum(delta, 0.0) - hi * np.maximum(-delta, 0.0))


def pucci_all(u, q, sign, lam, Lam, nodes=None):
    """Extremal operator ``M^-`` (sign "-") or ``M^+`` (sign "+") at box nodes."""
    if sign not in ("+", "-"):
        raise ContractError("sign must be '+' or '-'")
    nodes = np.arange(q.N) if nodes is None else np.asarray(nodes)
    mode, cval = _far_mode(u)
    ev = _ext_values(u, q)
    un = u.flat[nodes]
    delta = ev[q.idx_plus[nodes]] + ev[q.idx_minus[nodes]] - 2.0 * un[:, None]
    out = np.sum(_pucci_split(delta, q.power_weights[None, :], lam, Lam, sign), axis=1)
    if mode == "constant":
        return out + _pucci_split(2.0 * (cval - un), q.tail_coefficient, lam, Lam, sign)
    y, w, r_far = q.far_quadrature(*mode)
    X = q.grid.nodes[nodes]
    m, Q = X.shape[0], y.shape[0]
    r = np.sqrt(np.sum(y * y, 1))
    Wf = 2.0 * w * (2 - q.sigma) * r ** (-q.dim - q.sigma)
    gp = u.value_at((X[:, None, :] + y[None]).reshape(-1, q.dim)).reshape(m, Q)
    gm = u.value_at((X[:, None, :] - y[None]).reshape(-1, q.dim)).reshape(m, Q)
    out = out + np.sum(_pucci_split(gp + gm - 2 * un[:, None], Wf[None, :], lam, Lam, sign), 1)
    if mode[0] == "periodic":
        gbar = u.exterior.far_mean(u)
    else:
        last = slice(max(0, Q - 8), Q)
        gbar = 0.5 * (gp[:, last].mean(1) + gm[:, last].mean(1))
    return out + _pucci_split(2.0 * (gbar - un), _beyond_mass_pow(q.dim, q.sigma, r_far),
                              lam, Lam, sign)


def pucci(u, x, sign, sigma, lam, Lam, q):
    """``M^{+-}u(x)`` with the envelope weights of ``q`` (``sigma`` must match ``q``)."""
    if abs(sigma - q.sigma) > 0:
        raise ContractError("sigma differs from the quadrature table")
    if u.grid != q.grid:
        raise ContractError("quadrature table was built for a different grid")
    nodes = _node_indices(u.grid, x)
    out = pucci_all(u, q, sign, lam, Lam, nodes)
    return float(out[0]) if out.size == 1 else out


# ---------------------------------------------------------------------------
# operator distance

StarNorm = namedtuple("StarNorm", ["surrogate", "empirical", "argmax"])


def cosine_probes(dim, M=1.0, n_freq=5, n_phase=4):
    """Probe family ``M cos(xi . x + phi)`` with ``|xi| <= sqrt(2)``.

    Each member satisfies ``|u| <= M`` and ``|u(x+y) - u(x) - y . grad u(x)| <= M |y|^2``.
    Returned as ``(M, xi, phi)`` triples.
    """
    out = []
    mags = np.linspace(np.sqrt(2.0) / n_freq, np.sqrt(2.0), n_freq)
    if dim == 1:
        dirs = [np.array([1.0])]
    else:
        dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0]) / np.sqrt(2)]
    for s in mags:
        for d in dirs:
            for phi in np.linspace(0, np.pi, n_phase, endpoint=False):
                out.append((float(M), s * d, float(phi)))
    return out


def _polar_grid(dim, breaks, order=16, n_angle=32):
    r, wr = panel_nodes(np.asarray(breaks), order)
    if dim == 1:
        return r[:, None], wr * 2.0, r  # even integrands: both rays
    th, wt = panel_nodes(np.linspace(0, 2 * np.pi, 9), max(2, n_angle // 8))
    e = np.stack([np.cos(th), np.sin(th)], 1)
    Y = (r[None, :, None] * e[:, None, :]).reshape(-1, 2)
    W = (wt[:, None] * (wr * r)[None, :]).ravel()
    return Y, W, np.tile(r, th.size)


def _region_samples(dim, region, n_x=11, n_t=9):
    R, T = region
    xs = np.linspace(-R, R, n_x)
    if dim == 2:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], 1)
    else:
        pts = xs[:, None]
    ts = np.linspace(-T, 0.0, n_t)
    return pts, ts


def star_norm_distance(k1, k0, region, probe_set=None, n_x=11, n_t=9):
    """Distance between the operators of ``k1`` and ``k0`` on a space-time cylinder.

    Parameters
    ----------
    k1, k0 : KernelSpec
    region : Cylinder or (radius, depth)
        Space-time box ``B_radius x (-depth, 0]`` sampled on a tensor grid.
    probe_set : list of (M, xi, phi), optional
        Cosine probes as returned by :func:`cosine_probes` (the default).

    Returns
    -------
    StarNorm
        ``surrogate`` is the sup over samples of
        ``2 int_{B_1} |y|^2 |K1 - K0| + 4 int_{|y|>1} |K1 - K0|``, which bounds
        ``|L1 u - L0 u| / M`` for every admissible probe; ``empirical`` is the sup over
        probes and samples of ``|L1 u - L0 u| / (1 + M)``.
    """
    if k1.dim != k0.dim or k1.sigma != k0.sigma:
        raise ContractError("kernels must share dimension and order")
    dim = k1.dim
    probes = cosine_probes(dim) if probe_set is None else list(probe_set)
    if not probes:
        raise ContractError("probe_set is empty")
    region = Cylinder(*region)
    pts, ts = _region_samples(dim, region, n_x, n_t)
    inner_br = np.concatenate([np.geomspace(1e-8, 1.0, 33)])
    outer_br = np.concatenate([np.linspace(1.0, 200.0, 797), np.geomspace(200.0, R_FAR, 9)[1:]])
    Yi, Wi, ri = _polar_grid(dim, inner_br)
    Yo, Wo, ro = _polar_grid(dim, outer_br)
    Y = np.concatenate([Yi, Yo])
    Wt = np.concatenate([Wi, Wo])
    rr = np.concatenate([ri, ro])
    inner = rr < 1.0
    s_weight = np.where(inner, 2.0 * rr * rr, 4.0)
    Yend = R_FAR * (np.array([[1.0]]) if dim == 1 else
                    np.stack([np.cos(np.linspace(0, np.pi, 8, endpoint=False)),
                              np.sin(np.linspace(0, np.pi, 8, endpoint=False))], 1))
    env_end = (2 - k1.sigma) * R_FAR ** (-dim - k1.sigma)
    sur_best, emp_best, arg = 0.0, 0.0, None
    for t in ts:
        for x in pts:
            d = eval_kernel(k1, x, Y, t) - eval_kernel(k0, x, Y, t)
            # power-law closure beyond R_FAR
            dend = np.abs(eval_kernel(k1, x, Yend, t) - eval_kernel(k0, x, Yend, t))
            tail = 4.0 * np.mean(dend) / env_end * _beyond_mass_pow(dim, k1.sigma, R_FAR)
            s = float(np.sum(Wt * s_weight * np.abs(d))) + tail
            if s > sur_best:
                sur_best, arg = s, (tuple(np.atleast_1d(x)), float(t))
            for M, xi, phi in probes:
                xi = np.atleast_1d(xi)
                # delta u = 2 M cos(xi.x + phi) (cos(xi.y) - 1)
                val = 2.0 * M * np.cos(float(xi @ np.atleast_1d(x)) + phi) * np.sum(
                    Wt * (np.cos(Y @ xi) - 1.0) * d)
                emp_best = max(emp_best, abs(val) / (1.0 + M))
    return StarNorm(sur_best, emp_best, arg)
