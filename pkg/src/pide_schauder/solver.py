"""Implicit Euler for ``u_t - Lu = f`` in a ball with data prescribed outside it.

Nodes of the grid box outside ``B_{r_dom}`` and all off-box nodes are pinned to the
exterior data ``g(x, t)``; the interior values solve

    (I - dt A_II(t_{k+1})) u^{k+1}_I = u^k_I + dt (f(t_{k+1}) + A_IP g_P + far terms)

which is an M-matrix system, so the scheme is monotone for every ``dt > 0``.
"""

from dataclasses import dataclass, field
import csv
import hashlib
import struct

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ._validation import ContractError, as_points, check_finite, check_positive
from .grid import CallableExterior, Grid, GridFunction
from .operator import build_quadrature

__all__ = [
    "CauchyExteriorProblem", "SpaceTimeSolution", "ComparisonReport", "NumericalError",
    "solve", "compare", "steady_residual", "write_csv", "write_snapshot", "read_snapshot",
]

SOLVER_TOL = 1e-9


class NumericalError(ArithmeticError):
    """A linear solve failed or produced non-finite values."""


def _as_field(v):
    """Wrap numbers as constant callables ``(x, t) -> values``."""
    if callable(v):
        return v, None
    c = float(v)
    return (lambda x, t, c=c: np.full(np.atleast_2d(x).shape[0], c)), c


@dataclass
class CauchyExteriorProblem:
    """Data of the Cauchy problem with exterior data.

    Parameters
    ----------
    kernel : KernelSpec
    rhs : callable or float
        ``f(x, t)`` with ``x`` of shape ``(m, n)`` and scalar ``t``.
    domain_radius : float
        Radius of the solve ball ``B_{r_dom}``.
    t_start, t_end : float
        ``t_start < t_end <= 0``.
    exterior_data : callable or float
        ``g(x, t)``; used outside the ball for ``t > t_start`` and everywhere at
        ``t_start``.
    M_f : float, optional
        Declared bound on ``|f|``; checked on samples when given.
    far_mean : float, optional
        Mean of ``g`` far away.  When given, ``g`` beyond the explicit offsets is
        replaced by this constant instead of being integrated by radial quadrature.
    """

    kernel: object
    rhs: object = 0.0
    domain_radius: float = 1.0
    t_start: float = -1.0
    t_end: float = 0.0
    exterior_data: object = 0.0
    M_f: float = None
    far_mean: float = None
    name: str = "problem"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        check_positive("domain_radius", self.domain_radius)
        if not self.t_start < self.t_end:
            raise ContractError("t_start must be smaller than t_end")
        if self.t_end > 0:
            raise ContractError("t_end must be <= 0")
        self.f, self.f_const = _as_field(self.rhs)
        self.g, self.g_const = _as_field(self.exterior_data)
        if self.M_f is not None:
            rng = np.random.default_rng(0)
            x = rng.uniform(-self.domain_radius, self.domain_radius, (256, self.kernel.dim))
            t = rng.uniform(self.t_start, self.t_end, 8)
            fmax = max(np.max(np.abs(self.f(x, s))) for s in t)
            if fmax > self.M_f * (1 + 1e-12):
                raise ContractError(f"|f| reaches {fmax:.4g} > declared M_f = {self.M_f}")

    @property
    def dim(self):
        return self.kernel.dim

    def fingerprint(self):
        """Short hash of the scalar data (callables are identified by name)."""
        d = repr((self.kernel.describe(), self.domain_radius, self.t_start, self.t_end,
                  self.f_const, self.g_const, self.name))
        return hashlib.sha256(d.encode()).hexdigest()[:16]


@dataclass
class SpaceTimeSolution:
    """Slices ``values[k]`` (flat, box nodes) at ``times[k]``."""

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    dt: float
    interior: np.ndarray
    problem: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n_slices(self):
        return len(self.times)

    def slice(self, k):
        """Slice ``k`` as a :class:`GridFunction` whose exterior is the problem data."""
        t = float(self.times[k])
        if self.problem is None:
            return GridFunction(self.grid, self.values[k], "zero")
        g = self.problem.g
        return GridFunction(self.grid, self.values[k], CallableExterior(lambda p: g(p, t)))

    def index_of_time(self, t):
        return int(np.argmin(np.abs(self.times - t)))

    def evaluate(self, points, t):
        """``u(points, t)``: cubic in space, linear in time; exterior data off the box."""
        p = as_points(points, self.grid.dim)
        t = float(t)
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ContractError("time outside the solution range")
        k = int(np.clip(np.searchsorted(self.times, t) - 1, 0, self.n_slices - 2))
        t0, t1 = self.times[k], self.times[k + 1]
        s = 0.0 if t1 == t0 else np.clip((t - t0) / (t1 - t0), 0.0, 1.0)
        a = self.slice(k).value_at(p)
        b = self.slice(k + 1).value_at(p) if s > 0 else a
        return (1 - s) * a + s * b


def _grid_for(p, h, box_halfwidth):
    R = p.domain_radius if box_halfwidth is None else box_halfwidth
    R = np.ceil(R / h - 1e-9) * h
    if R < p.domain_radius - 1e-12:
        raise ContractError("grid box must contain the solve ball")
    return Grid(float(R), float(h), p.dim)


def _far_mode(p, q):
    if p.g_const is not None:
        return "constant", p.g_const
    if p.far_mean is not None:
        return "constant", float(p.far_mean)
    return ("callable", None), None


class _Stepper:
    """Assembles the blocks of one implicit step and caches them when possible."""

    def __init__(self, p, q, interior):
        self.p, self.q = p, q
        self.I = np.nonzero(interior)[0]
        self.P = np.nonzero(~interior)[0]
        self.mode, self.cval = _far_mode(p, q)
        self.static = p.kernel.translation_invariant
        self._blocks = None
        self._lu = None

    def blocks(self, t):
        if self._blocks is None and self.static:
            key = ("blocks", self.mode if self.mode == "constant" else self.mode[0],
                   self.I.size, hash(self.I.tobytes()))
            cache = self.q.__dict__.setdefault("_lu_cache", {})
            if key not in cache:
                A_box, A_off = self.q.matrix(t, self.mode)
                I, P = self.I, self.P
                cache[key] = (A_box[np.ix_(I, I)], A_box[np.ix_(I, P)], A_off[I])
            self._blocks = cache[key]
        if self._blocks is None or not self.static:
            A_box, A_off = self.q.matrix(t, self.mode)
            I, P = self.I, self.P
            self._blocks = (A_box[np.ix_(I, I)], A_box[np.ix_(I, P)], A_off[I])
            self._lu = None
        return self._blocks

    def data_terms(self, t):
        """``A_IP g_P + A_off g_off + far`` at interior nodes, and the pinned box values."""
        p, q = self.p, self.q
        A_II, A_IP, A_off = self.blocks(t)
        gP = p.g(q.grid.nodes[self.P], t)
        goff = p.g(q.ext_nodes[q.off_ext], t)
        b = A_IP @ gP + A_off @ goff
        if self.mode == "constant":
            b = b + q.exterior_terms(t, self.cval, "constant", self.I)
        else:
            b = b + q.exterior_terms(t, lambda x: p.g(x, t), self.mode, self.I)
        return b, gP

    def solve(self, rhs, dt, t):
        A_II = self.blocks(t)[0]
        if self._lu is None or not self.static:
            # static factorizations are shared by every solve on the same table
            key = ("lu", round(dt, 15), self.mode if self.mode == "constant" else self.mode[0],
                   self.I.size, hash(self.I.tobytes()))
            cache = self.q.__dict__.setdefault("_lu_cache", {})
            if self.static and key in cache:
                self._lu = cache[key]
            else:
                M = np.eye(A_II.shape[0]) - dt * A_II
                self._lu = lu_factor(M, check_finite=True)
                if self.static:
                    cache[key] = self._lu
        x = lu_solve(self._lu, rhs)
        if not np.all(np.isfinite(x)):
            raise NumericalError("implicit step produced non-finite values")
        return x


def solve(p, h, dt=None, box_halfwidth=None, rule="cell", pad=None, quadrature=None):
    """Time-step ``p`` with implicit Euler.

    Parameters
    ----------
    p : CauchyExteriorProblem
    h : float
        Grid spacing.
    dt : float, optional
        Time step; defaults to ``h^{min(sigma, 1)}``.  It is adjusted down so that a
        whole number of steps covers ``[t_start, t_end]``.
    box_halfwidth : float, optional
        Grid box; defaults to the domain radius (rounded up to a multiple of ``h``).
    rule : {"cell", "moment"}
        Quadrature rule of :class:`~pide_schauder.operator.QuadratureTable`.

    Returns
    -------
    SpaceTimeSolution
    """
    h = check_positive("h", h)
    sigma = p.kernel.sigma
    dt = h ** min(sigma, 1.0) if dt is None else check_positive("dt", dt)
    T = p.t_end - p.t_start
    nsteps = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / nsteps
    grid = _grid_for(p, h, box_halfwidth)
    q = build_quadrature(p.kernel, grid, rule, pad) if quadrature is None else quadrature
    interior = grid.radius() < p.domain_radius - 1e-12
    if not np.any(interior):
        raise ContractError("no grid node inside the solve ball")
    st = _Stepper(p, q, interior)
    nodes = grid.nodes
    times = p.t_start + dt * np.arange(nsteps + 1)
    times[-1] = p.t_end
    U = np.empty((nsteps + 1, grid.size))
    U[0] = check_finite("initial data", p.g(nodes, p.t_start))
    XI = nodes[st.I]
    for k in range(nsteps):
        t1 = times[k + 1]
        b, gP = st.data_terms(t1)
        rhs = U[k, st.I] + dt * (check_finite("rhs", p.f(XI, t1)) + b)
        U[k + 1, st.P] = gP
        U[k + 1, st.I] = st.solve(rhs, dt, t1)
    meta = {"rule": rule, "pad": q.pad, "nsteps": nsteps, "fingerprint": p.fingerprint(),
            "grid": grid.describe()}
    return SpaceTimeSolution(grid, times, U, dt, interior, p, meta)


def steady_residual(u, p, quadrature=None):
    """Residual ``(u^k - u^{k-1}) / dt - L u^k - f`` at interior nodes, shape ``(K, m)``."""
    q = quadrature or build_quadrature(p.kernel, u.grid, u.meta.get("rule", "cell"),
                                       u.meta.get("pad"))
    st = _Stepper(p, q, u.interior)
    XI = u.grid.nodes[st.I]
    out = np.empty((u.n_slices - 1, st.I.size))
    for k in range(1, u.n_slices):
        t = u.times[k]
        dt = t - u.times[k - 1]
        A_II = st.blocks(t)[0]
        b, _ = st.data_terms(t)
        Lu = A_II @ u.values[k, st.I] + b
        out[k - 1] = (u.values[k, st.I] - u.values[k - 1, st.I]) / dt - Lu - p.f(XI, t)
    return out


@dataclass
class ComparisonReport:
    max_violation: float
    passed: bool
    tol: float


def compare(p1, p2, h, dt=None, box_halfwidth=None, tol=1e-10, n_samples=64, seed=0):
    """Check ``u1 <= u2`` for ordered data ``f1 <= f2`` and ``g1 <= g2``.

    The ordering of the data is checked at grid nodes, off-box sample points and the
    solver time levels; a violated hypothesis raises :class:`ContractError`.
    """
    if p1.kernel is not p2.kernel and p1.kernel != p2.kernel:
        raise ContractError("problems must share the kernel")
    if (p1.t_start, p1.t_end, p1.domain_radius) != (p2.t_start, p2.t_end, p2.domain_radius):
        raise ContractError("problems must share the cylinder")
    u1 = solve(p1, h, dt, box_halfwidth)
    grid = u1.grid
    rng = np.random.default_rng(seed)
    far = rng.uniform(-4 * grid.box_halfwidth, 4 * grid.box_halfwidth, (n_samples, grid.dim))
    pts = np.concatenate([grid.nodes, far])
    for t in u1.times:
        if np.any(p1.f(grid.nodes, t) > p2.f(grid.nodes, t) + 1e-14):
            raise ContractError("f1 <= f2 is violated")
        if np.any(p1.g(pts, t) > p2.g(pts, t) + 1e-14):
            raise ContractError("g1 <= g2 is violated")
    u2 = solve(p2, h, dt, box_halfwidth)
    viol = float(max(0.0, np.max(u1.values - u2.values)))
    return ComparisonReport(viol, viol <= tol, tol)


# ---------------------------------------------------------------------------
# I/O

def write_csv(u, path):
    """CSV with columns ``t, x[, y], u`` and a unit-bearing header."""
    nodes = u.grid.nodes
    cols = ["t [time]"] + (["x [length]"] if u.grid.dim == 1 else
                           ["x1 [length]", "x2 [length]"]) + ["u [solution units]"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for t, row in zip(u.times, u.values):
            for x, v in zip(nodes, row):
                w.writerow([repr(float(t))] + [repr(float(c)) for c in x] + [repr(float(v))])


_MAGIC = b"PIDS"
_HEADER = struct.Struct("<4sIIIdddI")


def write_snapshot(u, path):
    """Binary snapshot: header (magic, version, dim, n, h, R_box, dt, count) then slices.

    Slices are raw little-endian float64 arrays of ``n**dim`` values each, preceded by
    a float64 array of the ``count`` slice times.
    """
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, g.dim, g.n, g.h, g.box_halfwidth, u.dt, u.n_slices))
        fh.write(np.asarray(u.times, dtype="<f8").tobytes())
        fh.write(np.asarray(u.values, dtype="<f8").tobytes())


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns a :class:`SpaceTimeSolution` without problem."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, ver, dim, n, h, R, dt, count = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC or ver != 1:
        raise ContractError("not a snapshot file")
    off = _HEADER.size
    times = np.frombuffer(raw, "<f8", count, off).copy()
    off += 8 * count
    vals = np.frombuffer(raw, "<f8", count * n ** dim, off).reshape(count, n ** dim).copy()
    grid = Grid(R, h, dim)
    return SpaceTimeSolution(grid, times, vals, dt, np.ones(grid.size, bool), None,
                             {"source": str(path)})
