"""Jump kernels K(x, y; t) for the nonlocal operator and their certification.

All kernels are symmetric in ``y`` and are compared with the power envelope
``(2 - sigma) |y|^{-n-sigma}``.  Kernels of *power type* factor as

    K(x, y; t) = (2 - sigma) * m(x, t) * a(y / |y|) * |y|^{-n-sigma},

which is what the quadrature in :mod:`pide_schauder.operator` exploits; any other
callable can be wrapped with :func:`user_kernel`.
"""

from dataclasses import dataclass, field, replace
import json

import numpy as np

from ._quad import IntegrationError, radial_integral
from ._validation import (ContractError, as_points, check_alpha, check_dim,
                          check_positive, check_sigma)

CLASS_TAGS = ("L0", "L1", "L2", "L3")

__all__ = [
    "KernelSpec", "PowerForm", "UserForm", "CertificationReport", "HypothesisCheck",
    "IntegrationError", "fractional_laplacian", "holder_modulated",
    "anisotropic_mixture", "user_kernel", "eval_kernel", "check_hypotheses",
    "holder_integral", "rescale_kernel", "sphere_area",
]


def sphere_area(dim):
    """Surface measure of S^{n-1} (2 for n = 1)."""
    return 2.0 if dim == 1 else 2.0 * np.pi


def _norm(y):
    return np.sqrt(np.sum(y * y, axis=-1))


class PowerForm:
    """Power-type kernel ``(2-sigma) m(x,t) a(theta) |y|^{-n-sigma}``.

    ``modulation(x, t)`` takes points of shape ``(m, n)`` and times broadcastable to
    ``(m,)``; ``angular(e)`` takes unit vectors ``(m, n)``.  ``scale`` implements the
    parabolic rescaling without nesting closures.
    """

    power_type = True

    def __init__(self, name, modulation=None, angular=None, scale=1.0, frozen=False,
                 params=None, coef=1.0):
        self.name = name
        self.coef = float(coef)
        self._modulation = modulation
        self.angular = angular
        self.scale = float(scale)
        self.frozen = frozen
        self.params = dict(params or {})

    def modulation(self, x, t, sigma):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:1])
        if self._modulation is None:
            return np.full(x.shape[0], self.coef)
        if self.frozen:
            return np.full(x.shape[0], float(self._modulation(np.zeros((1, x.shape[1])),
                                                              np.zeros(1))[0]))
        s = self.scale
        return np.asarray(self._modulation(s * x, (s ** sigma) * t), dtype=float)

    @property
    def translation_invariant(self):
        return self._modulation is None or self.frozen

    def angular_factor(self, e):
        if self.angular is None:
            return np.ones(e.shape[0])
        return np.asarray(self.angular(e), dtype=float)

    def __call__(self, x, y, t, dim, sigma):
        r = _norm(y)
        e = y / r[:, None]
        return ((2.0 - sigma) * self.modulation(x, t, sigma) * self.angular_factor(e)
                * r ** (-dim - sigma))

    def rescaled(self, r):
        return PowerForm(self.name, self._modulation, self.angular, self.scale * r,
                         self.frozen, self.params, self.coef)

    def frozen_form(self):
        if self.translation_invariant:
            return self
        # freezing evaluates the (possibly rescaled) modulation at the origin, which is
        # scale independent
        return PowerForm(self.name, self._modulation, self.angular, self.scale, True,
                         self.params, self.coef)


class UserForm:
    """Arbitrary symmetric kernel given as a vectorised callable ``K(x, y, t)``."""

    power_type = False

    def __init__(self, func, name="user", scale=1.0, frozen=False, translation_invariant=False):
        self.func = func
        self.name = name
        self.scale = float(scale)
        self.frozen = frozen
        self._ti = translation_invariant

    @property
    def translation_invariant(self):
        return self._ti or self.frozen

    def __call__(self, x, y, t, dim, sigma):
        s = self.scale
        x = np.atleast_2d(x)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:1])
        if self.frozen:
            x = np.zeros_like(x)
            t = np.zeros_like(t)
        return s ** (dim + sigma) * np.asarray(self.func(s * x, s * y, (s ** sigma) * t),
                                               dtype=float)

    def rescaled(self, r):
        return UserForm(self.func, self.name, self.scale * r, self.frozen, self._ti)

    def frozen_form(self):
        if self.translation_invariant:
            return self
        return UserForm(self.func, self.name, self.scale, True, self._ti)


@dataclass(frozen=True)
class KernelSpec:
    """A jump kernel with its declared class and constants.

    ``smooth_const`` is the constant in the derivative bounds
    ``|grad_y^k K| <= C |y|^{-n-sigma-k}``; when omitted it defaults to the value for
    which the power envelope with constant ``lambda_hi`` satisfies all three bounds.
    """

    dim: int
    sigma: float
    lambda_lo: float
    lambda_hi: float
    class_tag: str
    form: object
    holder_alpha: float = 0.5
    holder_const: float = 0.0
    smooth_const: float = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        check_dim(self.dim)
        check_sigma(self.sigma)
        check_positive("lambda_lo", self.lambda_lo)
        if self.lambda_hi < self.lambda_lo:
            raise ContractError("lambda_hi must be >= lambda_lo")
        if self.class_tag not in CLASS_TAGS:
            raise ContractError(f"class_tag must be one of {CLASS_TAGS}")
        check_alpha(self.holder_alpha)
        if self.smooth_const is None:
            object.__setattr__(self, "smooth_const", envelope_smooth_const(
                self.dim, self.sigma, self.lambda_hi))

    @property
    def translation_invariant(self):
        return self.form.translation_invariant

    @property
    def power_type(self):
        return self.form.power_type

    def __call__(self, x, y, t=0.0):
        return eval_kernel(self, x, y, t)

    def modulation(self, x, t):
        return self.form.modulation(as_points(x, self.dim), t, self.sigma)

    def frozen(self):
        """The translation-invariant kernel ``y -> K(0, y; 0)``."""
        return replace(self, form=self.form.frozen_form(), holder_const=0.0)

    def describe(self):
        return {"form": self.form.name, "dim": self.dim, "sigma": self.sigma,
                "lambda": self.lambda_lo, "Lambda": self.lambda_hi,
                "class": self.class_tag, "alpha": self.holder_alpha,
                "holder_const": self.holder_const, "scale": self.form.scale,
                **getattr(self.form, "params", {})}


def envelope_smooth_const(dim, sigma, lam_hi):
    m = dim + sigma
    return (2.0 - sigma) * lam_hi * m * (m + 1) * (m + 2)


# ---------------------------------------------------------------------------
# constructors

def fractional_laplacian(dim=1, sigma=1.0, lambda_lo=1.0, lambda_hi=1.0, coef=None):
    """Pure power kernel ``(2-sigma) coef |y|^{-n-sigma}``; ``coef`` defaults to lambda_lo."""
    coef = lambda_lo if coef is None else float(coef)
    form = PowerForm("fractional-laplacian", params={"coef": coef}, coef=coef)
    return KernelSpec(dim, sigma, lambda_lo, lambda_hi, "L3", form)


def default_modulation_scale(alpha):
    """Largest ``c`` keeping ``c(|x|^a + |t|^{a/s})`` <= 1 on the unit-5 cylinder."""
    return 1.0 / (2.0 * 5.0 ** alpha)


def holder_modulated(dim=1, sigma=1.3, alpha=0.5, lambda_lo=1.0, lambda_hi=2.0,
                     g=None, g_const=None, class_tag="L3"):
    """``K = (2-sigma)(lambda + (Lambda-lambda) g(x,t)) |y|^{-n-sigma}`` with ``g`` in [0, 1].

    The default ``g`` is ``min(1, c (|x|^alpha + |t|^{alpha/sigma}))`` with
    ``c = 1 / (2 * 5^alpha)``, homogeneous near the origin.  ``g_const`` is the Hölder
    constant of ``g`` at the origin; the integral Hölder constant of the kernel follows
    in closed form.
    """
    sigma = check_sigma(sigma)
    alpha = check_alpha(alpha)
    lam, Lam = float(lambda_lo), float(lambda_hi)
    if g is None:
        c = default_modulation_scale(alpha)
        g_const = c

        def g(x, t, c=c, a=alpha, s=sigma):
            return np.minimum(1.0, c * (_norm(x) ** a + np.abs(t) ** (a / s)))
    elif g_const is None:
        raise ContractError("a custom modulation needs its Hölder constant g_const")

    def modulation(x, t, g=g):
        return lam + (Lam - lam) * np.asarray(g(x, t), dtype=float)

    form = PowerForm("holder-modulated", modulation,
                     params={"g_const": float(g_const)})
    hconst = (Lam - lam) * g_const * sphere_area(dim) * 2.0 / sigma
    return KernelSpec(dim, sigma, lam, Lam, class_tag, form, holder_alpha=alpha,
                      holder_const=hconst)


def anisotropic_mixture(sigma=1.0, lambda_lo=1.0, lambda_hi=2.0, power=1, dim=2):
    """Direction-dependent kernel ``(2-sigma)(lambda + (Lambda-lambda) cos^{2p} theta)|y|^{-n-sigma}``.

    The weight is even in each coordinate, so second moments over square cells stay
    diagonal.  In one dimension it reduces to the constant ``Lambda``.
    """
    lam, Lam, p = float(lambda_lo), float(lambda_hi), int(power)

    def angular(e):
        return lam + (Lam - lam) * np.abs(e[:, 0]) ** (2 * p)

    form = PowerForm("anisotropic-mixture", None, angular, params={"power": p})
    spec = KernelSpec(dim, sigma, lam, Lam, "L3", form,
                      smooth_const=np.inf)
    return replace(spec, smooth_const=1.05 * _sampled_smooth_const(spec))


def user_kernel(func, dim, sigma, lambda_lo, lambda_hi, class_tag="L0", holder_alpha=0.5,
                holder_const=0.0, smooth_const=None, translation_invariant=False,
                name="user"):
    """Wrap a vectorised callable ``func(x, y, t)`` (points ``(m, n)``) as a kernel."""
    form = UserForm(func, name, translation_invariant=translation_invariant)
    return KernelSpec(dim, sigma, lambda_lo, lambda_hi, class_tag, form,
                      holder_alpha=holder_alpha, holder_const=holder_const,
                      smooth_const=smooth_const)


# ---------------------------------------------------------------------------
# evaluation

def eval_kernel(k, x, y, t=0.0):
    """Evaluate ``K(x, y; t)``; rows of ``x`` and ``y`` are paired (broadcasting allowed)."""
    y = as_points(y, k.dim)
    x = as_points(x, k.dim)
    if x.shape[0] == 1 and y.shape[0] > 1:
        x = np.repeat(x, y.shape[0], axis=0)
    elif y.shape[0] == 1 and x.shape[0] > 1:
        y = np.repeat(y, x.shape[0], axis=0)
    if np.any(_norm(y) == 0.0):
        raise ContractError("kernel is singular at y = 0")
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    return k.form(x, y, t, k.dim, k.sigma)


def rescale_kernel(k, r):
    """Return ``(x, y, t) -> r^{n+sigma} K(r x, r y, r^sigma t)``.

    Ellipticity constants and class are preserved; the integral Hölder constant
    contracts by ``r^alpha``.
    """
    r = check_positive("r", r)
    return replace(k, form=k.form.rescaled(r), holder_const=k.holder_const * r ** k.holder_alpha)


# ---------------------------------------------------------------------------
# certification

@dataclass
class HypothesisCheck:
    hypothesis: str
    worst_ratio: float
    tol: float

    @property
    def passed(self):
        return bool(self.worst_ratio <= 1.0 + self.tol)

    def record(self):
        return {"hypothesis": self.hypothesis, "worst_ratio": float(self.worst_ratio),
                "pass": self.passed}


@dataclass
class CertificationReport:
    class_tag: str
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.hypothesis == name:
                return c
        raise KeyError(name)

    def records(self):
        return [c.record() for c in self.checks]

    def to_json(self):
        return json.dumps(self.records(), indent=2)


def _sample_points(k, n, rng):
    """Samples in B_5 x (-5^sigma, 0] with |y| log-spaced over [1e-4, 1e2]."""
    dim = k.dim
    radii = np.geomspace(1e-4, 1e2, n)
    if dim == 1:
        dirs = rng.choice([-1.0, 1.0], size=(n, 1))
        x = rng.uniform(-5, 5, size=(n, 1))
    else:
        th = rng.uniform(0, 2 * np.pi, n)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
        rho = 5 * np.sqrt(rng.uniform(0, 1, n))
        ph = rng.uniform(0, 2 * np.pi, n)
        x = np.stack([rho * np.cos(ph), rho * np.sin(ph)], axis=1)
    t = -rng.uniform(0, 5 ** k.sigma, n)
    return x, radii[:, None] * dirs, t


def _probe_directions(dim):
    if dim == 1:
        return np.array([[1.0]])
    th = np.linspace(0, np.pi, 12, endpoint=False)
    return np.stack([np.cos(th), np.sin(th)], axis=1)


_FD_STENCILS = {
    1: (np.array([1, -1]), np.array([1, -1]), 2.0),          # (f(s) - f(-s)) / 2s
    2: (np.array([1, 0, -1]), np.array([1, -2, 1]), 1.0),    # second central difference
    3: (np.array([2, 1, -1, -2]), np.array([1, -2, 2, -1]), 2.0),
}


def directional_derivative(k, x, y, t, order, rel_step=1e-3):
    """max over probe directions of |d^order/ds^order K(x, y + s e; t)| by central differences."""
    shifts, coefs, denom = _FD_STENCILS[order]
    s = rel_step * _norm(y)
    best = np.zeros(y.shape[0])
    for e in _probe_directions(k.dim):
        acc = np.zeros(y.shape[0])
        for sh, c in zip(shifts, coefs):
            acc += c * k.form(x, y + (sh * s)[:, None] * e[None, :], t, k.dim, k.sigma)
        best = np.maximum(best, np.abs(acc / (denom * s ** order)))
    return best


def _sampled_smooth_const(k, n=400):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    y = np.stack([np.cos(th), np.sin(th)], axis=1) if k.dim == 2 else np.array([[1.0]])
    x = np.zeros_like(y)
    t = np.zeros(y.shape[0])
    return max(float(np.max(directional_derivative(k, x, y, t, j))) for j in (1, 2, 3))


def check_hypotheses(k, sample_budget=1000, seed=0, tol_exact=1e-6, tol_fd=1e-2):
    """Sample-based certification of symmetry, ellipticity and the derivative bounds.

    Ratios are ``measured / allowed``; a hypothesis passes when its worst ratio is at
    most ``1 + tol``.
    """
    if sample_budget < 1:
        raise ContractError("sample_budget must be >= 1")
    rng = np.random.default_rng(seed)
    x, y, t = _sample_points(k, int(sample_budget), rng)
    n, s = k.dim, k.sigma
    r = _norm(y)
    kv = k.form(x, y, t, n, s)
    km = k.form(x, -y, t, n, s)
    env = (2.0 - s) * r ** (-n - s)
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = np.abs(kv - km) / np.maximum(np.abs(kv), np.finfo(float).tiny)
    checks = [
        # symmetry is an identity: the ratio is relative asymmetry scaled so 1 = 1e-12
        HypothesisCheck("symmetry", float(np.max(sym)) / 1e-12 if np.max(sym) > 1e-12 else 0.0,
                        tol_exact),
        HypothesisCheck("ellipticity_upper", float(np.max(kv / (k.lambda_hi * env))), tol_exact),
        HypothesisCheck("ellipticity_lower", float(np.max(k.lambda_lo * env / kv)), tol_exact),
    ]
    level = CLASS_TAGS.index(k.class_tag)
    names = {1: "gradient_bound", 2: "hessian_bound", 3: "third_derivative_bound"}
    for order in range(1, level + 1):
        d = directional_derivative(k, x, y, t, order)
        ratio = d * r ** (n + s + order) / k.smooth_const
        checks.append(HypothesisCheck(names[order], float(np.max(ratio)), tol_fd))
    return CertificationReport(k.class_tag, checks)


# ---------------------------------------------------------------------------
# integral Hölder condition

def kernel_difference_integral(k1, k0, weight, x, t, t0=None, x0=None, r_breaks=(),
                               absolute=True):
    """``int |K1(x,y;t) - K0(x0,y;t0)| weight(|y|) dy`` over R^n by polar quadrature."""
    x = as_points(x, k1.dim)[0]
    x0 = x if x0 is None else as_points(x0, k1.dim)[0]
    t0 = t if t0 is None else t0
    dim = k1.dim

    def integrand(rad, dirs):
        ys = (rad[None, :, None] * dirs[:, None, :]).reshape(-1, dim)
        m = ys.shape[0]
        d = (k1.form(np.repeat(x[None], m, 0), ys, np.full(m, t), dim, k1.sigma)
             - k0.form(np.repeat(x0[None], m, 0), ys, np.full(m, t0), dim, k0.sigma))
        if absolute:
            d = np.abs(d)
        return d.reshape(dirs.shape[0], rad.size) * weight(rad)[None, :]

    return radial_integral(integrand, dim, r_breaks=r_breaks)


def holder_integral(k, x, t, r):
    """``int |K(x,y;t) - K(0,y;0)| min(|y|^2, r^2) dy`` for ``r`` in (0, 1]."""
    if not 0.0 < r <= 1.0:
        raise ContractError("r must lie in (0, 1]")
    x = as_points(x, k.dim)[0]
    return kernel_difference_integral(
        k, k, lambda rad: np.minimum(rad * rad, r * r), x, float(t),
        t0=0.0, x0=np.zeros(k.dim), r_breaks=(r, 1.0))
