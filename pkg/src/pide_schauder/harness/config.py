"""Experiment configuration: a TOML key-value tree turned into kernels, data and settings."""

from dataclasses import dataclass, field
import hashlib
import json
import math

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .._validation import ContractError, check_alpha, check_sigma
from ..kernel import anisotropic_mixture, fractional_laplacian, holder_modulated

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "build_kernel",
           "build_rhs", "build_data", "mode_decay_rate"]


class ConfigError(ContractError):
    """Invalid experiment configuration."""


_SECTIONS = {"name", "seed", "kernel", "rhs", "data", "solve", "scheme", "analysis", "oracle",
             "output"}
_FORMS = {"fractional_laplacian", "holder_modulated", "anisotropic_mixture"}


@dataclass
class ExperimentConfig:
    """Parsed experiment.

    Sections ``kernel``, ``rhs``, ``data``, ``solve``, ``scheme``, ``analysis`` and
    ``oracle`` are kept as plain dictionaries (validated on parse); ``raw`` is the
    full tree, used for the configuration hash.
    """

    name: str
    seed: int
    kernel: dict
    rhs: dict
    data: dict
    solve: dict
    scheme: dict = None
    analysis: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    output: str = None
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self):
        text = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def alpha(self):
        return self.kernel.get("alpha", self.rhs.get("alpha"))


def load_config(path):
    """Read and validate a TOML experiment file."""
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(tree)


def _section(tree, name, required=True):
    s = tree.get(name)
    if s is None:
        if required:
            raise ConfigError(f"missing section [{name}]")
        return None
    if not isinstance(s, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(s)


def parse_config(tree):
    """Validate a configuration tree (as produced by ``tomllib``)."""
    unknown = set(tree) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    seed = tree.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg = ExperimentConfig(
        name=str(tree.get("name", "experiment")), seed=seed,
        kernel=_section(tree, "kernel"), rhs=_section(tree, "rhs", False) or {"kind": "constant",
                                                                              "value": 0.0},
        data=_section(tree, "data", False) or {"kind": "constant", "value": 0.0},
        solve=_section(tree, "solve"), scheme=_section(tree, "scheme", False),
        analysis=_section(tree, "analysis", False) or {},
        oracle=_section(tree, "oracle", False) or {}, output=tree.get("output"), raw=tree)
    try:
        k = build_kernel(cfg.kernel)
        build_rhs(cfg.rhs, k)
        build_data(cfg.data, k)
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc
    s = cfg.solve
    for key in ("h", "domain_radius"):
        if key not in s:
            raise ConfigError(f"[solve] needs '{key}'")
    if s.get("t_start", -1.0) >= s.get("t_end", 0.0):
        raise ConfigError("[solve] t_start must be below t_end")
    if cfg.scheme is not None and cfg.scheme.get("enabled", True):
        if cfg.alpha is None:
            raise ConfigError("the scheme needs alpha in [kernel] or [rhs]")
        rho = cfg.scheme.get("rho", 0.2)
        if not 0 < rho < 1:
            raise ConfigError("[scheme] rho must lie in (0, 1)")
    return cfg


def build_kernel(d):
    """Kernel from ``{form, dim, sigma, lambda_lo, lambda_hi, alpha, coef, power}``."""
    form = d.get("form")
    if form not in _FORMS:
        raise ConfigError(f"unknown kernel form {form!r}; expected one of {sorted(_FORMS)}")
    sigma = check_sigma(d.get("sigma", 1.0))
    lam = float(d.get("lambda_lo", 1.0))
    Lam = float(d.get("lambda_hi", 1.0 if form == "fractional_laplacian" else 2.0))
    dim = int(d.get("dim", 2 if form == "anisotropic_mixture" else 1))
    if form == "fractional_laplacian":
        return fractional_laplacian(dim, sigma, lam, Lam, d.get("coef"))
    if form == "holder_modulated":
        alpha = check_alpha(d.get("alpha", 0.5))
        return holder_modulated(dim, sigma, alpha, lam, Lam)
    return anisotropic_mixture(sigma, lam, Lam, int(d.get("power", 1)), dim)


def mode_decay_rate(sigma, coef=1.0, frequency=1.0):
    """``c`` with ``L cos(xi x) = -c cos(xi x)`` for the 1D power kernel ``(2-sigma) coef |y|^{-1-sigma}``."""
    return (coef * 2.0 * math.pi * (2.0 - sigma) * abs(frequency) ** sigma
            / (math.gamma(1.0 + sigma) * math.sin(math.pi * sigma / 2.0)))


def build_rhs(d, k):
    """``f(x, t)`` from ``{kind = constant | holder, ...}``.

    ``holder``: ``base + amp |x|^a (1 + skew sign x_1) + time_amp |t|^{a / sigma}``.
    """
    kind = d.get("kind", "constant")
    if kind == "constant":
        return float(d.get("value", 0.0))
    if kind == "holder":
        a = check_alpha(d.get("alpha", k.holder_alpha or 0.5))
        base, amp = float(d.get("base", 1.0)), float(d.get("amp", 0.5))
        skew, tamp = float(d.get("skew", 0.0)), float(d.get("time_amp", 0.5))
        if abs(skew) > 1:
            raise ConfigError("[rhs] skew must lie in [-1, 1]")
        s = k.sigma

        def f(x, t):
            x = np.atleast_2d(x)
            r = np.sqrt(np.sum(x * x, axis=1))
            return base + amp * r ** a * (1 + skew * np.sign(x[:, 0])) + tamp * abs(t) ** (a / s)
        return f
    raise ConfigError(f"unknown rhs kind {kind!r}")


def build_data(d, k):
    """Exterior/initial data ``g(x, t)`` from ``{kind = constant | cos | mode, ...}``.

    ``cos``: ``amplitude cos(frequency x_1 + phase)``, time independent.
    ``mode``: the exact decaying mode ``amplitude exp(-c (t - t0)) cos(frequency x_1)`` of
    a 1D power kernel.
    """
    kind = d.get("kind", "constant")
    if kind == "constant":
        return float(d.get("value", 0.0))
    A, xi = float(d.get("amplitude", 1.0)), float(d.get("frequency", 1.0))
    if kind == "cos":
        ph = float(d.get("phase", 0.0))
        return lambda x, t: A * np.cos(xi * np.atleast_2d(x)[:, 0] + ph)
    if kind == "mode":
        if k.dim != 1 or not k.translation_invariant or k.form.name != "fractional-laplacian":
            raise ConfigError("data kind 'mode' needs a 1D fractional_laplacian kernel")
        c = mode_decay_rate(k.sigma, k.form.coef, xi)
        t0 = float(d.get("t0", -1.0))
        return lambda x, t: A * math.exp(-c * (t - t0)) * np.cos(xi * np.atleast_2d(x)[:, 0])
    raise ConfigError(f"unknown data kind {kind!r}")
