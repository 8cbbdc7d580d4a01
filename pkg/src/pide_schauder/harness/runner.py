"""Experiment orchestration: certify, solve, scheme and regularity with JSON/CSV output."""

import csv
from importlib import metadata
import json
import math
import os
import warnings

import numpy as np
import scipy

from .._validation import ContractError, NearIntegerWarning, warn_near_integer
from ..kernel import check_hypotheses
from ..regularity import (MultiscaleView, default_radii, guaranteed_time_exponent,
                          pointwise_spatial_exponent, resolvable_radii, time_modulus,
                          uniform_spatial_norm)
from ..scheme import (FitError, ScaleExhaustedError, SchemeConfig, fit_decay_rate,
                      run_scheme, solve_base, taylor_at_origin)
from ..solver import CauchyExteriorProblem, NumericalError, solve, steady_residual, \
    write_csv, write_snapshot
from .config import ConfigError, build_data, build_kernel, build_rhs, load_config

__all__ = ["EXIT_PASS", "EXIT_FAIL", "EXIT_CONFIG", "EXIT_NUMERICAL", "RunResult",
           "run_experiment", "run_config_file", "write_json", "versions"]

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

NUMERICAL_ERRORS = (NumericalError, ScaleExhaustedError, FitError, FloatingPointError,
                    np.linalg.LinAlgError)


class RunResult:
    """Report dictionary, exit code and the files written."""

    def __init__(self, report, code, files):
        self.report = report
        self.code = code
        self.files = files


def versions():
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"artifact": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def _check(name, measured, expected, passed):
    return {"name": name, "measured": measured, "expected": expected, "pass": bool(passed)}


def _fit_record(fit, guaranteed=None, slack=0.2):
    rec = fit.record()
    if not math.isfinite(fit.exponent):
        rec["status"] = "degenerate"
    elif guaranteed is not None:
        rec["guaranteed"] = guaranteed
        rec["status"] = "pass" if fit.exponent >= guaranteed - slack else "fail"
    return rec


def _time_list(u_or_view, t_min_steps=4):
    """Geometric times ``-T/2, -T/4, ...`` down to ``4 dt`` (at most 12)."""
    if isinstance(u_or_view, MultiscaleView):
        lv = u_or_view.levels
        sc = [s ** u_or_view.sigma for s in u_or_view.scales]
        T = -lv[0].times[0] * sc[0]
        dt_min = min(u.dt * s for u, s in zip(lv, sc))
    else:
        T = u_or_view.times[-1] - u_or_view.times[0]
        dt_min = u_or_view.dt
    out = [-(T / 2) * 0.5 ** k for k in range(12)]
    return [t for t in out if -t >= t_min_steps * dt_min]


def run_experiment(cfg, out_dir, seed=None):
    """Run one parsed :class:`ExperimentConfig`; always writes ``report.json``.

    Returns
    -------
    RunResult
        Exit code 0 when every acceptance check passes, 1 otherwise, 2 on a contract
        violation found while running, 3 on a numerical failure.  The (partial)
        report is written in every case.
    """
    seed = cfg.seed if seed is None else int(seed)
    os.makedirs(out_dir, exist_ok=True)
    files = []
    report = {"name": cfg.name, "config_hash": cfg.config_hash, "seed": seed,
              "versions": versions(), "checks": [], "skipped": {}}
    code = EXIT_PASS
    try:
        _pipeline(cfg, seed, out_dir, report, files)
    except NUMERICAL_ERRORS as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_NUMERICAL
    except ContractError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_CONFIG
    if code == EXIT_PASS and not all(c["pass"] for c in report["checks"]):
        code = EXIT_FAIL
    report["status"] = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_CONFIG: "config-error",
                        EXIT_NUMERICAL: "numerical-error"}[code]
    path = os.path.join(out_dir, "report.json")
    write_json(report, path)
    files.append(path)
    return RunResult(report, code, files)


def _pipeline(cfg, seed, out_dir, report, files):
    an = cfg.analysis
    k = build_kernel(cfg.kernel)
    f = build_rhs(cfg.rhs, k)
    g = build_data(cfg.data, k)
    alpha = cfg.alpha
    report["kernel"] = k.describe()
    if alpha is not None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            warn_near_integer(k.sigma, alpha)
        report["near_integer_warning"] = next(
            (str(w.message) for w in caught if issubclass(w.category, NearIntegerWarning)), None)

    # certification
    if an.get("certify", True):
        rep = check_hypotheses(k, int(an.get("sample_budget", 400)), seed)
        report["certification"] = rep.records()
        report["checks"].append(_check("certification", rep.class_tag, k.class_tag, rep.passed))
    else:
        report["skipped"]["certification"] = "disabled in [analysis]"

    # solve
    s = cfg.solve
    p = CauchyExteriorProblem(k, f, float(s["domain_radius"]), float(s.get("t_start", -1.0)),
                              float(s.get("t_end", 0.0)), g, far_mean=s.get("far_mean"),
                              name=cfg.name)
    u = solve(p, float(s["h"]), s.get("dt"), s.get("box_halfwidth"), s.get("rule", "cell"))
    res = steady_residual(u, p)
    report["solver"] = {"h": u.grid.h, "dt": u.dt, "slices": u.n_slices,
                        "box_halfwidth": u.grid.box_halfwidth,
                        "max_steady_residual": float(np.max(np.abs(res))),
                        "sup_u": float(np.max(np.abs(u.values)))}
    for name, writer in (("solution.csv", write_csv), ("solution.pids", write_snapshot)):
        path = os.path.join(out_dir, name)
        writer(u, path)
        files.append(path)

    # exact-mode oracle
    if cfg.oracle.get("exact_mode", False):
        if cfg.data.get("kind") != "mode" or f != 0.0:
            raise ConfigError("the exact-mode oracle needs data kind 'mode' and f = 0")
        exact = np.stack([g(u.grid.nodes, t) for t in u.times])
        err = float(np.max(np.abs(u.values - exact)))
        tol = float(cfg.oracle.get("tol", 1e-2))
        report["oracle"] = {"linf_error": err, "tol": tol}
        report["checks"].append(_check("exact-mode L-inf error", err, f"<= {tol}", err <= tol))

    # scheme
    seq = taylor = None
    sc = cfg.scheme
    if sc is not None and sc.get("enabled", True):
        scfg = SchemeConfig(rho=sc.get("rho", 0.2), i_max=sc.get("i_max", 3),
                            base_radius=sc.get("base_radius", 4.0), tau=sc.get("tau", 0.5),
                            derivative_step=sc.get("derivative_step"), h=sc.get("h", 2.0 ** -6),
                            dt=sc.get("dt"), rule=sc.get("rule", "moment"))
        ub = solve_base(k, f, g, scfg)
        seq = run_scheme(ub, k, f, scfg, alpha)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearIntegerWarning)
            taylor = taylor_at_origin(seq, k.sigma, alpha)
        e = seq.residual_norms
        report["scheme"] = {"sequence": seq.records(), "cascade_violation": seq.cascade_violation(),
                            "exterior_surrogate": seq.meta["exterior_surrogate"]}
        report["taylor"] = taylor.record()
        path = os.path.join(out_dir, "decay.csv")
        _write_rows(path, ["i [scale index]", "log_e_i [log of sup norm]"],
                    [(i, math.log(v) if v > 0 else -math.inf) for i, v in enumerate(e)])
        files.append(path)
        if all(v > 0 for v in e) and len(e) >= 3:
            fit = fit_decay_rate(e, scfg.rho)
            report["decay_fit"] = fit.record()
            target = k.sigma + alpha
            report["checks"].append(_check("decay exponent", fit.exponent,
                                           [target - 0.2, target + 0.3],
                                           target - 0.2 <= fit.exponent <= target + 0.3))
        else:
            report["decay_fit"] = {"status": "degenerate", "values": e}
    elif sc is not None:
        report["skipped"]["scheme"] = "disabled in [scheme]"

    # regularity
    reg = {}
    source = seq.multiscale() if seq is not None else u
    if an.get("spatial_exponent", True):
        if seq is not None:
            radii = resolvable_radii(seq)
        else:
            radii = default_radii(p.domain_radius / 2, 4 * u.grid.h)
        fit = pointwise_spatial_exponent(source, taylor, radii)
        guaranteed = k.sigma + alpha if (taylor is not None and alpha is not None) else None
        reg["spatial"] = _fit_record(fit, guaranteed)
        path = os.path.join(out_dir, "spatial_modulus.csv")
        _write_rows(path, ["r [length]", "m [solution units]"], zip(fit.radii, fit.values))
        files.append(path)
    for j in an.get("time_exponents", [0]):
        if alpha is not None and j > math.floor(k.sigma + alpha):
            reg[f"time_j{j}"] = {"status": "skipped", "reason": "j exceeds floor(sigma+alpha)"}
            continue
        fit = time_modulus(source, j, _time_list(source), k.sigma, alpha)
        guaranteed = None
        if alpha is not None and (j < 2 or k.class_tag == "L3"):
            guaranteed = guaranteed_time_exponent(j, k.sigma, alpha)
        reg[f"time_j{j}"] = _fit_record(fit, guaranteed)
        path = os.path.join(out_dir, f"time_modulus_j{j}.csv")
        _write_rows(path, ["t [time]", "modulus [solution units per length^j]"],
                    zip([-r for r in fit.radii], fit.values))
        files.append(path)
    if an.get("uniform_norm", False) and alpha is not None:
        window = float(an.get("window", 1.0))
        reg["uniform_norm"] = uniform_spatial_norm(u, k.sigma + alpha, window)
    report["regularity"] = reg
    for key, rec in reg.items():
        if isinstance(rec, dict) and rec.get("status") in ("pass", "fail"):
            report["checks"].append(_check(f"{key} exponent", rec["exponent"],
                                           f">= {rec['guaranteed']} - 0.2",
                                           rec["status"] == "pass"))


def run_config_file(path, out_dir=None, seed=None):
    """Load and run a config file; configuration errors propagate as :class:`ConfigError`."""
    cfg = load_config(path)
    out = out_dir or cfg.output or os.path.join("runs", cfg.name)
    return run_experiment(cfg, os.path.join(out, cfg.name) if out_dir else out, seed)
