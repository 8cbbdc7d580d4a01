"""Command line: ``pide-schauder run <config>`` and ``pide-schauder suite <name>``."""

import argparse
import contextlib
import os
import sys

from threadpoolctl import threadpool_limits

from .._validation import ContractError
from .config import ConfigError, load_config
from .runner import EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS, NUMERICAL_ERRORS, \
    run_experiment, write_json
from .suites import SUITES, run_suite

__all__ = ["main", "build_parser", "bundled_config"]

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "configs")


def bundled_config(name):
    """Path of a bundled config (``"fracheat"`` or ``"fracheat.toml"``)."""
    name = name if name.endswith(".toml") else name + ".toml"
    return os.path.join(CONFIG_DIR, name)


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="pide-schauder", description=__doc__)
    ap.add_argument("--out", default="runs", help="output directory (default: runs)")
    ap.add_argument("--seed", type=_u64, default=None, help="run seed (overrides the config)")
    ap.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config", help="TOML file, or the name of a bundled config")
    s = sub.add_parser("suite", help="run an acceptance suite")
    s.add_argument("name", help="one of: " + ", ".join(SUITES))
    return ap


def _print_table(rows, stream):
    for r in rows:
        mark = "PASS" if r["pass"] else "FAIL"
        stream.write(f"{mark}  {r['criterion']}: measured {r['measured']!r}, "
                     f"expected {r['expected']!r}\n")


def _cmd_run(args):
    path = args.config
    if not os.path.exists(path) and os.path.exists(bundled_config(path)):
        path = bundled_config(path)
    try:
        cfg = load_config(path)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    out = os.path.join(args.out, cfg.name)
    res = run_experiment(cfg, out, args.seed)
    for c in res.report["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        sys.stdout.write(f"{mark}  {c['name']}: measured {c['measured']!r}, "
                         f"expected {c['expected']!r}\n")
    if "error" in res.report:
        sys.stderr.write(f"error: {res.report['error']}\n")
    sys.stdout.write(f"{res.report['status']}: report in {out}\n")
    return res.code


def _cmd_suite(args):
    if args.name not in SUITES:
        sys.stderr.write(f"unknown suite {args.name!r}; expected one of {sorted(SUITES)}\n")
        return EXIT_CONFIG
    kw = {"seed": args.seed or 0} if args.name == "certify" else {}
    out = os.path.join(args.out, "suite-" + args.name)
    os.makedirs(out, exist_ok=True)
    try:
        rows = run_suite(args.name, **kw)
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except ContractError as exc:
        sys.stderr.write(f"contract error: {exc}\n")
        return EXIT_CONFIG
    write_json({"suite": args.name, "rows": rows}, os.path.join(out, "table.json"))
    _print_table(rows, sys.stdout)
    return EXIT_PASS if all(r["pass"] for r in rows) else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    limit = threadpool_limits(args.threads) if args.threads else contextlib.nullcontext()
    with limit:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_suite(args)


if __name__ == "__main__":
    sys.exit(main())
