"""
Command-line driver.

    thetacq [--config FILE] {weights,solve,table1,table2,sweep,decay} [options]

Options may also come from an INI file (``--config`` or the THETACQ_CONFIG
environment variable) with one section per subcommand, keys spelled like the
long options (``M = 511``, ``taus = 0.03125, 0.015625``). Flags given on the
command line win over the file.

Exit status: 0 success, 1 configuration error, 2 numerical failure,
3 a --check threshold was violated.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import math
import os
import sys

import numpy as np

from . import harness, stepper
from .mittag_leffler import DomainError
from .series import BDF2, omega_weights, shift_weights

log = logging.getLogger("thetacq")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3
CONFIG_ENV = "THETACQ_CONFIG"


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in str(text).replace(",", " ").split()]


def _cells(text) -> list[tuple[float, float]]:
    # "0.1:-0.9, 0.5:0"
    if isinstance(text, list):
        return text
    out = []
    for item in str(text).replace(",", " ").split():
        a, th = item.split(":")
        out.append((float(a), float(th)))
    return out


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


CONVERTERS = {
    "alpha": float, "theta": float, "tau": float, "t_end": float, "N": int, "M": int,
    "n": int, "workers": int, "ref_factor": int, "shift_cutoff": float,
    "taus": _floats, "thetas": _floats, "alphas": _floats, "cells": _cells,
    "check": _bool, "standard": _bool,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thetacq", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help=f"INI file with per-command sections (or ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="dump convolution or shift weights as CSV")
    w.add_argument("--kind", choices=["omega", "shift"], default=None)
    w.add_argument("--alpha", type=float)
    w.add_argument("--theta", type=float)
    w.add_argument("--N", type=int)
    w.add_argument("--out")

    s = sub.add_parser("solve", help="run one scheme and write the final nodal solution")
    s.add_argument("--problem", choices=["smooth", "indicator", "example2"])
    s.add_argument("--alpha", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--tau", type=float)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--M", type=int)
    s.add_argument("--standard", action="store_const", const=True, default=None,
                   help="use the uncorrected scheme")
    s.add_argument("--shift-cutoff", dest="shift_cutoff", type=float)
    s.add_argument("--out")

    for name, hlp in (("table1", "smooth-data convergence table"),
                      ("table2", "nonsmooth-data convergence table")):
        t = sub.add_parser(name, help=hlp)
        t.add_argument("--cells", help="alpha:theta pairs, e.g. '0.5:0 0.9:0.3'")
        t.add_argument("--taus")
        t.add_argument("--M", type=int)
        t.add_argument("--workers", type=int)
        t.add_argument("--shift-cutoff", dest="shift_cutoff", type=float)
        if name == "table1":
            t.add_argument("--reference", choices=["semidiscrete", "exact"])
        else:
            t.add_argument("--reference-scheme", dest="reference_scheme",
                           choices=["corrected", "same"])
            t.add_argument("--ref-factor", dest="ref_factor", type=int)
        t.add_argument("--out")
        t.add_argument("--check", action="store_const", const=True, default=None)

    sw = sub.add_parser("sweep", help="small-alpha robustness sweep")
    sw.add_argument("--alphas")
    sw.add_argument("--thetas")
    sw.add_argument("--tau", type=float)
    sw.add_argument("--M", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out")
    sw.add_argument("--check", action="store_const", const=True, default=None)

    d = sub.add_parser("decay", help="magnitudes of the shift weights")
    d.add_argument("--thetas")
    d.add_argument("--n", type=int)
    d.add_argument("--out")
    d.add_argument("--check", action="store_const", const=True, default=None)
    return p


def load_options(args: argparse.Namespace) -> dict:
    """Merge the config-file section for the command with explicit flags."""
    opts: dict = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise harness.ConfigError(f"cannot read config file {path}")
        if cp.has_section(args.command):
            opts.update(cp[args.command])
    for k, v in vars(args).items():
        if k in ("config", "verbose", "command"):
            continue
        if v is not None:
            opts[k] = v
    out = {}
    for k, v in opts.items():
        conv = CONVERTERS.get(k, str)
        try:
            out[k] = conv(v)
        except ValueError as exc:
            raise harness.ConfigError(f"bad value for {k}: {v!r} ({exc})") from None
    return out


def _out(opts):
    return opts.get("out") or sys.stdout


def cmd_weights(opts) -> int:
    kind = opts.get("kind", "omega")
    theta, N = opts.get("theta", 0.0), opts.get("N", 100)
    if N < 0:
        raise harness.ConfigError("N must be nonnegative")
    if kind == "shift":
        ws = shift_weights(BDF2, theta, N)
    else:
        ws = omega_weights(BDF2, BDF2, opts.get("alpha", 0.5), theta, N)
    harness.weights_to_csv(ws, _out(opts))
    return EXIT_OK


def cmd_solve(opts) -> int:
    alpha = opts.get("alpha", 0.5)
    theta = opts.get("theta", 0.0)
    tau = opts.get("tau", 2.0**-7)
    t_end = opts.get("t_end", 0.5)
    N = int(round(t_end / tau))
    if N < 1 or not math.isclose(N * tau, t_end, rel_tol=1e-9):
        raise harness.ConfigError(f"t_end={t_end} is not a multiple of tau={tau}")
    problem = {"smooth": harness.example1_smooth, "indicator": harness.example1_indicator,
               "example2": harness.example2}[opts.get("problem", "smooth")](alpha)
    space = stepper.Space.build(problem.a, problem.b, opts.get("M", 1023))
    cfg = stepper.SchemeConfig(alpha, theta, tau, N, corrected=not opts.get("standard", False),
                               shift_cutoff=opts.get("shift_cutoff"))
    traj = stepper.solve(cfg, problem, space)
    U = traj.U(N)
    if not np.all(np.isfinite(U)):
        raise FloatingPointError("solution is not finite")
    with harness.open_output(_out(opts)) as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for x, u in zip(space.mesh.interior, U):
            w.writerow([harness.fmt(x), harness.fmt(u)])
    return EXIT_OK


def _experiment(kind, opts, **extra) -> harness.ExperimentConfig:
    keys = ("cells", "M", "workers", "shift_cutoff", "reference", "reference_scheme", "ref_factor")
    kw = {k: opts[k] for k in keys if k in opts}
    if "taus" in opts:
        kw["taus"] = tuple(opts["taus"])
    kw.update(extra)
    return harness.ExperimentConfig(kind, output=opts.get("out") or sys.stdout, **kw)


def _report(violations, check) -> int:
    for v in violations:
        log.warning("threshold violated: %s", v)
    if check and violations:
        return EXIT_CHECK
    return EXIT_OK


def cmd_table(kind, opts) -> int:
    run = harness.run_table1 if kind == "table1" else harness.run_table2
    table = run(_experiment(kind, opts))
    return _report(table.violations(), opts.get("check", False))


def cmd_sweep(opts) -> int:
    cfg = _experiment("alpha_sweep", opts, taus=(opts.get("tau", 2.0**-7),))
    res = harness.run_alpha_sweep(cfg, alphas=opts.get("alphas", harness.SWEEP_ALPHAS),
                                  thetas=opts.get("thetas", harness.SWEEP_THETAS))
    return _report(res.violations(), opts.get("check", False))


def cmd_decay(opts) -> int:
    cfg = harness.ExperimentConfig("weight_decay", output=opts.get("out") or sys.stdout,
                                   decay_n=opts.get("n", 60))
    res = harness.run_weight_decay(cfg, thetas=opts.get("thetas", harness.DECAY_THETAS))
    return _report(res.violations(), opts.get("check", False))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        opts = load_options(args)
        if args.command == "weights":
            return cmd_weights(opts)
        if args.command == "solve":
            return cmd_solve(opts)
        if args.command in ("table1", "table2"):
            return cmd_table(args.command, opts)
        if args.command == "sweep":
            return cmd_sweep(opts)
        return cmd_decay(opts)
    # LinAlgError and DomainError are ValueErrors too, so they go first
    except (np.linalg.LinAlgError, DomainError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except BrokenPipeError:
        # output piped into head and the like
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
