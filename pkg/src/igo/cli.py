"""Command line front end.

    igo fixed-point [--config FILE] [--lambda L] [--T T]
    igo stability   [--Fp F] [--Phip P]
    igo simulate    [--x0 fixed|x1,x2,x3] [--firings N | --time T] [--out DIR]
    igo sweep       [--out DIR]
    igo design      [--out DIR]

Without ``--config`` the bundled atracurium example is used.  Exit codes:
0 success, 2 invalid input, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .design import InfeasibleDesign, optimize_slopes, slope_sweep, write_sweep_csv
from .hybridsim import simulate, write_events_csv, write_trace_csv
from .poincare import StateCeilingError, detect_cycle, fixed_point_analytic
from .stability import HypothesisError, stability_report

# Published border coefficients for the atracurium 1-cycle (lambda=300, T=20).
# They misclassify the (-1, 4) design, so they are reported but never used.
REFERENCE_BORDER = {"c_J": 0.0454, "c_D": -0.8550}
EXIT_INVALID = 2
EXIT_IO = 3


def _num(x):
    """Round to 12 significant digits for JSON output."""
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    v = float(f"{float(x):.12g}")
    return 0.0 if v == 0 else v


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _out_dir(args, cfg) -> Path:
    d = args.out or cfg.directory or os.environ.get("IGO_OUT_DIR") or "igo_out"
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _apply_overrides(cfg, args):
    for name, attr in (("lam", "lam"), ("T", "T"), ("Fp", "Fp"), ("Phip", "Phip")):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "firings", None) is not None:
        cfg.horizon = {"firings": args.firings}
    if getattr(args, "time", None) is not None:
        cfg.horizon = {"time": args.time}
    if getattr(args, "x0", None) is not None:
        if args.x0 == "fixed":
            cfg.x0 = None
        else:
            try:
                cfg.x0 = [float(v) for v in args.x0.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad --x0 value {args.x0!r}") from exc
    cfg.check()
    return cfg


def cmd_fixed_point(cfg, args) -> int:
    fp = fixed_point_analytic(cfg.plant, cfg.cycle)
    print(f"1-cycle lambda={cfg.lam:g} T={cfg.T:g}: X = {np.array2string(fp.X, precision=6)}, "
          f"y0 = {fp.y0:.6g}", file=sys.stderr)
    print(_dump({"X": _num(fp.X), "y0": _num(fp.y0), "lambda": _num(cfg.lam), "T": _num(cfg.T)}))
    return 0


def _report_dict(rep) -> dict:
    return {
        "T": _num(rep.T),
        "y0": _num(rep.y0),
        "lambda": _num(rep.lam),
        "Fp": _num(rep.Fp),
        "Phip": _num(rep.Phip),
        "J": _num(rep.J),
        "D": _num(rep.D),
        "jacobian": _num(rep.jacobian),
        "eigenvalues": [_num(complex(z)) for z in rep.eigenvalues],
        "rho": _num(rep.spectral_radius),
        "lhs_linear": _num(rep.criterion_linear_lhs),
        "chi_minus_one": _num(rep.chi_minus_one),
        "stable": rep.stable,
        "stable_linear": rep.verdict_linear,
        "stable_det": rep.verdict_det,
        "stable_eigen": rep.verdict_eigen,
        "verdicts_agree": rep.verdicts_agree,
    }


def cmd_stability(cfg, args) -> int:
    fp = fixed_point_analytic(cfg.plant, cfg.cycle)
    rep = stability_report(cfg.plant, fp, cfg.Fp, cfg.Phip)
    print(_dump(_report_dict(rep)))
    return 0


def cmd_simulate(cfg, args) -> int:
    plant = cfg.plant
    fp = fixed_point_analytic(plant, cfg.cycle)
    mod = cfg.modulation(fp.y0)
    x0 = (fp.X if cfg.x0 is None else np.asarray(cfg.x0, float)) + np.asarray(cfg.perturbation)
    if np.any(x0 < 0):
        raise ConfigError("perturbed initial state must be nonnegative")
    horizon = {"n_firings": int(cfg.horizon["firings"])} if "firings" in cfg.horizon \
        else {"t_end": float(cfg.horizon["time"])}
    trace = simulate(plant, mod, x0, h=cfg.sample_step, **horizon)
    out = _out_dir(args, cfg)
    write_trace_csv(trace, out / "trace.csv")
    write_events_csv(trace, out / "events.csv")
    orbit = trace.event_states()
    m_max = min(8, len(orbit) // 4)
    m = detect_cycle(orbit, m_max=m_max) if m_max >= 1 else None
    if m_max < 1:
        label, period = "unclassified (too few firings)", None
    elif m is None:
        label, period = "aperiodic", None
    else:
        label, period = f"{m}-cycle", float(sum(e.T for e in trace.events[-m:]))
    print(f"{label}" + (f", period {period:.6g}" if period is not None else ""), file=sys.stderr)
    print(_dump({"classification": label, "multiplicity": m, "period": _num(period) if period else None,
                 "firings": len(trace.events), "trace": str(out / "trace.csv"),
                 "events": str(out / "events.csv")}))
    return 0


def cmd_sweep(cfg, args) -> int:
    grid = slope_sweep(cfg.plant, cfg.cycle, cfg.Fp_range, cfg.Phip_range, cfg.n_f, cfg.n_p)
    out = _out_dir(args, cfg)
    write_sweep_csv(grid, out / "sweep.csv")
    cJ, cD = grid.c_J, grid.c_D
    summary = {
        "c_J": _num(cJ),
        "c_D": _num(cD),
        "inequality": f"{_num(cJ)}*Fp {'-' if cD < 0 else '+'} {_num(abs(cD))}*Phip > -1",
        "cells": int(grid.rho.size),
        "stable_cells": int(grid.stable_linear.sum()),
        "disagreements_linear_vs_eigen": int((grid.stable_linear != grid.stable_eigen).sum()),
        "reference_coefficients": REFERENCE_BORDER,
        "reference_note": "published coefficients for the atracurium example; "
                          "compare against c_J, c_D recomputed above",
    }
    with (out / "border.json").open("w") as fh:
        fh.write(_dump(summary) + "\n")
    print(f"stability border: {summary['inequality']} "
          f"(reference: {REFERENCE_BORDER['c_J']}*Fp {REFERENCE_BORDER['c_D']}*Phip > -1)",
          file=sys.stderr)
    print(_dump(summary))
    return 0


def cmd_design(cfg, args) -> int:
    opt = optimize_slopes(cfg.plant, cfg.cycle, cfg.Fp_range, cfg.Phip_range)
    fp = fixed_point_analytic(cfg.plant, cfg.cycle)
    rep = stability_report(cfg.plant, fp, opt.Fp, opt.Phip)
    mod = cfg.modulation(fp.y0).with_slopes(opt.Fp, opt.Phip)
    result = {
        "Fp": _num(opt.Fp),
        "Phip": _num(opt.Phip),
        "rho": _num(opt.rho),
        "grid_rho": _num(opt.grid_rho),
        "modulation": {k: (_num(v) if isinstance(v, float) else v) for k, v in mod.to_dict().items()},
        "report": _report_dict(rep),
    }
    out = _out_dir(args, cfg)
    with (out / "design.json").open("w") as fh:
        fh.write(_dump(result) + "\n")
    print(_dump(result))
    return 0


COMMANDS = {
    "fixed-point": cmd_fixed_point,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "design": cmd_design,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: bundled atracurium example)")
    common.add_argument("--lambda", dest="lam", type=float, help="impulse weight of the 1-cycle")
    common.add_argument("--T", type=float, help="period of the 1-cycle")
    common.add_argument("--Fp", type=float, help="slope of the amplitude modulation at y0")
    common.add_argument("--Phip", type=float, help="slope of the frequency modulation at y0")
    common.add_argument("--out", help="output directory (default: $IGO_OUT_DIR or ./igo_out)")

    parser = argparse.ArgumentParser(prog="igo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "simulate":
            sp.add_argument("--x0", help='"fixed" or comma separated x1,x2,x3')
            hz = sp.add_mutually_exclusive_group()
            hz.add_argument("--firings", type=int)
            hz.add_argument("--time", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else 0
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, HypothesisError, InfeasibleDesign, StateCeilingError, ValueError) as exc:
        print(f"igo: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"igo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
