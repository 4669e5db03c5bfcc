"""Regenerate the data behind the atracurium study.

Writes, under OUT (default ./results/atracurium):
  sweep.csv, border.json     spectral radius and verdicts over the slope plane
  cycle_1/                   trace from the fixed point, slopes (-1, 4)
  cycle_2/                   trace from a perturbed start, slopes (-1, 5.5)
  monotone/, overshoot/      transients for slopes (-0.1, 0.29) and (-1, 4)
  summary.json               fixed point, multipliers and transient ratios
"""
import argparse
import json
from pathlib import Path

import numpy as np

from igo.design import slope_sweep, write_sweep_csv
from igo.hybridsim import simulate, transient_metrics, write_events_csv, write_trace_csv
from igo.model import Modulation
from igo.numerics import ATRACURIUM
from igo.poincare import CycleSpec, detect_cycle, fixed_point_analytic
from igo.stability import stability_report


def run(out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    spec = CycleSpec(300.0, 20.0)
    fp = fixed_point_analytic(ATRACURIUM, spec)

    grid = slope_sweep(ATRACURIUM, spec)
    write_sweep_csv(grid, out / "sweep.csv")
    (out / "border.json").write_text(json.dumps({"c_J": grid.c_J, "c_D": grid.c_D}, indent=2) + "\n")

    runs = {
        "cycle_1": ((-1.0, 4.0), fp.X, 40),
        "cycle_2": ((-1.0, 5.5), fp.X + [1.0, 0.0, 0.0], 200),
        "monotone": ((-0.1, 0.29), fp.X + [20.0, 5.0, 1.0], 40),
        "overshoot": ((-1.0, 4.0), fp.X + [20.0, 5.0, 1.0], 60),
    }
    summary = {"X": fp.X.tolist(), "border": [grid.c_J, grid.c_D], "runs": {}}
    for name, (slopes, x0, n) in runs.items():
        mod = Modulation.anchored(fp.y0, spec.lam, spec.T, *slopes)
        tr = simulate(ATRACURIUM, mod, x0, n_firings=n)
        d = out / name
        d.mkdir(exist_ok=True)
        write_trace_csv(tr, d / "trace.csv")
        write_events_csv(tr, d / "events.csv")
        rep = stability_report(ATRACURIUM, fp, *slopes)
        entry = {
            "slopes": slopes,
            "multipliers": [[z.real, z.imag] for z in rep.eigenvalues],
            "rho": rep.spectral_radius,
            "cycle": detect_cycle(tr.event_states()),
        }
        if n >= 10:
            tm = transient_metrics(tr, fp)
            entry.update(ratio=tm.ratio, overshoot=tm.overshoot)
        summary["runs"][name] = entry
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/atracurium")
    args = ap.parse_args()
    s = run(Path(args.out))
    np.set_printoptions(precision=5, suppress=True)
    print("fixed point:", np.array(s["X"]))
    print(f"border: {s['border'][0]:.6g}*Fp + {s['border'][1]:.6g}*Phip > -1")
    for name, e in s["runs"].items():
        extra = f" ratio={e['ratio']:.4f} overshoot={e['overshoot']}" if e.get("ratio") else ""
        print(f"{name:10s} slopes={e['slopes']} rho={e['rho']:.4f} cycle={e['cycle']}{extra}")


if __name__ == "__main__":
    main()
