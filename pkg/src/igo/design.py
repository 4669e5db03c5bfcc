"""Designer's workflow: realize a target 1-cycle and tune the modulation slopes."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .model import Modulation, validate
from .numerics import ChainPlant, eig3
from .poincare import CycleSpec, FixedPoint, fixed_point_analytic
from .stability import (
    EIG_TOL,
    StabilityReport,
    _check_hypotheses,
    compute_JD,
    jacobian,
    linear_coefficients,
    stability_report,
)

__all__ = [
    "InfeasibleDesign",
    "SlopeOptimum",
    "SweepGrid",
    "design_for_target",
    "optimize_slopes",
    "slope_sweep",
    "write_sweep_csv",
]


class InfeasibleDesign(ValueError):
    pass


def design_for_target(
    plant: ChainPlant,
    spec: CycleSpec,
    Fp: float,
    Phip: float,
    bounds: dict | None = None,
    kind: str = "affine",
) -> tuple[Modulation, FixedPoint, StabilityReport]:
    _check_hypotheses(plant, Fp, Phip)
    fp = fixed_point_analytic(plant, spec)
    mod = Modulation.anchored(fp.y0, spec.lam, spec.T, Fp, Phip, bounds=bounds, kind=kind)
    problems = validate(mod)
    if problems:
        raise ValueError("target cycle not realizable: " + "; ".join(problems))
    return mod, fp, stability_report(plant, fp, Fp, Phip)


@dataclass
class SweepGrid:
    Fp: np.ndarray  # (n_f,)
    Phip: np.ndarray  # (n_p,)
    rho: np.ndarray  # (n_f, n_p)
    stable_linear: np.ndarray
    stable_det: np.ndarray
    c_J: float
    c_D: float

    @property
    def stable_eigen(self) -> np.ndarray:
        return self.rho < 1.0 - EIG_TOL

    def cell(self, Fp: float, Phip: float) -> tuple[int, int]:
        i = int(np.argmin(np.abs(self.Fp - Fp)))
        j = int(np.argmin(np.abs(self.Phip - Phip)))
        return i, j

    def border_Phip(self, Fp: float) -> float:
        """Frequency slope where ``c_J Fp + c_D Phip = -1`` (inf if no crossing)."""
        if self.c_D >= 0:
            return math.inf
        return (-1.0 - self.c_J * Fp) / self.c_D

    def rows(self):
        for i, f in enumerate(self.Fp):
            for j, p in enumerate(self.Phip):
                yield f, p, self.rho[i, j], self.stable_linear[i, j], self.stable_det[i, j]


def slope_sweep(
    plant: ChainPlant,
    spec: CycleSpec,
    Fp_range=(-2.0, 0.0),
    Phip_range=(0.0, 6.0),
    n_f: int = 61,
    n_p: int = 61,
) -> SweepGrid:
    """Spectral radius and both criterion verdicts over a slope grid.

    Cells are independent; they are evaluated in index order so the output is
    deterministic.
    """
    if n_f < 1 or n_p < 1:
        raise ValueError("sweep grid must be nonempty")
    f_lo, f_hi = Fp_range
    p_lo, p_hi = Phip_range
    if not (f_lo <= f_hi <= 0 and 0 <= p_lo <= p_hi):
        raise ValueError("need f_lo <= f_hi <= 0 <= p_lo <= p_hi")
    _check_hypotheses(plant, 0.0, 0.0)
    fp = fixed_point_analytic(plant, spec)
    cJ, cD = linear_coefficients(plant, fp)
    Fs = np.linspace(f_lo, f_hi, n_f)
    Ps = np.linspace(p_lo, p_hi, n_p)
    rho = np.empty((n_f, n_p))
    s_lin = np.empty((n_f, n_p), dtype=bool)
    s_det = np.empty((n_f, n_p), dtype=bool)
    eye = np.eye(3)
    E = jacobian(plant, fp, 0.0, 0.0)
    J, D = compute_JD(plant, fp)
    for i, f in enumerate(Fs):
        for j, p in enumerate(Ps):
            Jm = E + np.outer(f * J + p * D, plant.C)
            rho[i, j] = eig3(Jm).spectral_radius
            s_lin[i, j] = cJ * f + cD * p > -1.0
            s_det[i, j] = np.linalg.det(-eye - Jm) < 0.0
    return SweepGrid(Fs, Ps, rho, s_lin, s_det, cJ, cD)


def write_sweep_csv(grid: SweepGrid, path) -> Path:
    from .hybridsim import fmt

    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Fp", "Phip", "rho", "stable_linear", "stable_det"])
        for f, p, r, sl, sd in grid.rows():
            w.writerow([fmt(f), fmt(p), fmt(r), str(bool(sl)).lower(), str(bool(sd)).lower()])
    return path


@dataclass(frozen=True)
class SlopeOptimum:
    Fp: float
    Phip: float
    rho: float
    grid_rho: float  # best value on the coarse grid
    evaluations: int


def optimize_slopes(
    plant: ChainPlant,
    spec: CycleSpec,
    Fp_range=(-5.0, 0.0),
    Phip_range=(0.0, 5.0),
    n_grid: int = 41,
    budget: int = 200,
) -> SlopeOptimum:
    """Minimize the spectral radius of the Jacobian over a box of slopes.

    A coarse ``n_grid x n_grid`` scan picks the start; bounded Nelder-Mead
    with ``budget`` function evaluations refines it.  Only stable points
    (spectral radius below ``1 - 1e-9``) are admissible, and the refined
    point is kept only if it beats the grid.
    """
    f_lo, f_hi = map(float, Fp_range)
    p_lo, p_hi = map(float, Phip_range)
    if not (f_lo <= f_hi <= 0 and 0 <= p_lo <= p_hi):
        raise ValueError("slope box must satisfy f_lo <= f_hi <= 0 <= p_lo <= p_hi")
    _check_hypotheses(plant, 0.0, 0.0)
    fp = fixed_point_analytic(plant, spec)

    E = jacobian(plant, fp, 0.0, 0.0)
    J, D = compute_JD(plant, fp)

    def rho(v):
        return eig3(E + np.outer(v[0] * J + v[1] * D, plant.C)).spectral_radius

    Fs = np.linspace(f_lo, f_hi, n_grid if f_hi > f_lo else 1)
    Ps = np.linspace(p_lo, p_hi, n_grid if p_hi > p_lo else 1)
    vals = np.array([[rho((f, p)) for p in Ps] for f in Fs])
    feasible = vals < 1.0 - EIG_TOL
    if not feasible.any():
        cJ, cD = linear_coefficients(plant, fp)
        raise InfeasibleDesign(
            f"no stable slopes in the box; linear border is {cJ:.6g}*Fp + {cD:.6g}*Phip = -1"
        )
    i, j = np.unravel_index(np.argmin(np.where(feasible, vals, np.inf)), vals.shape)
    best = (float(Fs[i]), float(Ps[j]), float(vals[i, j]))
    n_eval = vals.size

    if f_hi > f_lo or p_hi > p_lo:
        def objective(v):
            r = rho(v)
            return r if r < 1.0 - EIG_TOL else 1.0 + r

        res = minimize(
            objective,
            x0=np.array(best[:2]),
            method="Nelder-Mead",
            bounds=[(f_lo, f_hi), (p_lo, p_hi)],
            options={"maxfev": budget, "xatol": 1e-10, "fatol": 1e-14},
        )
        n_eval += res.nfev
        f_opt = float(np.clip(res.x[0], f_lo, f_hi))
        p_opt = float(np.clip(res.x[1], p_lo, p_hi))
        r_opt = rho((f_opt, p_opt))
        if r_opt < best[2]:
            best = (f_opt, p_opt, r_opt)
    return SlopeOptimum(best[0], best[1], best[2], float(vals[i, j]), n_eval)
