"""Count where the slope criterion and the spectral statements disagree with the multipliers.

Draws random admissible cases (same generator as the acceptance suite) and
tallies, per statement, how often it fails; then checks one disagreement
against the nonlinear map.
"""
import argparse
import warnings
from collections import Counter

import numpy as np

from igo.model import Modulation
from igo.numerics import eig3
from igo.poincare import CycleSpec, fixed_point_analytic, iterate
from igo.sampling import random_case
from igo.stability import ScriptQParams, criterion_det, criterion_linear, jacobian, lemma1_check

STATEMENTS = ("no_eigenvalue_above", "real_eigenvalue_in_band", "pair_product_bounded",
              "instability_iff_real_below_minus_one", "det_bounded")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("-n", type=int, default=600)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    warnings.simplefilter("ignore")  # near-multiple root warnings are expected here

    tally = Counter()
    first = None
    for _ in range(args.n):
        c = random_case(rng)
        fp = fixed_point_analytic(c.plant, CycleSpec(c.lam, c.T))
        rho = eig3(jacobian(c.plant, fp, c.Fp, c.Phip)).spectral_radius
        lin = criterion_linear(c.plant, fp, c.Fp, c.Phip)[1]
        det = criterion_det(c.plant, fp, c.Fp, c.Phip)[1]
        if abs(rho - 1) >= 1e-9 and not (lin == det == (rho < 1)):
            tally["criterion"] += 1
            tally[f"criterion says {'stable' if lin else 'unstable'}"] += 1
            if first is None and lin and rho > 1.05:
                first = (c, fp, rho)
        rep = lemma1_check(c.plant, ScriptQParams(c.T, c.xi, c.eta))
        for s in STATEMENTS:
            tally[s] += not getattr(rep, s)

    print(f"{args.n} cases, seed {args.seed}")
    for k in ("criterion", "criterion says stable", "criterion says unstable", *STATEMENTS):
        print(f"  {k:40s} {tally[k]:5d} violations")

    if first is not None:
        c, fp, rho = first
        # saturation a decade either side of the anchor
        mod = Modulation.anchored(fp.y0, c.lam, c.T, c.Fp, c.Phip,
                                  bounds={"F1": c.lam / 10, "F2": 10 * c.lam, "Phi1": c.T / 10, "Phi2": 10 * c.T})
        orbit = iterate(c.plant, mod, fp.X * (1 + 1e-6), 30)
        d = [np.linalg.norm(x - fp.X) for x in orbit]
        print(f"\nexample: rho={rho:.4f}, criterion says stable")
        print(f"  distance from the cycle over 30 firings: {d[0]:.3g} -> {d[10]:.3g} -> {d[-1]:.3g}")


if __name__ == "__main__":
    main()
