"""Local stability of a 1-cycle: Jacobian of the map, the slope criterion and spectral checks.

Notation: ``E = exp(T A)``, ``J = E B``, ``D = A X`` at the fixed point, and the
closed-loop Jacobian ``Q'(X) = E + (Fp J + Phip D) C``.  The scale-free
version ``script_Q(T, xi, eta) = E + (xi J + eta Dbar) C`` uses
``Dbar = A (exp(-T A) - I)^{-1} B``, so ``D = lam * Dbar`` and
``eta = lam * Phip``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import ChainPlant, ScalarFunction, divided_difference, eig3, opitz_apply
from .poincare import FixedPoint

__all__ = [
    "HypothesisError",
    "SpectralStatements",
    "ScriptQParams",
    "StabilityReport",
    "compute_JD",
    "criterion_det",
    "criterion_linear",
    "diagonalizer",
    "jacobian",
    "lemma1_check",
    "script_Q",
    "spectral_floor",
    "stability_report",
    "w_modal",
    "w_resolvent",
]

EIG_TOL = 1e-9


class HypothesisError(ValueError):
    """Slope signs or rate ordering outside the range where the criterion applies."""


def _check_hypotheses(plant: ChainPlant, Fp: float, Phip: float) -> None:
    if not plant.ordered:
        raise HypothesisError(f"the slope criterion assumes a1 < a2 < a3, got {plant.rates}")
    if Fp > 0 or Phip < 0:
        raise HypothesisError(
            f"the slope criterion assumes F'(y0) <= 0 and Phi'(y0) >= 0, got ({Fp}, {Phip})"
        )


def compute_JD(plant: ChainPlant, fp: FixedPoint, strict: bool = True):
    """``J = exp(T A) B`` and ``D = A X``.

    For a genuine fixed point ``J > 0`` and ``D < 0`` componentwise; a sign
    violation means the plant and fixed point do not belong together.
    """
    E = opitz_apply(ScalarFunction.EXP, plant, fp.spec.T)
    J = E[:, 0].copy()
    D = plant.A @ fp.X
    if strict and not (np.all(J > 0) and np.all(D < 0)):
        raise ValueError(f"inconsistent fixed point: expected J > 0 and D < 0, got J={J}, D={D}")
    return J, D


def jacobian(plant: ChainPlant, fp: FixedPoint, Fp: float, Phip: float) -> np.ndarray:
    E = opitz_apply(ScalarFunction.EXP, plant, fp.spec.T)
    J, D = compute_JD(plant, fp, strict=False)
    return E + np.outer(Fp * J + Phip * D, plant.C)


def _resolvent_row(plant, T, z):
    # C (z I - exp(T A))^{-1}
    E = opitz_apply(ScalarFunction.EXP, plant, T)
    return np.linalg.solve((z * np.eye(3) - E).T, plant.C)


def linear_coefficients(plant: ChainPlant, fp: FixedPoint) -> tuple[float, float]:
    """``(c_J, c_D)`` with ``lhs = c_J Fp + c_D Phip``; the border is ``lhs = -1``."""
    J, D = compute_JD(plant, fp, strict=False)
    row = -_resolvent_row(plant, fp.spec.T, -1.0)  # C (I + E)^{-1}
    return float(row @ J), float(row @ D)


def criterion_linear(plant, fp, Fp, Phip) -> tuple[float, bool]:
    """``C (I + exp(T A))^{-1} (Fp J + Phip D) > -1``; returns ``(lhs, stable)``."""
    _check_hypotheses(plant, Fp, Phip)
    cJ, cD = linear_coefficients(plant, fp)
    lhs = cJ * Fp + cD * Phip
    return lhs, bool(lhs > -1.0)


def criterion_det(plant, fp, Fp, Phip) -> tuple[float, bool]:
    """``det(-I - Q'(X)) < 0``; returns ``(chi(-1), stable)``."""
    _check_hypotheses(plant, Fp, Phip)
    chi = float(np.linalg.det(-np.eye(3) - jacobian(plant, fp, Fp, Phip)))
    return chi, bool(chi < 0.0)


def spectral_floor(plant: ChainPlant, T: float) -> float:
    return math.exp(-plant.rates[2] * T)


@dataclass(frozen=True)
class StabilityReport:
    T: float
    y0: float
    lam: float
    Fp: float
    Phip: float
    J: np.ndarray
    D: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    spectral_radius: float
    criterion_linear_lhs: float
    chi_minus_one: float
    verdict_linear: bool
    verdict_det: bool
    verdict_eigen: bool

    @property
    def stable(self) -> bool:
        """Local stability decided by the multipliers themselves."""
        return self.verdict_eigen

    @property
    def verdicts_agree(self) -> bool:
        return self.verdict_linear == self.verdict_det == self.verdict_eigen


def stability_report(plant: ChainPlant, fp: FixedPoint, Fp: float, Phip: float) -> StabilityReport:
    lhs, v_lin = criterion_linear(plant, fp, Fp, Phip)
    chi, v_det = criterion_det(plant, fp, Fp, Phip)
    Jm = jacobian(plant, fp, Fp, Phip)
    eig = eig3(Jm)
    J, D = compute_JD(plant, fp, strict=False)
    return StabilityReport(
        T=fp.spec.T,
        y0=fp.y0,
        lam=fp.spec.lam,
        Fp=float(Fp),
        Phip=float(Phip),
        J=J,
        D=D,
        jacobian=Jm,
        eigenvalues=eig.values,
        spectral_radius=eig.spectral_radius,
        criterion_linear_lhs=lhs,
        chi_minus_one=chi,
        verdict_linear=v_lin,
        verdict_det=v_det,
        verdict_eigen=bool(eig.spectral_radius < 1.0 - EIG_TOL),
    )


# --- scale-free matrix family and its spectral properties --------------------


@dataclass(frozen=True)
class ScriptQParams:
    T: float
    xi: float
    eta: float

    @classmethod
    def from_slopes(cls, T, lam, Fp, Phip):
        return cls(T=float(T), xi=float(Fp), eta=float(lam * Phip))


def dbar(plant: ChainPlant, T: float) -> np.ndarray:
    """``A (exp(-T A) - I)^{-1} B``, i.e. ``D`` per unit impulse weight."""
    return plant.A @ opitz_apply(ScalarFunction.MU, plant, T)[:, 0]


def script_Q(plant: ChainPlant, p: ScriptQParams) -> np.ndarray:
    E = opitz_apply(ScalarFunction.EXP, plant, p.T)
    return E + np.outer(p.xi * E[:, 0] + p.eta * dbar(plant, p.T), plant.C)


def det_script_Q_closed_form(plant: ChainPlant, p: ScriptQParams) -> float:
    """``det exp(TA) * (1 + eta T g1 g2 psi[-a1 T, -a2 T, -a3 T])``.

    ``psi(z) = z / (1 - e^z)`` is concave on ``z < 0``, so its second divided
    difference is non-positive and ``det script_Q <= det exp(TA)`` whenever
    ``eta >= 0``.
    """
    a1, a2, a3 = plant.rates
    g1, g2 = plant.gains
    T = p.T
    psi2 = divided_difference(ScalarFunction.PSI, [-a1 * T, -a2 * T, -a3 * T])
    return math.exp(-(a1 + a2 + a3) * T) * (1.0 + p.eta * T * g1 * g2 * psi2)


def diagonalizer(plant: ChainPlant) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``S`` and ``S^{-1}`` with ``S^{-1} A S = diag(-a1, -a2, -a3)``.

    Columns of ``S`` are eigenvectors of ``A`` scaled to a unit diagonal.
    """
    a1, a2, a3 = plant.rates
    g1, g2 = plant.gains
    S = np.array([
        [1.0, 0.0, 0.0],
        [g1 / (a2 - a1), 1.0, 0.0],
        [g1 * g2 / ((a2 - a1) * (a3 - a1)), g2 / (a3 - a2), 1.0],
    ])
    Sinv = np.array([
        [1.0, 0.0, 0.0],
        [-g1 / (a2 - a1), 1.0, 0.0],
        # positive: g1 g2 / ((a2-a1)(a3-a2)) - g1 g2 / ((a2-a1)(a3-a1))
        [g1 * g2 / ((a3 - a2) * (a3 - a1)), -g2 / (a3 - a2), 1.0],
    ])
    return S, Sinv


def w_resolvent(plant: ChainPlant, p: ScriptQParams, z) -> complex:
    """``w(z) = 1 - C (z I - exp(TA))^{-1} (xi J + eta Dbar)``."""
    E = opitz_apply(ScalarFunction.EXP, plant, p.T)
    v = p.xi * E[:, 0] + p.eta * dbar(plant, p.T)
    return 1.0 - plant.C @ np.linalg.solve(z * np.eye(3) - E, v.astype(complex))


def w_modal(plant: ChainPlant, p: ScriptQParams, z) -> complex:
    """Same ``w(z)`` through the eigenbasis of ``A``: ``1 - sum_i cbar_i bbar_i rho_z(-a_i)``."""
    S, Sinv = diagonalizer(plant)
    bbar = Sinv @ plant.B
    cbar = plant.C @ S
    total = 0.0
    for i, a in enumerate(plant.rates):
        s = -a
        e = math.exp(p.T * s)
        rho = (p.xi * e + p.eta * s / math.expm1(-p.T * s)) / (z - e)
        total = total + cbar[i] * bbar[i] * rho
    return 1.0 - total


@dataclass(frozen=True)
class SpectralStatements:
    eigenvalues: np.ndarray
    no_eigenvalue_above: bool  # no real eigenvalue above exp(-a1 T)
    real_eigenvalue_in_band: bool  # a real eigenvalue in [exp(-a3 T), exp(-a1 T)]
    pair_product_bounded: bool  # z2 z3 <= exp(-(a1 + a2) T)
    instability_iff_real_below_minus_one: bool
    det_bounded: bool  # det <= exp(-(a1 + a2 + a3) T)
    z1: complex
    pair_product: float

    @property
    def all_hold(self) -> bool:
        return (self.no_eigenvalue_above and self.real_eigenvalue_in_band
                and self.pair_product_bounded and self.instability_iff_real_below_minus_one)


def lemma1_check(plant: ChainPlant, p: ScriptQParams, tol: float = EIG_TOL) -> SpectralStatements:
    """Evaluate the four spectral statements about ``script_Q`` (plus the det bound).

    Nothing is asserted here; each statement is reported as observed on the
    computed eigenvalues so violations can be recorded.
    """
    if p.xi > 0 or p.eta < 0 or p.T <= 0:
        raise HypothesisError("spectral statements assume T > 0, xi <= 0, eta >= 0")
    plant.require_ordered()
    a1, a2, a3 = plant.rates
    lo, hi = math.exp(-a3 * p.T), math.exp(-a1 * p.T)
    Q = script_Q(plant, p)
    ev = eig3(Q).values
    real = np.abs(ev.imag) <= tol * (1.0 + np.abs(ev))
    re = ev.real

    s1 = not np.any(real & (re > hi + tol))
    in_band = real & (re >= lo - tol) & (re <= hi + tol)
    s2 = bool(np.any(in_band))
    # z1: the real eigenvalue in the band, else the real one closest to it
    dist = np.where(real, np.maximum(lo - re, 0) + np.maximum(re - hi, 0), np.inf)
    k = int(np.argmin(dist))
    z1 = ev[k]
    rest = np.delete(ev, k)
    pair = float((rest[0] * rest[1]).real)
    s3 = pair <= math.exp(-(a1 + a2) * p.T) + tol
    unstable = np.abs(ev).max() >= 1.0 - tol
    s4 = unstable == bool(np.any(real & (re <= -1.0 + tol)))
    det_ok = float(np.linalg.det(Q)) <= math.exp(-(a1 + a2 + a3) * p.T) + tol
    return SpectralStatements(ev, bool(s1), s2, bool(s3), bool(s4), bool(det_ok), z1, pair)
