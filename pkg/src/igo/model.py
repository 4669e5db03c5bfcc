"""Amplitude and frequency modulation functions of the impulsive feedback."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.special import expit

__all__ = ["Modulation", "validate", "eval_F", "eval_Phi"]

KINDS = ("affine", "constant", "hill")
_EPS = 1e-9


@dataclass(frozen=True)
class Modulation:
    """F (impulse weight) and Phi (inter-impulse interval) as functions of the output.

    Both are pinned at the anchor output ``y0``: ``F(y0) = lam``,
    ``Phi(y0) = T``, with slopes ``Fp`` and ``Phip`` there.

    kind
        ``"affine"``: the tangent line clamped to ``[F1, F2]`` / ``[Phi1, Phi2]``.
        ``"constant"``: ``F = lam`` and ``Phi = T`` everywhere; slopes are ignored.
        ``"hill"``: Hill sigmoids between the bounds, matched to the anchor
        value and slope.  Defined for ``y >= 0``; negative outputs are treated as 0.
    """

    kind: str
    y0: float
    lam: float
    T: float
    Fp: float
    Phip: float
    F1: float
    F2: float
    Phi1: float
    Phi2: float

    @classmethod
    def anchored(cls, y0, lam, T, Fp=0.0, Phip=0.0, bounds=None, kind="affine"):
        """Build a modulation through ``(y0, lam, T)``.

        Missing bounds default to half the anchor value on either side:
        ``F1 = max(eps, lam/2)``, ``F2 = 3 lam/2``, and likewise for Phi.
        """
        bounds = dict(bounds or {})
        dF, dP = lam / 2.0, T / 2.0
        F1 = bounds.get("F1")
        F2 = bounds.get("F2")
        Phi1 = bounds.get("Phi1")
        Phi2 = bounds.get("Phi2")
        return cls(
            kind=kind,
            y0=float(y0),
            lam=float(lam),
            T=float(T),
            Fp=float(Fp),
            Phip=float(Phip),
            F1=float(max(_EPS, lam - dF) if F1 is None else F1),
            F2=float(lam + dF if F2 is None else F2),
            Phi1=float(max(_EPS, T - dP) if Phi1 is None else Phi1),
            Phi2=float(T + dP if Phi2 is None else Phi2),
        )

    @classmethod
    def constant(cls, lam, T, y0=0.0):
        # bounds collapse onto the constant values
        return cls("constant", float(y0), float(lam), float(T), 0.0, 0.0,
                   float(lam), float(lam), float(T), float(T))

    def with_slopes(self, Fp, Phip) -> "Modulation":
        return replace(self, Fp=float(Fp), Phip=float(Phip))

    def to_dict(self) -> dict:
        return asdict(self)

    # --- evaluation -------------------------------------------------------

    def F(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            out = np.full_like(y, self.lam)
        elif self.kind == "hill":
            out = _hill(y, self.y0, self.lam, self.Fp, self.F1, self.F2, decreasing=True)[0]
        else:
            out = np.clip(self.lam + self.Fp * (y - self.y0), self.F1, self.F2)
        return out if out.ndim else float(out)

    def Phi(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            out = np.full_like(y, self.T)
        elif self.kind == "hill":
            out = _hill(y, self.y0, self.T, self.Phip, self.Phi1, self.Phi2, decreasing=False)[0]
        else:
            out = np.clip(self.T + self.Phip * (y - self.y0), self.Phi1, self.Phi2)
        return out if out.ndim else float(out)

    def dF(self, y) -> float:
        """Slope of F at ``y`` (right derivative at a clamp corner)."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "hill":
            return float(_hill(y, self.y0, self.lam, self.Fp, self.F1, self.F2, decreasing=True)[1])
        v = self.lam + self.Fp * (y - self.y0)
        return self.Fp if self.F1 < v < self.F2 else 0.0

    def dPhi(self, y) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "hill":
            return float(_hill(y, self.y0, self.T, self.Phip, self.Phi1, self.Phi2, decreasing=False)[1])
        v = self.T + self.Phip * (y - self.y0)
        return self.Phip if self.Phi1 < v < self.Phi2 else 0.0


def _hill(y, y0, value, slope, lo, hi, decreasing):
    """Hill sigmoid from ``lo`` to ``hi`` through ``(y0, value)`` with the given slope.

    With ``s = (value - lo) / (hi - lo)`` the exponent is
    ``n = |slope| y0 / ((hi - lo) s (1 - s))`` and the half-saturation
    constant follows from the anchor value.  Returns ``(value, derivative)``.
    """
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    if slope == 0.0:
        return np.full_like(y, value), np.zeros_like(y)
    span = hi - lo
    s = (value - lo) / span
    if not (0.0 < s < 1.0) or y0 <= 0:
        raise ValueError("hill modulation needs y0 > 0 and the anchor strictly inside the bounds")
    n = abs(slope) * y0 / (span * s * (1.0 - s))
    r0 = (1.0 - s) if decreasing else s
    # rising fraction r(y) = u / (1 + u), u = (y / K)^n, in logistic form
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_K = np.log(y0) - np.log(r0 / (1.0 - r0)) / n
    if not np.isfinite(log_K):
        # exponent underflowed: the curve is flat at the anchor value
        return np.full_like(y, value), np.zeros_like(y)
    with np.errstate(divide="ignore"):
        r = expit(n * (np.log(y) - log_K))
        dr = np.where(y > 0, n * r * (1.0 - r) / np.where(y > 0, y, 1.0), 0.0)
    if decreasing:
        return hi - span * r, -span * dr
    return lo + span * r, span * dr


def eval_F(m: Modulation, y):
    return m.F(y)


def eval_Phi(m: Modulation, y):
    return m.Phi(y)


def validate(m: Modulation) -> list[str]:
    """Return the list of violated modulation invariants (empty when valid).

    Hill shapes are checked for monotonicity on 1001 points over ``[0, 10*y0]``.
    """
    out = []
    if m.kind not in KINDS:
        out.append(f"unknown modulation kind {m.kind!r}")
        return out
    if not (0 < m.F1 <= m.lam <= m.F2):
        out.append("anchor outside bounds: need 0 < F1 <= lambda <= F2")
    if not (0 < m.Phi1 <= m.T <= m.Phi2):
        out.append("anchor outside bounds: need 0 < Phi1 <= T <= Phi2")
    if m.kind == "constant":
        return out
    if m.Fp > 0:
        out.append("amplitude modulation must be non-increasing")
    if m.Phip < 0:
        out.append("frequency modulation must be non-decreasing")
    if m.kind == "hill" and not out:
        try:
            grid = np.linspace(0.0, 10.0 * max(m.y0, 1.0), 1001)
            if np.any(np.diff(m.F(grid)) > 1e-12):
                out.append("amplitude modulation must be non-increasing")
            if np.any(np.diff(m.Phi(grid)) < -1e-12):
                out.append("frequency modulation must be non-decreasing")
        except ValueError as exc:
            out.append(str(exc))
    return out
