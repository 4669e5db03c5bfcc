"""Scalar divided differences and functions of the 3x3 chain matrix.

The plant matrix is lower bidiagonal, so any analytic ``f`` applied to ``T*A``
has a closed form through divided differences of ``f`` over the diagonal
(the Opitz formula).  A scaling-and-squaring Taylor exponential and a
closed-form 3x3 eigenvalue solver are kept here as independent references.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

__all__ = [
    "ATRACURIUM",
    "ChainPlant",
    "DomainError",
    "Eig3Result",
    "NearMultipleRootWarning",
    "ScalarFunction",
    "divided_difference",
    "eig3",
    "expm_oracle",
    "opitz_apply",
]

# Scaled diagonal points closer than this are evaluated through the matrix route.
FALLBACK_SEPARATION = 1e-3
# Below this the divided differences are meaningless and we refuse.
MIN_SEPARATION = 1e-6


class DomainError(ValueError):
    """A scalar function was evaluated outside its domain."""


class NearMultipleRootWarning(RuntimeWarning):
    pass


class ScalarFunction(str, Enum):
    EXP = "exp"
    MU = "mu"  # 1 / (exp(-x) - 1)
    PSI = "psi"  # x / (1 - exp(x))
    IDENTITY = "identity"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self in (ScalarFunction.MU, ScalarFunction.PSI) and np.any(x == 0.0):
            raise DomainError(f"{self.value} is undefined at 0")
        if self is ScalarFunction.EXP:
            out = np.exp(x)
        elif self is ScalarFunction.MU:
            out = 1.0 / np.expm1(-x)
        elif self is ScalarFunction.PSI:
            out = -x / np.expm1(x)
        else:
            out = x.copy()
        return out if out.ndim else float(out)

    def matrix(self, M: np.ndarray) -> np.ndarray:
        """Evaluate on a 3x3 matrix without divided differences."""
        M = np.asarray(M, dtype=float)
        eye = np.eye(3)
        if self is ScalarFunction.EXP:
            return expm_oracle(M)
        if self is ScalarFunction.MU:
            return np.linalg.inv(expm_oracle(-M) - eye)
        if self is ScalarFunction.PSI:
            return M @ np.linalg.inv(eye - expm_oracle(M))
        return M.copy()


def _first_dd(f: ScalarFunction, x0, x1):
    """h[x0, x1] with the cancellation-free forms where we have them."""
    d = x1 - x0
    if f is ScalarFunction.EXP:
        return np.exp(x0) * np.expm1(d) / d
    if f is ScalarFunction.MU:
        # mu(x1) - mu(x0) = -exp(-x0) expm1(-d) / (expm1(-x0) expm1(-x1))
        return -np.exp(-x0) * (np.expm1(-d) / d) / (np.expm1(-x0) * np.expm1(-x1))
    if f is ScalarFunction.IDENTITY:
        return np.ones_like(d)
    return (f(x1) - f(x0)) / d


def _dd(f: ScalarFunction, pts: list) -> np.ndarray:
    # pts: sorted list of equally shaped arrays
    if len(pts) == 1:
        return np.asarray(f(pts[0]), dtype=float)
    level = [_first_dd(f, pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    k = 2
    while len(level) > 1:
        level = [
            (level[i + 1] - level[i]) / (pts[i + k] - pts[i])
            for i in range(len(level) - 1)
        ]
        k += 1
    return level[0]


def divided_difference(f: ScalarFunction | str, points: Sequence[float]) -> float:
    """Divided difference ``f[x0, ..., xk]`` over pairwise distinct points.

    The value is symmetric in its arguments, so the points are sorted first;
    that keeps every difference quotient over a neighbouring pair.
    """
    f = ScalarFunction(f)
    pts = sorted(float(p) for p in points)
    if not pts:
        raise ValueError("at least one point is required")
    if any(b == a for a, b in zip(pts, pts[1:])):
        raise ValueError("divided differences need pairwise distinct points")
    f(np.asarray(pts))  # domain check
    return float(_dd(f, [np.float64(p) for p in pts]))


@dataclass(frozen=True)
class ChainPlant:
    """Three-compartment chain ``x1 -> x2 -> x3`` with output ``y = x3``.

    ``A`` has ``-rates`` on the diagonal and ``gains`` on the subdiagonal.
    """

    rates: tuple[float, float, float]
    gains: tuple[float, float]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        gains = tuple(float(g) for g in self.gains)
        if len(rates) != 3 or len(gains) != 2:
            raise ValueError("a chain plant needs 3 rates and 2 gains")
        if min(rates) <= 0 or not all(map(math.isfinite, rates)):
            raise ValueError(f"rates must be positive and finite, got {rates}")
        if min(gains) <= 0 or not all(map(math.isfinite, gains)):
            raise ValueError(f"gains must be positive and finite, got {gains}")
        if len(set(rates)) != 3:
            raise ValueError(f"rates must be pairwise distinct, got {rates}")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "gains", gains)

    @property
    def A(self) -> np.ndarray:
        A = np.diag([-r for r in self.rates])
        A[1, 0], A[2, 1] = self.gains
        return A

    @property
    def B(self) -> np.ndarray:
        return np.array([1.0, 0.0, 0.0])

    @property
    def C(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0])

    @property
    def ordered(self) -> bool:
        a1, a2, a3 = self.rates
        return a1 < a2 < a3

    def require_ordered(self) -> None:
        if not self.ordered:
            raise ValueError(
                f"stability results assume 0 < a1 < a2 < a3, got rates {self.rates}"
            )


ATRACURIUM = ChainPlant(rates=(0.0374, 0.1496, 0.3740), gains=(0.0374, 0.0560))


def chain_function(f: ScalarFunction | str, plant: ChainPlant, T) -> np.ndarray:
    """``f(T*A)`` for a scalar or array of ``T``; result shape ``T.shape + (3, 3)``."""
    f = ScalarFunction(f)
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0) or not np.all(np.isfinite(T)):
        raise ValueError("T must be positive and finite")
    a = plant.rates
    g = plant.gains
    x = [-ai * T for ai in a]
    seps = np.stack([np.abs(x[i] - x[j]) for i, j in ((0, 1), (0, 2), (1, 2))])
    min_sep = seps.min(axis=0)
    if np.any(min_sep < MIN_SEPARATION):
        raise ValueError(
            "scaled rates -a_i*T are (nearly) coincident; the plant rates must be distinct"
        )
    if f in (ScalarFunction.MU, ScalarFunction.PSI) and np.any(np.stack(x) == 0):
        raise DomainError(f"{f.value} is undefined at 0")

    out = np.zeros(T.shape + (3, 3))
    for i in range(3):
        for j in range(i + 1):
            sub = sorted(range(j, i + 1), key=lambda k: a[k], reverse=True)
            dd = _dd(f, [x[k] for k in sub])
            pref = np.ones_like(T)
            for k in range(j, i):
                pref = pref * T * g[k]
            out[..., i, j] = pref * dd

    close = min_sep < FALLBACK_SEPARATION
    if np.any(close):
        A = plant.A
        for idx in zip(*np.nonzero(close)) if T.ndim else [()]:
            out[idx] = f.matrix(T[idx] * A)
    return out


def opitz_apply(f: ScalarFunction | str, plant: ChainPlant, T: float) -> np.ndarray:
    """Lower-triangular ``f(T*A)``.

    Entry ``(i, j)`` with ``i >= j`` is ``prod_{k=j}^{i-1} (T g_k)`` times
    ``f[-a_j T, ..., -a_i T]``.  When two scaled rates are closer than
    ``FALLBACK_SEPARATION`` the matrix route (series exponential) is used instead.
    """
    return chain_function(f, plant, float(T))


def expm_oracle(M: np.ndarray, degree: int = 18) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    ``M`` is scaled by ``2**-s`` so that its 1-norm is at most 1/2; the
    degree-18 remainder is then below 1e-23, so the absolute error of the
    scaled exponential is at rounding level (well under 1e-12).  Squaring
    back is where the remaining error comes from.
    """
    M = np.asarray(M, dtype=float)
    norm = np.abs(M).sum(axis=0).max() if M.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    X = M / (2.0**s)
    n = M.shape[0]
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, degree + 1):
        term = term @ X / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


@dataclass(frozen=True)
class Eig3Result:
    values: np.ndarray  # complex, shape (3,), sorted by decreasing modulus
    spectral_radius: float
    ill_conditioned: bool

    def __iter__(self):
        return iter(self.values)


def charpoly3(M: np.ndarray) -> tuple[float, float, float]:
    """Coefficients ``(b, c, d)`` of ``det(zI - M) = z^3 + b z^2 + c z + d``."""
    M = np.asarray(M, dtype=float)
    tr = M[0, 0] + M[1, 1] + M[2, 2]
    minors = (
        M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
        + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
    )
    return -tr, minors, -float(np.linalg.det(M))


def _polish(z, b, c, d):
    p = ((z + b) * z + c) * z + d
    dp = (3 * z + 2 * b) * z + c
    if dp == 0:
        return z
    step = p / dp
    # one Newton step, kept only if it does not blow up
    return z - step if abs(step) <= 1e-3 * (1 + abs(z)) else z


def eig3(M: np.ndarray, rel_gap: float = 1e-6) -> Eig3Result:
    """Eigenvalues of a real 3x3 matrix from its characteristic cubic.

    The cubic is depressed (``z = t - b/3``).  Three real roots come from the
    trigonometric form; otherwise one real root is taken from Cardano's
    formula (written to avoid subtracting nearly equal cube roots), the
    cubic is deflated by it and the remaining quadratic gives the complex
    pair.  Each root gets one Newton step on the undepressed cubic.  Roots
    closer than ``rel_gap * (1 + max|z|)`` are flagged as ill-conditioned:
    their error then grows like the square root of machine precision.
    """
    b, c, d = charpoly3(M)
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if p == 0.0 and q == 0.0:
        roots = [complex(shift)] * 3
    elif disc <= 0.0:
        # three real roots (p < 0 here)
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (p * r)) if r > 0 else 0.0
        phi = math.acos(min(1.0, max(-1.0, arg)))
        roots = [
            complex(_polish(r * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shift, b, c, d))
            for k in range(3)
        ]
    else:
        sq = math.sqrt(disc)
        u = np.cbrt(-q / 2.0 - math.copysign(sq, q))
        t = u - p / (3.0 * u) if u != 0.0 else np.cbrt(-q)
        z1 = _polish(float(t) + shift, b, c, d)
        # z^3 + b z^2 + c z + d = (z - z1)(z^2 + e1 z + e0)
        e1 = b + z1
        e0 = c + z1 * e1
        qd = e1 * e1 - 4.0 * e0
        if qd >= 0.0:
            s = -0.5 * (e1 + math.copysign(math.sqrt(qd), e1))
            z2 = s
            z3 = e0 / s if s != 0.0 else -e1 - s
            roots = [complex(z1), complex(_polish(z2, b, c, d)), complex(_polish(z3, b, c, d))]
        else:
            zc = complex(-e1 / 2.0, math.sqrt(-qd) / 2.0)
            zc = _polish(zc, b, c, d)
            roots = [complex(z1), zc, zc.conjugate()]

    vals = np.array(sorted(roots, key=lambda z: (-abs(z), -z.real, -z.imag)))
    scale = 1.0 + np.abs(vals).max()
    gaps = [abs(vals[i] - vals[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    ill = min(gaps) < rel_gap * scale
    if ill:
        warnings.warn(
            "eig3: near-multiple eigenvalues, expect reduced accuracy",
            NearMultipleRootWarning,
            stacklevel=2,
        )
    return Eig3Result(values=vals, spectral_radius=float(np.abs(vals).max()), ill_conditioned=ill)
