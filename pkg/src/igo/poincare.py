"""Impulse-to-impulse map of the oscillator, its orbits and 1-cycle fixed points."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Modulation, validate
from .numerics import ChainPlant, ScalarFunction, opitz_apply

__all__ = [
    "ConvergenceError",
    "CycleSpec",
    "FixedPoint",
    "StateCeilingError",
    "detect_cycle",
    "fixed_point_analytic",
    "fixed_point_numeric",
    "iterate",
    "map_Q",
    "map_jacobian",
]

DEFAULT_CEILING = 1e12


class StateCeilingError(ArithmeticError):
    """A state component exceeded the configured ceiling."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class CycleSpec:
    lam: float
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"cycle period must be positive, got T={self.T}")
        if not self.lam >= 0:
            raise ValueError(f"impulse weight must be nonnegative, got lambda={self.lam}")


@dataclass(frozen=True)
class FixedPoint:
    X: np.ndarray
    spec: CycleSpec
    iterations: int = 0
    residuals: list = field(default_factory=list, compare=False, repr=False)

    @property
    def y0(self) -> float:
        return float(self.X[2])


def map_Q(plant: ChainPlant, modulation: Modulation, X) -> np.ndarray:
    """``Q(X) = exp(A Phi(CX)) (X + F(CX) B)``: state just before the next firing."""
    X = np.asarray(X, dtype=float)
    y = X[2]
    E = opitz_apply(ScalarFunction.EXP, plant, modulation.Phi(y))
    return E @ (X + modulation.F(y) * plant.B)


def map_jacobian(plant: ChainPlant, modulation: Modulation, X) -> np.ndarray:
    """Derivative of ``map_Q`` at an arbitrary state ``X``."""
    X = np.asarray(X, dtype=float)
    y = X[2]
    A, B, C = plant.A, plant.B, plant.C
    E = opitz_apply(ScalarFunction.EXP, plant, modulation.Phi(y))
    nxt = E @ (X + modulation.F(y) * B)
    return E + np.outer(modulation.dF(y) * (E @ B) + modulation.dPhi(y) * (A @ nxt), C)


def iterate(plant, modulation, X0, N: int, ceiling: float = DEFAULT_CEILING) -> list[np.ndarray]:
    if N < 0:
        raise ValueError("N must be nonnegative")
    orbit = [np.asarray(X0, dtype=float)]
    for n in range(N):
        nxt = map_Q(plant, modulation, orbit[-1])
        if not np.all(np.abs(nxt) <= ceiling):
            raise StateCeilingError(
                f"state exceeded {ceiling:g} after {n + 1} firings: {nxt}; "
                "check that the modulation is bounded"
            )
        orbit.append(nxt)
    return orbit


def fixed_point_analytic(plant: ChainPlant, spec: CycleSpec) -> FixedPoint:
    """The unique 1-cycle state ``X = lam * mu(T A) B`` for weight ``lam`` and period ``T``."""
    M = opitz_apply(ScalarFunction.MU, plant, spec.T)
    return FixedPoint(X=spec.lam * M[:, 0], spec=spec)


def fixed_point_numeric(
    plant: ChainPlant,
    modulation: Modulation,
    X_init,
    tol: float = 1e-10,
    max_iter: int = 200,
    check: bool = True,
) -> FixedPoint:
    """Solve ``X = Q(X)`` by damped Newton iteration.

    Steps are halved (at most 8 times) while the residual grows.  If no
    halving helps the solver switches to the relaxed iteration
    ``X <- (X + Q(X)) / 2`` for the remaining budget.
    """
    if check:
        problems = validate(modulation)
        if problems:
            raise ValueError("invalid modulation: " + "; ".join(problems))
    X = np.asarray(X_init, dtype=float).copy()
    eye = np.eye(3)

    def resid(x):
        return x - map_Q(plant, modulation, x)

    R = resid(X)
    history = [float(np.linalg.norm(R))]
    newton = True
    for it in range(1, max_iter + 1):
        if history[-1] <= tol * (1.0 + np.linalg.norm(X)):
            break
        if newton:
            try:
                step = np.linalg.solve(eye - map_jacobian(plant, modulation, X), -R)
            except np.linalg.LinAlgError:
                step = None
            accepted = False
            if step is not None:
                t = 1.0
                for _ in range(9):
                    cand = np.maximum(X + t * step, 0.0)
                    Rc = resid(cand)
                    if np.linalg.norm(Rc) < history[-1]:
                        X, R, accepted = cand, Rc, True
                        break
                    t *= 0.5
            if not accepted:
                newton = False
        if not newton:
            X = 0.5 * (X + map_Q(plant, modulation, X))
            R = resid(X)
        history.append(float(np.linalg.norm(R)))
    else:
        if history[-1] > tol * (1.0 + np.linalg.norm(X)):
            raise ConvergenceError(
                f"fixed point iteration did not converge in {max_iter} steps "
                f"(residual {history[-1]:.3e})",
                history,
            )
    y = X[2]
    spec = CycleSpec(lam=float(modulation.F(y)), T=float(modulation.Phi(y)))
    return FixedPoint(X=X, spec=spec, iterations=len(history) - 1, residuals=history)


def detect_cycle(orbit, m_max: int = 8, tol: float = 1e-6) -> int | None:
    """Smallest period ``m <= m_max`` of the orbit tail, or ``None`` if aperiodic.

    The tail is the last quarter of the orbit; every pair ``(X_n, X_{n+m})``
    inside it must satisfy ``|X_{n+m} - X_n| <= tol (1 + |X_n|)``.  Scanning
    ``m`` upwards means a divisor of ``m`` would already have been returned.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    X = np.asarray(orbit, dtype=float)
    L = len(X)
    if L < 4 * m_max:
        raise ValueError(f"orbit too short: need at least {4 * m_max} states, got {L}")
    quarter = L // 4
    for m in range(1, m_max + 1):
        start = L - max(quarter, m + 1)
        a = X[start : L - m]
        b = X[start + m :]
        if np.all(np.linalg.norm(b - a, axis=1) <= tol * (1.0 + np.linalg.norm(a, axis=1))):
            return m
    return None
