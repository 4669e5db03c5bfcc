"""Event-driven reconstruction of continuous trajectories.

Between firings the plant is autonomous, so every sample is computed in
closed form from the state right after the last firing,
``x(t) = exp((t - t_n) A) (X_n + lam_n B)``.  There is no ODE stepping and
the sample step only controls resolution.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import Modulation
from .numerics import ChainPlant, ScalarFunction, chain_function, opitz_apply
from .poincare import DEFAULT_CEILING, FixedPoint, StateCeilingError

__all__ = [
    "CorridorReport",
    "Event",
    "SimTrace",
    "TransientMetrics",
    "corridor_check",
    "simulate",
    "transient_metrics",
    "write_events_csv",
    "write_trace_csv",
]


@dataclass(frozen=True)
class Event:
    n: int
    t: float
    y: float
    T: float
    lam: float
    X: np.ndarray  # left limit x(t_n^-)


@dataclass
class SimTrace:
    t: np.ndarray
    x: np.ndarray  # (K, 3)
    events: list[Event]
    final_state: np.ndarray  # left limit at the end of the horizon
    meta: dict = field(default_factory=dict)

    @property
    def y(self) -> np.ndarray:
        return self.x[:, 2]

    def event_states(self) -> list[np.ndarray]:
        """``X_0, ..., X_N``: the Poincare orbit carried by this trace."""
        return [e.X for e in self.events] + [self.final_state]


def simulate(
    plant: ChainPlant,
    modulation: Modulation,
    x0,
    n_firings: int | None = None,
    t_end: float | None = None,
    h: float | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> SimTrace:
    """Simulate from ``x(0^-) = x0`` with the first firing at ``t = 0``.

    Give exactly one horizon: ``n_firings`` (the trace ends at the left limit
    before firing number ``n_firings``) or ``t_end``.  Each firing contributes
    a left-limit and a right-limit sample at the same time stamp.
    """
    if (n_firings is None) == (t_end is None):
        raise ValueError("give exactly one of n_firings or t_end")
    if n_firings is not None and n_firings < 0:
        raise ValueError("n_firings must be nonnegative")
    if t_end is not None and t_end < 0:
        raise ValueError("t_end must be nonnegative")
    h = modulation.T / 200.0 if h is None else float(h)
    if h <= 0:
        raise ValueError("sample step must be positive")
    X = np.asarray(x0, dtype=float).copy()
    if np.any(X < 0):
        raise ValueError("initial state must be nonnegative")

    ts = [np.array([0.0])]
    xs = [X[None, :]]
    events: list[Event] = []
    t = 0.0
    n = 0
    B = plant.B
    while (n_firings is not None and n < n_firings) or (t_end is not None and t < t_end):
        y = X[2]
        lam = float(modulation.F(y))
        T = float(modulation.Phi(y))
        events.append(Event(n=n, t=t, y=float(y), T=T, lam=lam, X=X))
        post = X + lam * B
        seg_end = t + T
        stop = seg_end if t_end is None else min(seg_end, t_end)
        # right limit at t, interior grid, then the left limit at the segment end
        tau = np.arange(h, stop - t, h)
        tau = tau[tau < stop - t]
        tau = np.concatenate([[0.0], tau, [stop - t]])
        inner = tau[1:]
        seg = np.empty((tau.size, 3))
        seg[0] = post
        if inner.size:
            seg[1:] = chain_function(ScalarFunction.EXP, plant, inner) @ post
        # the segment endpoint uses the same evaluation as the Poincare map
        if stop == seg_end:
            X = opitz_apply(ScalarFunction.EXP, plant, T) @ post
            seg[-1] = X
        ts.append(t + tau)
        xs.append(seg)
        if not np.all(np.abs(seg) <= ceiling):
            raise StateCeilingError(f"state exceeded {ceiling:g} during firing {n} at t={t}")
        t = seg_end
        n += 1
        if t_end is not None and t > t_end:
            X = seg[-1]
            break

    return SimTrace(
        t=np.concatenate(ts),
        x=np.vstack(xs),
        events=events,
        final_state=X,
        meta={"plant": plant, "modulation": modulation, "x0": np.asarray(x0, float), "h": h},
    )


@dataclass(frozen=True)
class TransientMetrics:
    distances: np.ndarray
    ratio: float | None  # None when the trace already sits on the fixed point
    tail: tuple[int, int]
    overshoot: bool
    converged: bool


def transient_metrics(trace: SimTrace, fp: FixedPoint, noise: float = 1e-9) -> TransientMetrics:
    """Distances ``d_n = |X_n - X|`` and the asymptotic contraction ratio.

    Ratios ``d_{n+1} / d_n`` are only taken while both distances sit above
    ``noise * (1 + |X|)``; the estimate is the median over the second half
    of those.  ``overshoot`` is true when ``d_n`` is not monotone there.
    """
    states = np.asarray(trace.event_states())
    if len(states) < 10:
        raise ValueError(f"need at least 10 events, got {len(states)}")
    d = np.linalg.norm(states - fp.X, axis=1)
    floor = noise * (1.0 + np.linalg.norm(fp.X))
    below = np.flatnonzero(d <= floor)
    cut = int(below[0]) if below.size else len(d)
    if cut < 4:
        return TransientMetrics(d, None, (0, 0), False, bool(d[-1] <= floor))
    lo, hi = cut // 2, cut - 1
    r = d[lo + 1 : hi + 1] / d[lo:hi]
    dd = np.diff(d[lo : hi + 1])
    overshoot = bool(np.any(dd > 0) and np.any(dd < 0))
    return TransientMetrics(d, float(np.median(r)), (lo, hi), overshoot, bool(d[-1] <= floor))


@dataclass(frozen=True)
class CorridorReport:
    fraction: float
    tail_fraction: float
    tail_min: float
    tail_max: float


def corridor_check(trace: SimTrace, y_lo: float, y_hi: float) -> CorridorReport:
    """Share of samples whose output is inside ``[y_lo, y_hi]``; the tail is the last third in time."""
    if not y_lo <= y_hi:
        raise ValueError("need y_lo <= y_hi")
    y = trace.y
    inside = (y >= y_lo) & (y <= y_hi)
    t0 = trace.t[0] + 2.0 * (trace.t[-1] - trace.t[0]) / 3.0
    tail = trace.t >= t0
    return CorridorReport(
        fraction=float(inside.mean()),
        tail_fraction=float(inside[tail].mean()),
        tail_min=float(y[tail].min()),
        tail_max=float(y[tail].max()),
    )


def fmt(x) -> str:
    """Positional decimal with 12 significant digits."""
    x = float(x)
    if x == 0.0:
        return "0"
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="-")


def write_trace_csv(trace: SimTrace, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x1", "x2", "x3", "y"])
        for t, x in zip(trace.t, trace.x):
            w.writerow([fmt(t), fmt(x[0]), fmt(x[1]), fmt(x[2]), fmt(x[2])])
    return path


def write_events_csv(trace: SimTrace, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "t_n", "y_n", "T_n", "lambda_n", "X1", "X2", "X3"])
        for e in trace.events:
            w.writerow([e.n, fmt(e.t), fmt(e.y), fmt(e.T), fmt(e.lam), *map(fmt, e.X)])
    return path
