"""Sequential grid-based explicit optimization (SGEO) and a COBYLA baseline.

SGEO cycles through the parameters in ascending order. For each one it asks a
provider for the reconstructed one-dimensional cost curve, evaluates the curve
on a uniform grid over [-pi, pi), moves the parameter to the grid minimum
(optionally polished in closed form) and carries on. It runs a fixed number of
sweeps with no early stopping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .ansatz import ParamVector, wrap_angle
from .qsim import Estimator

# largest float below pi; the half-open domain excludes pi itself
PI_BELOW = math.nextafter(math.pi, 0.0)


@dataclass(frozen=True)
class GridSpec:
    points: int = 2048

    def __post_init__(self):
        if self.points < 8:
            raise ValueError("grid needs at least 8 points")

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.points

    def values(self) -> np.ndarray:
        return -math.pi + self.spacing * np.arange(self.points)


def grid_minimize(curve: Callable, grid: GridSpec) -> tuple[float, float]:
    """Grid point of minimal curve value; ties go to the smallest angle."""
    lam = grid.values()
    vals = np.asarray(curve(lam), dtype=float)
    if np.isnan(vals).any():
        raise ValueError("cost curve returned NaN on the grid")
    i = int(np.argmin(vals))
    return float(lam[i]), float(vals[i])


def closed_form_min(form: str, coeffs) -> tuple[float, bool]:
    """Analytic minimiser on [-pi, pi); returns ``(lam, degenerate)``.

    Forms:
      ``"residual"``: ``-(a cos(l/2) + b sin(l/2))^2`` with ``coeffs = (a, b)``.
      ``"harmonic"``: ``A + B cos l + C sin l`` with ``coeffs = (A, B, C)`` or ``(B, C)``.
      ``"linear"``: ``-(a cos(l/2) + b sin(l/2))`` restricted to the half-angle
      range [-pi/2, pi/2), i.e. the single-angle residual curve.
    A flat curve is degenerate and returns 0.
    """
    if form == "residual":
        a, b = coeffs
        if a == 0 and b == 0:
            return 0.0, True
        return float(wrap_angle(2.0 * math.atan2(b, a))), False
    if form == "harmonic":
        b, c = coeffs[-2:]
        if b == 0 and c == 0:
            return 0.0, True
        return float(wrap_angle(math.atan2(-c, -b))), False
    if form == "linear":
        a, b = coeffs
        if a == 0 and b == 0:
            return 0.0, True
        theta = math.atan2(b, a)
        if -math.pi / 2 <= theta < math.pi / 2:
            return 2.0 * theta, False
        # optimum outside the half-angle window: the nearer endpoint wins
        return (PI_BELOW if theta > 0 else -math.pi), False
    raise ValueError(f"unknown curve form {form!r}")


@dataclass
class SgeoConfig:
    sweeps: int
    grid: GridSpec = field(default_factory=GridSpec)
    refine: bool = True

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")


@dataclass
class BaselineConfig:
    rhobeg: float = math.pi / 16
    tol: float = 1e-10
    max_iterations: int = 1000
    algorithm: str = "COBYLA"

    def __post_init__(self):
        if self.rhobeg <= 0 or self.tol <= 0:
            raise ValueError("rhobeg and tol must be positive")


@dataclass
class UpdateRecord:
    update: int
    sweep: int
    index: int  # -1 for baseline cost calls
    lam: float
    cost: float
    circuit_evals: int
    info: dict = field(default_factory=dict)


@dataclass
class OptTrace:
    records: list[UpdateRecord] = field(default_factory=list)
    params: ParamVector | None = None
    reason: str = ""

    @property
    def circuit_evals(self) -> int:
        return self.records[-1].circuit_evals if self.records else 0

    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    def running_min(self) -> np.ndarray:
        return np.minimum.accumulate(self.costs()) if self.records else np.array([])


class OptimizationAborted(RuntimeError):
    def __init__(self, message: str, trace: OptTrace):
        super().__init__(message)
        self.trace = trace


CurveProvider = Callable[[ParamVector, int, Estimator], tuple[Callable, int]]


def minimize_curve(curve: Callable, grid: GridSpec, refine: bool,
                   current: float | None = None) -> float:
    """Grid minimum, optionally polished, never worse than ``current`` on the curve."""
    lam, best = grid_minimize(curve, grid)
    candidates = [lam]
    if refine:
        closed = getattr(curve, "minimizer", None)
        if closed is not None:
            candidates.append(float(closed()))
        else:
            lo = max(lam - grid.spacing, -math.pi)
            hi = min(lam + grid.spacing, PI_BELOW)
            res = minimize_scalar(lambda x: float(curve(x)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            candidates.append(float(res.x))
    if current is not None:
        candidates.append(float(current))
    vals = [float(curve(c)) for c in candidates]
    return candidates[int(np.argmin(vals))]


def sgeo_run(provider: CurveProvider, p0: ParamVector, cfg: SgeoConfig, est: Estimator,
             monitor: Callable[[ParamVector], dict] | None = None) -> OptTrace:
    """Run ``cfg.sweeps`` full sweeps of single-parameter updates.

    ``provider(p, j, est)`` returns ``(curve, circuit_cost)`` where ``curve``
    maps angles to cost for parameter ``j`` (and its tie group) with everything
    else held at ``p``. ``monitor(p)`` may attach extra per-update metrics.
    """
    trace = OptTrace(params=p0)
    p = p0
    ce = 0
    update = 0
    for sweep in range(cfg.sweeps):
        for j in p.sweep_order():
            try:
                curve, cost = provider(p, j, est)
            except Exception as exc:
                trace.params = p
                trace.reason = f"provider failed at sweep {sweep}, parameter {j}: {exc}"
                raise OptimizationAborted(trace.reason, trace) from exc
            ce += int(cost)
            current = float(p.values[j])
            lam = minimize_curve(curve, cfg.grid, cfg.refine, current)
            p = p.with_value(j, lam)
            info = {"cost_before": float(curve(current))}
            if monitor is not None:
                info.update(monitor(p))
            trace.records.append(UpdateRecord(update, sweep, j, float(p.values[j]),
                                              float(curve(lam)), ce, info))
            update += 1
    trace.params = p
    trace.reason = f"completed {cfg.sweeps} sweeps"
    return trace


def baseline_run(cost: Callable[[ParamVector], float], p0: ParamVector, cfg: BaselineConfig,
                 circuit_cost: int = 1,
                 monitor: Callable[[ParamVector], dict] | None = None) -> OptTrace:
    """COBYLA from ``p0`` with initial radius ``rhobeg`` and final radius ``tol``.

    Every cost call is recorded and charged ``circuit_cost`` circuits. Tied
    parameters are optimised through one representative per group. The
    returned parameters are the best point COBYLA visited.
    """
    trace = OptTrace(params=p0)
    if cfg.max_iterations <= 0:
        trace.reason = "max_iterations reached (0)"
        return trace
    reps = p0.sweep_order()
    ce = 0

    def expand(x) -> ParamVector:
        vals = p0.values.copy()
        for r, v in zip(reps, x):
            vals[list(p0.group_of(r))] = v
        return ParamVector(vals, p0.tie_groups)

    def f(x):
        nonlocal ce
        p = expand(x)
        c = float(cost(p))
        ce += circuit_cost
        info = monitor(p) if monitor is not None else {}
        trace.records.append(UpdateRecord(len(trace.records), 0, -1, float("nan"), c, ce, info))
        return c

    res = minimize(f, p0.values[reps], method="COBYLA",
                   options={"rhobeg": cfg.rhobeg, "tol": cfg.tol, "maxiter": cfg.max_iterations})
    trace.params = expand(res.x)
    trace.reason = str(res.message)
    return trace
