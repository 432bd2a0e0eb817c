"""Inverse mean curvature flow in radial-graph form.

For a star-shaped hypersurface rho = exp(u) moving with normal speed 1/H the
log-radius obeys

    du/dt = v / (rho H),      v = sqrt(1 + u'^2),

which is integrated here with explicit RK4 (or Euler) under a parabolic
step restriction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpec, LostMeanConvexity, StiffnessFailure
from .geometry import _curvature_fields, q_prefactor, snapshot
from .monitors import ABORTED, COMPLETED, FlowTrace, TraceRow
from .shapes import DEFAULT_H_MIN, RadialShape

log = logging.getLogger(__name__)

DT_FLOOR = 1e-12
METHODS = ("rk4", "euler")


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.2
    dt_max: float = 1e-2
    h_min: float = DEFAULT_H_MIN
    method: str = "rk4"

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidSpec("cfl must lie in (0, 1]")
        if not self.dt_max > 0.0:
            raise InvalidSpec("dt_max must be positive")
        if not self.h_min > 0.0:
            raise InvalidSpec("h_min must be positive")
        if self.method not in METHODS:
            raise InvalidSpec(f"method must be one of {METHODS}")


@dataclass(frozen=True)
class FlowState:
    t: float
    shape: RadialShape
    last_dt: float = 0.0
    step_count: int = 0
    support: float = math.nan  # min <X - P, nu> after the last step


def _speed(grid, u, h_min, t=None):
    """Return (du/dt, diffusion estimate D, min support)."""
    rho, u1, _, v, _, _, H = _curvature_fields(grid, u)
    min_h = float(np.min(H))
    if not min_h >= h_min:
        raise LostMeanConvexity(min_h, h_min, t)
    rH = rho * H
    f = v / rH
    D = float(np.max(v * (1.0 + u1 * u1) / (rH * rH)))
    return f, D, float(np.min(rho / v))


def rhs(shape: RadialShape, h_min: float = DEFAULT_H_MIN) -> np.ndarray:
    """du/dt = v / (rho H) at every node."""
    return _speed(shape.grid, shape.u, h_min)[0]


def stable_dt(state: FlowState, ctl: StepControl) -> float:
    _, D, _ = _speed(state.shape.grid, state.shape.u, ctl.h_min, state.t)
    return min(ctl.dt_max, ctl.cfl * state.shape.grid.h ** 2 / D)


def _advance(grid, u, dt, ctl, t, k1=None):
    if k1 is None:
        k1 = _speed(grid, u, ctl.h_min, t)[0]
    if ctl.method == "euler":
        return u + dt * k1
    k2 = _speed(grid, u + 0.5 * dt * k1, ctl.h_min, t)[0]
    k3 = _speed(grid, u + 0.5 * dt * k2, ctl.h_min, t)[0]
    k4 = _speed(grid, u + dt * k3, ctl.h_min, t)[0]
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state: FlowState, ctl: StepControl, dt_cap: float | None = None) -> FlowState:
    """Take one explicit step of size min(dt_max, cfl h^2 / D, dt_cap).

    The new shape is checked for mean convexity before it is returned.
    """
    grid = state.shape.grid
    k1, D, _ = _speed(grid, state.shape.u, ctl.h_min, state.t)
    dt = min(ctl.dt_max, ctl.cfl * grid.h**2 / D)
    if dt < DT_FLOOR:
        raise StiffnessFailure(f"stable step {dt:.3e} underflowed at t={state.t:.6g}")
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    u = _advance(grid, state.shape.u, dt, ctl, state.t, k1)
    if not np.all(np.isfinite(u)):
        raise StiffnessFailure(f"non-finite radius after step at t={state.t:.6g}")
    t = state.t + dt
    _, _, support = _speed(grid, u, ctl.h_min, t)
    return FlowState(t, state.shape.with_u(u), dt, state.step_count + 1, support)


def summarize(shape: RadialShape, t: float, dt: float) -> TraceRow:
    snap = snapshot(shape)
    return TraceRow(
        t=t,
        dt=dt,
        vol=snap.vol,
        area=snap.area,
        int_r2H=snap.int_r2H,
        int_invH=snap.int_invH,
        Q=q_prefactor(shape.n, t) * snap.q_raw,
        roundness=snap.roundness,
        minH=float(np.min(snap.H)),
        maxH=float(np.max(snap.H)),
        support_min=float(np.min(snap.support)),
        q_raw=snap.q_raw,
        ii_gap_min=float(np.min(snap.ii_gap)),
    )


def run(
    shape: RadialShape,
    t_end: float,
    ctl: StepControl | None = None,
    sample_every: float | None = None,
) -> FlowTrace:
    """Evolve ``shape`` to ``t_end``, recording a row at t = 0, at every
    multiple of ``sample_every`` and at ``t_end``.

    The step before each sample time is shortened to land on it exactly.
    A flow failure stops the run and returns the partial trace marked
    aborted.
    """
    ctl = ctl or StepControl()
    if not t_end > 0.0:
        raise InvalidSpec("t_end must be positive")
    if sample_every is None:
        sample_every = t_end
    if not 0.0 < sample_every <= t_end:
        raise InvalidSpec("sample_every must lie in (0, t_end]")
    grid = shape.grid
    n_samples = int(math.floor(t_end / sample_every + 1e-9))
    targets = [k * sample_every for k in range(1, n_samples + 1)]
    if t_end - targets[-1] > 1e-9 * t_end:
        targets.append(t_end)
    else:
        targets[-1] = t_end

    trace = FlowTrace(n=shape.n, N=grid.N, h=grid.h, t_end=t_end, sample_every=sample_every)
    state = FlowState(0.0, shape)
    support_min = math.inf
    try:
        trace.rows.append(summarize(shape, 0.0, 0.0))
        for target in targets:
            while True:
                remaining = target - state.t
                if remaining <= DT_FLOOR * max(1.0, target):
                    state = replace(state, t=target)
                    break
                state = step(state, ctl, dt_cap=remaining)
                support_min = min(support_min, state.support)
            trace.rows.append(summarize(state.shape, state.t, state.last_dt))
        trace.status = COMPLETED
    except (LostMeanConvexity, StiffnessFailure) as exc:
        log.warning("flow aborted at t=%.6g: %s", state.t, exc)
        trace.status = ABORTED
        trace.reason = f"{type(exc).__name__}: {exc}"
    trace.support_min_steps = support_min
    trace.final_shape = state.shape
    trace.final_t = state.t
    trace.step_count = state.step_count
    return trace
