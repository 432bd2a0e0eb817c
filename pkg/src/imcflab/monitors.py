"""Checks over single shapes and flow traces.

Each check returns :class:`~imcflab.report.Check` entries that carry the
residual and the tolerance used. Unless stated otherwise a check passes when
``residual <= tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .geometry import reilly_terms, snapshot
from .report import Check, CheckReport, make_check, skipped

if TYPE_CHECKING:
    from .shapes import RadialShape

COMPLETED = "completed"
ABORTED = "aborted"
RUNNING = "running"

DEFAULT_EPS_SCALE = 50.0
II_BOUND_TOL = 1e-10
REILLY_REL_TOL = 5e-3
VOL_RATE_REL_TOL = 1e-2
RIGIDITY_C = 10.0
ROUND_THRESHOLD = 0.05


@dataclass(frozen=True)
class TraceRow:
    t: float
    dt: float
    vol: float
    area: float
    int_r2H: float
    int_invH: float
    Q: float
    roundness: float
    minH: float
    maxH: float
    support_min: float
    q_raw: float = math.nan
    ii_gap_min: float = math.nan


CSV_COLUMNS = (
    "t",
    "dt",
    "vol",
    "area",
    "int_r2H",
    "int_invH",
    "Q",
    "roundness",
    "minH",
    "maxH",
    "support_min",
)


@dataclass
class FlowTrace:
    n: int
    N: int
    h: float
    t_end: float
    sample_every: float
    rows: list[TraceRow] = field(default_factory=list)
    status: str = RUNNING
    reason: str = ""
    support_min_steps: float = math.inf
    final_shape: "RadialShape | None" = None
    final_t: float = 0.0
    step_count: int = 0

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def eps_quad(h: float, scale: float = DEFAULT_EPS_SCALE) -> float:
    """Relative quadrature tolerance max(1e-8, scale * h^2)."""
    return max(1e-8, scale * h * h)


def default_mono_tol(h: float) -> float:
    return max(1e-6, 100.0 * h * h)


# ---------------------------------------------------------------- shape level


def check_main_inequality(shape: "RadialShape", eps_scale: float = DEFAULT_EPS_SCALE, snap=None) -> Check:
    """n Vol <= 1/(n-1) int r^2 H dmu.

    residual = Q_raw; tolerance = eps_quad * n Vol.
    """
    snap = snap or snapshot(shape, with_inv_h=False)
    tol = eps_quad(shape.grid.h, eps_scale) * shape.n * snap.vol
    return make_check("main_inequality", snap.q_raw <= tol, snap.q_raw, tol)


def check_ros(shape: "RadialShape", eps_scale: float = DEFAULT_EPS_SCALE, snap=None) -> Check:
    """n Vol <= (n-1) int 1/H dmu.

    residual = n Vol - (n-1) int 1/H; tolerance = eps_quad * n Vol.
    Raises LostMeanConvexity when H <= 0 somewhere.
    """
    if snap is None or snap.int_invH is None:
        snap = snapshot(shape, with_inv_h=True)
    n = shape.n
    resid = n * snap.vol - (n - 1) * snap.int_invH
    tol = eps_quad(shape.grid.h, eps_scale) * n * snap.vol
    return make_check("ros_inequality", resid <= tol, resid, tol)


def check_reilly(shape: "RadialShape", eps_scale: float = DEFAULT_EPS_SCALE, snap=None) -> list[Check]:
    """Reilly identity for u = r^2, plus the convexity chain when it applies.

    ``reilly_identity``: residual |lhs - rhs| / |lhs| against 0.5 %.
    For convex shapes, ``reilly_chain_lower`` and ``reilly_chain_upper``
    report n(n-1) Vol - lhs/4 and lhs/4 - int H r^2 dmu, each allowed to be
    at most eps_quad times the larger side.
    """
    snap = snap or snapshot(shape, with_inv_h=False)
    lhs, rhs = reilly_terms(shape, snap)
    rel = abs(lhs - rhs) / abs(lhs)
    out = [make_check("reilly_identity", rel <= REILLY_REL_TOL, rel, REILLY_REL_TOL)]
    convex = bool(np.all(snap.kappa_profile > 0) and np.all(snap.kappa_orbit >= 0))
    if convex:
        n = shape.n
        eps = eps_quad(shape.grid.h, eps_scale)
        low = n * (n - 1) * snap.vol - lhs / 4.0
        high = lhs / 4.0 - snap.int_r2H
        out.append(make_check("reilly_chain_lower", low <= eps * lhs / 4.0, low, eps * lhs / 4.0))
        out.append(make_check("reilly_chain_upper", high <= eps * snap.int_r2H, high, eps * snap.int_r2H))
    else:
        out.append(skipped("reilly_chain", "shape is not convex"))
    return out


def check_ii_bound(shape: "RadialShape", snap=None) -> Check:
    """|II|^2 >= H^2/(n-1) at each node; residual = -min(|II|^2 - H^2/(n-1))."""
    snap = snap or snapshot(shape, with_inv_h=False)
    gap = snap.ii_gap
    i = int(np.argmin(gap))
    return make_check(
        "ii_bound", gap[i] >= -II_BOUND_TOL, -gap[i], II_BOUND_TOL, f"theta={shape.grid.nodes[i]:.6g}"
    )


def static_report(shape: "RadialShape", eps_scale: float = DEFAULT_EPS_SCALE) -> CheckReport:
    """All shape-level checks for a mean-convex shape."""
    snap = snapshot(shape, with_inv_h=True)
    report = CheckReport()
    report.add(check_main_inequality(shape, eps_scale, snap))
    report.add(check_ros(shape, eps_scale, snap))
    report.extend(check_reilly(shape, eps_scale, snap))
    report.add(check_ii_bound(shape, snap))
    return report


# ---------------------------------------------------------------- trace level


def _q_slopes(trace: FlowTrace):
    t = trace.column("t")
    Q = trace.column("Q")
    dt = np.diff(t)
    dQ = np.diff(Q)
    return t, Q, dt, dQ


def check_q_monotone(trace: FlowTrace, tol: float | None = None) -> Check:
    """Q(t) is nondecreasing between consecutive samples.

    Passes iff dQ >= -tol (1 + |Q|) dt for every pair. residual is the
    minimum observed slope dQ/dt (reported even on pass), located at the
    midpoint of the offending interval.
    """
    if not trace.completed:
        return skipped("q_monotone", f"trace {trace.status}: {trace.reason}")
    if len(trace.rows) < 3:
        return skipped("q_monotone", "fewer than 3 samples")
    tol = default_mono_tol(trace.h) if tol is None else tol
    t, Q, dt, dQ = _q_slopes(trace)
    slopes = dQ / dt
    scale = 1.0 + np.maximum(np.abs(Q[:-1]), np.abs(Q[1:]))
    ok = bool(np.all(dQ >= -tol * scale * dt))
    i = int(np.argmin(slopes))
    return make_check("q_monotone", ok, slopes[i], tol, f"t={0.5 * (t[i] + t[i + 1]):.6g}")


def check_evolution_identities(trace: FlowTrace, eps_scale: float = DEFAULT_EPS_SCALE) -> list[Check]:
    """Area growth, volume rate and the volume growth bound along a trace.

    * ``area_law``: max |log A(t) - log A(0) - t| <= max(1e-4, 100 h^2).
    * ``vol_rate``: max over interior samples of |centered dVol/dt - int 1/H|
      relative to int 1/H, against 1 %.
    * ``vol_growth_bound``: max over samples of (n/(n-1) Vol - int 1/H) / Vol
      against eps_quad.
    """
    names = ("area_law", "vol_rate", "vol_growth_bound")
    if not trace.completed:
        return [skipped(nm, f"trace {trace.status}: {trace.reason}") for nm in names]
    if len(trace.rows) < 3:
        return [skipped(nm, "fewer than 3 samples") for nm in names]
    n, h = trace.n, trace.h
    t = trace.column("t")
    area = trace.column("area")
    vol = trace.column("vol")
    inv_h = trace.column("int_invH")
    out = []

    dev = np.abs(np.log(area) - math.log(area[0]) - t)
    i = int(np.argmax(dev))
    tol_a = max(1e-4, 100.0 * h * h)
    out.append(make_check("area_law", dev[i] <= tol_a, dev[i], tol_a, f"t={t[i]:.6g}"))

    # centered difference on the sampled times; the last interval may be short
    ta, tb = t[:-2], t[2:]
    tc = t[1:-1]
    h0 = tc - ta
    h1 = tb - tc
    dvol = (
        -h1 / (h0 * (h0 + h1)) * vol[:-2]
        + (h1 - h0) / (h0 * h1) * vol[1:-1]
        + h0 / (h1 * (h0 + h1)) * vol[2:]
    )
    rel = np.abs(dvol - inv_h[1:-1]) / inv_h[1:-1]
    j = int(np.argmax(rel))
    out.append(make_check("vol_rate", rel[j] <= VOL_RATE_REL_TOL, rel[j], VOL_RATE_REL_TOL, f"t={tc[j]:.6g}"))

    gap = (n / (n - 1) * vol - inv_h) / vol
    k = int(np.argmax(gap))
    eps = eps_quad(h, eps_scale)
    out.append(make_check("vol_growth_bound", gap[k] <= eps, gap[k], eps, f"t={t[k]:.6g}"))
    return out


def check_ii_bound_trace(trace: FlowTrace) -> Check:
    if not trace.rows:
        return skipped("ii_bound_trace", "empty trace")
    gap = trace.column("ii_gap_min")
    i = int(np.argmin(gap))
    t = trace.rows[i].t
    return make_check("ii_bound_trace", gap[i] >= -II_BOUND_TOL, -gap[i], II_BOUND_TOL, f"t={t:.6g}")


def check_star_shaped_trace(trace: FlowTrace) -> Check:
    """min <X - P, nu> over all accepted steps stays positive; residual = that minimum."""
    vals = [trace.support_min_steps] + [r.support_min for r in trace.rows]
    m = min(vals)
    return Check("star_shaped_trace", "PASS" if m > 0 else "FAIL", float(m), 0.0)


def check_rigidity(
    trace: FlowTrace, c: float = RIGIDITY_C, eps_scale: float = DEFAULT_EPS_SCALE
) -> Check:
    """Discrete form of "Q is constant iff every Sigma_t is a round sphere".

    If Q is flat along the trace (max |Q - Q(0)| <= eps_quad * (1 + |Q(0)|))
    every sample must be round: roundness <= c * sqrt(eps_quad); residual is
    the maximum roundness. Otherwise, if the initial roundness exceeds 0.05,
    Q must strictly increase: residual is -(Q(t_end) - Q(0)), tolerance 0.
    """
    if not trace.completed:
        return skipped("rigidity", f"trace {trace.status}: {trace.reason}")
    eps = eps_quad(trace.h, eps_scale)
    Q = trace.column("Q")
    rnd = trace.column("roundness")
    spread = float(np.max(np.abs(Q - Q[0])))
    if spread <= eps * (1.0 + abs(Q[0])):
        lim = c * math.sqrt(eps)
        return make_check("rigidity", bool(np.max(rnd) <= lim), float(np.max(rnd)), lim, note="Q constant")
    if rnd[0] > ROUND_THRESHOLD:
        inc = float(Q[-1] - Q[0])
        return make_check("rigidity", inc > 0.0, -inc, 0.0, note="Q strictly increasing")
    return skipped("rigidity", "Q varies but the initial shape is nearly round")


def trace_report(trace: FlowTrace, mono_tol: float | None = None, eps_scale: float = DEFAULT_EPS_SCALE) -> CheckReport:
    report = CheckReport()
    report.add(check_q_monotone(trace, mono_tol))
    report.extend(check_evolution_identities(trace, eps_scale))
    report.add(check_ii_bound_trace(trace))
    report.add(check_star_shaped_trace(trace))
    report.add(check_rigidity(trace, eps_scale=eps_scale))
    return report


def row_values(row: TraceRow) -> list[float]:
    return [getattr(row, name) for name in CSV_COLUMNS]

