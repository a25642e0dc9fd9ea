"""Deterministic Filippov dynamics: sliding fields and the event-driven relay integrator.

On the switching manifold C^T x = 0 the sliding field is A x + B u_eq with the
equivalent control u_eq = -(C^T A x)/(C^T B), which satisfies C^T x' = 0
exactly; sliding is admissible while |u_eq| < 1.  Off-manifold flow uses
u = -sgn(C^T x).  Integration is RK45 with event location; crossings of the
manifold are projected onto it when attracting.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .core import RelaySystem
from .errors import (
    NoPeriodFound,
    NotAttracting,
    OnManifold,
    SlidingExit,
    StepFailure,
)

__all__ = [
    "Mode",
    "SlidingState",
    "RelayTrajectory",
    "PeriodicOrbitResult",
    "filippov_weight",
    "relay_vector_field",
    "relay_sliding_field",
    "integrate_relay",
    "find_periodic_orbit",
    "write_trajectory_csv",
]

EVENT_TOL = 1e-10


class Mode(Enum):
    FLOW_LEFT = "L"
    FLOW_RIGHT = "R"
    SLIDING = "S"


@dataclass(frozen=True)
class SlidingState:
    x: np.ndarray
    mode: Mode
    t: float


def filippov_weight(fL: np.ndarray, fR: np.ndarray, normal: np.ndarray) -> float:
    """Convex weight q in (0,1) with (1-q) n.fL + q n.fR = 0 (attracting case)."""
    nL = float(np.dot(normal, fL))
    nR = float(np.dot(normal, fR))
    if not (nL > 0 and nR < 0):
        raise NotAttracting(f"need n.fL > 0 > n.fR, got {nL}, {nR}")
    return nL / (nL - nR)


def relay_vector_field(x: np.ndarray, rs: RelaySystem) -> np.ndarray:
    """A x - B sgn(C^T x) away from the manifold."""
    s = float(rs.C @ x)
    if s == 0.0:
        raise OnManifold("C^T x = 0: use relay_sliding_field")
    return rs.A @ x - rs.B * np.sign(s)


def equivalent_control(x: np.ndarray, rs: RelaySystem) -> float:
    return float(-(rs.C @ (rs.A @ x)) / (rs.C @ rs.B))


def relay_sliding_field(x: np.ndarray, rs: RelaySystem) -> tuple[np.ndarray, float]:
    """Sliding field A x + B u_eq and u_eq; raises SlidingExit when |u_eq| >= 1."""
    u = equivalent_control(x, rs)
    if abs(u) >= 1.0:
        raise SlidingExit(f"|u_eq| = {abs(u):.6f} >= 1")
    return rs.A @ x + rs.B * u, u


@dataclass
class RelayTrajectory:
    t: np.ndarray
    x: np.ndarray  # (n, 3)
    mode: np.ndarray  # array of "L"/"R"/"S" strings
    segments: list = field(default_factory=list)  # (Mode, t_enter, t_exit)

    def sliding_segments(self) -> list:
        return [s for s in self.segments if s[0] is Mode.SLIDING]


@dataclass(frozen=True)
class PeriodicOrbitResult:
    period: float
    sliding_segment_count: int
    segment_times: list
    closure_error: float
    section_state: np.ndarray


def _initial_mode(x, rs):
    s = float(rs.C @ x)
    if abs(s) <= EVENT_TOL and abs(equivalent_control(x, rs)) < 1.0:
        return Mode.SLIDING
    return Mode.FLOW_LEFT if s < 0 else Mode.FLOW_RIGHT


def integrate_relay(
    rs: RelaySystem,
    x0,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_events: int = 100000,
) -> RelayTrajectory:
    """Event-driven integration of the relay system with sliding segments."""
    A, B, C = rs.A, rs.B, rs.C
    x = np.asarray(x0, dtype=float).copy()
    t = 0.0
    mode = _initial_mode(x, rs)
    ts = [t]
    xs = [x.copy()]
    modes = [mode.value]
    segments = []

    for _ in range(max_events):
        if t >= t_end:
            break
        seg_start = t
        if mode in (Mode.FLOW_LEFT, Mode.FLOW_RIGHT):
            u = 1.0 if mode is Mode.FLOW_LEFT else -1.0

            def rhs(tt, xx, uu=u):
                return A @ xx + B * uu

            def ev_cross(tt, xx):
                return C @ xx

            ev_cross.terminal = True
            ev_cross.direction = 1.0 if mode is Mode.FLOW_LEFT else -1.0
            sol = solve_ivp(rhs, (t, t_end), x, method="RK45", rtol=rtol, atol=atol,
                            events=ev_cross)
            if not sol.success:
                raise StepFailure(sol.message)
            ts.extend(sol.t[1:])
            xs.extend(sol.y.T[1:])
            modes.extend([mode.value] * (len(sol.t) - 1))
            t = float(sol.t[-1])
            x = sol.y[:, -1].copy()
            segments.append((mode, seg_start, t))
            if sol.status != 1:
                break
            x = x - C * float(C @ x) / float(C @ C)  # project onto the manifold
            if abs(equivalent_control(x, rs)) < 1.0:
                mode = Mode.SLIDING
            else:
                mode = Mode.FLOW_RIGHT if mode is Mode.FLOW_LEFT else Mode.FLOW_LEFT
        else:
            def rhs_slide(tt, xx):
                return A @ xx + B * (-(C @ (A @ xx)) / (C @ B))

            def ev_hi(tt, xx):
                return -(C @ (A @ xx)) / (C @ B) - 1.0

            def ev_lo(tt, xx):
                return -(C @ (A @ xx)) / (C @ B) + 1.0

            ev_hi.terminal = True
            ev_lo.terminal = True
            sol = solve_ivp(rhs_slide, (t, t_end), x, method="RK45", rtol=rtol, atol=atol,
                            events=(ev_hi, ev_lo))
            if not sol.success:
                raise StepFailure(sol.message)
            ys = sol.y.T.copy()
            ys = ys - np.outer(ys @ C, C) / float(C @ C)
            ts.extend(sol.t[1:])
            xs.extend(ys[1:])
            modes.extend([Mode.SLIDING.value] * (len(sol.t) - 1))
            t = float(sol.t[-1])
            x = ys[-1].copy()
            segments.append((Mode.SLIDING, seg_start, t))
            if sol.status != 1:
                break
            # exit side: u_eq -> +1 means the sliding field equals the left field
            mode = Mode.FLOW_LEFT if len(sol.t_events[0]) > 0 else Mode.FLOW_RIGHT
            u = 1.0 if mode is Mode.FLOW_LEFT else -1.0
            x = x + 1e-12 * (A @ x + B * u)  # nudge off the tangency
    else:
        raise StepFailure("event budget exhausted")

    return RelayTrajectory(
        t=np.array(ts), x=np.array(xs), mode=np.array(modes), segments=segments
    )


def _section_return(rs, state2, rtol, atol, arm=0.1, t_max=40.0):
    """Map (x1, x2) on the section x3 = 0 (ascending) to its next return.

    Returns (state2', return_time, sliding_count).  Section crossings are
    non-terminal events evaluated on the dense output; crossings before the
    arm time are ignored so that starting on the section does not retrigger.
    """
    A, B, C = rs.A, rs.B, rs.C
    x = np.array([state2[0], state2[1], 0.0])
    t = 0.0
    n_slide = 0
    mode = _initial_mode(x, rs)
    while t < t_max:
        if mode in (Mode.FLOW_LEFT, Mode.FLOW_RIGHT):
            u = 1.0 if mode is Mode.FLOW_LEFT else -1.0

            def rhs(tt, xx, uu=u):
                return A @ xx + B * uu

            def ev_cross(tt, xx):
                return C @ xx

            ev_cross.terminal = True
            ev_cross.direction = 1.0 if mode is Mode.FLOW_LEFT else -1.0

            def ev_sec(tt, xx):
                return xx[2]

            ev_sec.terminal = False
            ev_sec.direction = 1.0
            sol = solve_ivp(rhs, (t, t_max), x, method="RK45", rtol=rtol, atol=atol,
                            events=(ev_cross, ev_sec), dense_output=True)
            if not sol.success:
                raise StepFailure(sol.message)
            hits = [tt for tt in sol.t_events[1] if tt > max(arm, t + 1e-9)]
            if hits:
                xs = sol.sol(hits[0])
                return np.array([xs[0], xs[1]]), float(hits[0]), n_slide
            t = float(sol.t[-1])
            x = sol.y[:, -1].copy()
            if sol.status != 1:
                break
            x = x - C * float(C @ x) / float(C @ C)
            if abs(equivalent_control(x, rs)) < 1.0:
                mode = Mode.SLIDING
                n_slide += 1
            else:
                mode = Mode.FLOW_RIGHT if mode is Mode.FLOW_LEFT else Mode.FLOW_LEFT
        else:
            def rhs_slide(tt, xx):
                return A @ xx + B * (-(C @ (A @ xx)) / (C @ B))

            def ev_hi(tt, xx):
                return -(C @ (A @ xx)) / (C @ B) - 1.0

            def ev_lo(tt, xx):
                return -(C @ (A @ xx)) / (C @ B) + 1.0

            ev_hi.terminal = True
            ev_lo.terminal = True

            def ev_sec(tt, xx):
                return xx[2]

            ev_sec.terminal = False
            ev_sec.direction = 1.0
            sol = solve_ivp(rhs_slide, (t, t_max), x, method="RK45", rtol=rtol, atol=atol,
                            events=(ev_hi, ev_lo, ev_sec), dense_output=True)
            if not sol.success:
                raise StepFailure(sol.message)
            hits = [tt for tt in sol.t_events[2] if tt > max(arm, t + 1e-9)]
            if hits:
                xs = sol.sol(hits[0])
                xs = xs - C * float(C @ xs) / float(C @ C)
                return np.array([xs[0], xs[1]]), float(hits[0]), n_slide
            t = float(sol.t[-1])
            x = sol.y[:, -1].copy()
            x = x - C * float(C @ x) / float(C @ C)
            if sol.status != 1:
                break
            mode = Mode.FLOW_LEFT if len(sol.t_events[0]) > 0 else Mode.FLOW_RIGHT
            u = 1.0 if mode is Mode.FLOW_LEFT else -1.0
            x = x + 1e-12 * (A @ x + B * u)
    raise NoPeriodFound("no section return within horizon")


def find_periodic_orbit(
    rs: RelaySystem,
    x0,
    transient: float = 120.0,
    tol: float = 1e-9,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    max_newton: int = 15,
) -> PeriodicOrbitResult:
    """Locate the periodic orbit via Newton iteration on the section return map.

    After integrating past the transient, the last ascending crossing of
    x3 = 0 seeds a 2-D Newton solve of F(s) = s on the section; the
    finite-difference Jacobian needs two extra return-map evaluations per step.
    """
    traj = integrate_relay(rs, x0, transient, rtol=max(rtol, 1e-10), atol=max(atol, 1e-12))
    x3 = traj.x[:, 2]
    seed = None
    for i in range(len(traj.t) - 1, 0, -1):
        if x3[i - 1] < 0 <= x3[i]:
            frac = (0 - x3[i - 1]) / (x3[i] - x3[i - 1])
            seed = traj.x[i - 1] + (traj.x[i] - traj.x[i - 1]) * frac
            break
    if seed is None:
        raise NoPeriodFound("no ascending x3-crossing after transient")

    s = np.array([seed[0], seed[1]])
    period = None
    for _ in range(max_newton):
        f0, period, _ = _section_return(rs, s, rtol, atol)
        r = f0 - s
        if np.linalg.norm(r) < min(tol, 1e-10):
            break
        d = 1e-7
        J = np.empty((2, 2))
        for k in range(2):
            sp = s.copy()
            sp[k] += d
            fk, _, _ = _section_return(rs, sp, rtol, atol)
            J[:, k] = (fk - f0) / d
        s = s + np.linalg.solve(np.eye(2) - J, r)
    f0, period, _ = _section_return(rs, s, rtol, atol)
    closure = float(np.linalg.norm(f0 - s))
    if closure > tol:
        raise NoPeriodFound(f"Newton stalled at closure {closure:.3e} > {tol}")

    # one final pass along the orbit to log sliding segments
    traj = integrate_relay(rs, np.array([s[0], s[1], 0.0]), period * 1.0001, rtol=rtol, atol=atol)
    seg_times = [(t0, t1) for (m, t0, t1) in traj.segments if m is Mode.SLIDING and t0 < period]
    return PeriodicOrbitResult(
        period=float(period),
        sliding_segment_count=len(seg_times),
        segment_times=seg_times,
        closure_error=closure,
        section_state=np.array([s[0], s[1], 0.0]),
    )


def write_trajectory_csv(traj: RelayTrajectory, path, header_lines=()):
    """CSV export with columns t,x1,x2,x3,mode."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x1", "x2", "x3", "mode"])
        for t, x, m in zip(traj.t, traj.x, traj.mode):
            w.writerow([repr(float(t)), repr(float(x[0])), repr(float(x[1])), repr(float(x[2])), m])
