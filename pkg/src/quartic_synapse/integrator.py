"""Adaptive time integration with event detection and classification.

Scenario integrations run the planar core in (p1, log p2) coordinates so
the exponentially thin passages along the axis stay accurate, and restart
exactly at the stimulus discontinuities. Events mark spikes (p2 crossing
the 0.5 threshold), landings on / exits from the axis neighbourhood
(p2 crossing delta = epsilon) and fall-offs below the leftmost fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .model_dynamics import (ModelParams, full_field, core_field,
                       stimulus_breakpoints, _stimulus_at)
from .equilibrium_analysis import find_equilibria, EqLabel
from .errors import StepSizeUnderflow
from .quartic_geometry import FoldKind, fold_points, gamma_eval

SPIKE_THRESHOLD = 0.5
LOG_P2_CLIP = 60.0


@dataclass(frozen=True)
class Event:
    kind: str        # spike_on | spike_off | landing | exit | fold_falloff
    time: float
    state: np.ndarray


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # shape (n, dim)
    events: list[Event] = field(default_factory=list)

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]


@dataclass(frozen=True)
class EventSpec:
    kind: str
    fn: Callable
    direction: float = 0.0
    terminal: bool = False


@dataclass(frozen=True)
class Classification:
    kind: str                    # equilibrium | limit_cycle | undecided
    transient_loops: int
    label: str | None = None     # equilibrium label
    period: float | None = None
    amplitude: float | None = None   # max p2 over one cycle
    cycle_window: tuple[float, float] | None = None


def integrate(field_fn, state0, t_span, tol: float = 1e-8,
              events: list[EventSpec] | None = None,
              breakpoints: list[float] | None = None,
              method: str = "LSODA", atol: float | None = None,
              max_step: float = np.inf) -> Trajectory:
    """Adaptive integration of field_fn(t, y), restarted at breakpoints."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    events = events or []
    t0, t1 = t_span
    cuts = sorted({t for t in (breakpoints or []) if t0 < t < t1})
    seg_edges = [t0, *cuts, t1]
    atol = tol * 1e-2 if atol is None else atol

    ts, ys, evs = [], [], []
    y = np.asarray(state0, dtype=float)
    stop = False
    for lo, hi in zip(seg_edges, seg_edges[1:]):
        ev_fns = []
        for spec in events:
            fn = (lambda t, yy, _f=spec.fn: _f(t, yy))
            fn.direction = spec.direction
            fn.terminal = spec.terminal
            ev_fns.append(fn)
        sol = solve_ivp(field_fn, (lo, hi), y, method=method, rtol=tol,
                        atol=atol, events=ev_fns, dense_output=False,
                        max_step=max_step)
        if not sol.success:
            raise StepSizeUnderflow(f"integration failed on [{lo}, {hi}]: {sol.message}")
        ts.append(sol.t if not ts else sol.t[1:])
        ys.append(sol.y.T if not ys else sol.y.T[1:])
        for spec, t_ev, y_ev in zip(events, sol.t_events, sol.y_events):
            for te, ye in zip(t_ev, y_ev):
                evs.append(Event(kind=spec.kind, time=float(te), state=np.array(ye)))
        y = sol.y[:, -1]
        if sol.status == 1:      # a terminal event fired
            stop = True
        if stop:
            break
    evs.sort(key=lambda e: e.time)
    return Trajectory(times=np.concatenate(ts), states=np.vstack(ys), events=evs)


def _core_log_rhs(p: ModelParams, timescale: str):
    q = p.quartic

    def rhs(t, y):
        p1, u = y
        p2 = np.exp(min(u, LOG_P2_CLIP))
        l1 = p.a * p1 + p.b
        l2 = p.a_tilde * p1 + p.b_tilde
        g = (p2 - l1) * (p2 - l2) * (p.alpha - p2) + _stimulus_at(p, t, timescale)
        h = p1 - gamma_eval(q, p2)
        if timescale == "fast":
            return [p.epsilon * g, h]
        return [g, h / p.epsilon]

    return rhs


def _core_event_specs(p: ModelParams, delta: float) -> list[EventSpec]:
    lmin = min((f for f in fold_points(p.quartic) if f.kind == FoldKind.LOCAL_MIN),
               key=lambda f: f.p2)
    thr, ld, lf = np.log(SPIKE_THRESHOLD), np.log(delta), np.log(lmin.p2)
    return [
        EventSpec("spike_on", lambda t, y: y[1] - thr, direction=1.0),
        EventSpec("spike_off", lambda t, y: y[1] - thr, direction=-1.0),
        EventSpec("landing", lambda t, y: y[1] - ld, direction=-1.0),
        EventSpec("exit", lambda t, y: y[1] - ld, direction=1.0),
        EventSpec("fold_falloff", lambda t, y: y[1] - lf, direction=-1.0),
    ]


def _delog(traj: Trajectory, idx: int = 1) -> Trajectory:
    states = traj.states.copy()
    states[:, idx] = np.exp(states[:, idx])
    events = [Event(e.kind, e.time,
                    np.concatenate([e.state[:idx], [np.exp(e.state[idx])],
                                    e.state[idx + 1:]]))
              for e in traj.events]
    return Trajectory(times=traj.times, states=states, events=events)


def simulate_core(p: ModelParams, state0, t_span, timescale: str = "fast",
                  tol: float = 1e-9, delta: float | None = None,
                  p2_floor: float | None = None) -> Trajectory:
    """Planar-core scenario run with events, in fast or slow time.

    With p2_floor set, the exponentially small approach to the axis is
    capped at that amplitude: the orbit rides the floor until the axis
    turns repelling underneath it, then is released. This models the
    finite-amplitude cutoff (solver precision or biophysical noise) that
    limits delayed loss of stability in practice; without it the exit
    follows the exact balance relation however deep the contraction.
    """
    delta = p.epsilon if delta is None else delta
    p1_0, p2_0 = state0
    if p2_0 < 0:
        raise ValueError("p2 must start nonnegative")
    if p2_0 == 0.0:
        # the axis is exactly invariant; reduce to the p1 equation
        def rhs(t, y):
            l1 = p.a * y[0] + p.b
            l2 = p.a_tilde * y[0] + p.b_tilde
            g = l1 * l2 * p.alpha + _stimulus_at(p, t, timescale)
            return [p.epsilon * g if timescale == "fast" else g]

        traj = integrate(rhs, [p1_0], t_span, tol=tol, atol=tol * 1e-3,
                         breakpoints=stimulus_breakpoints(p, timescale))
        states = np.column_stack([traj.states[:, 0], np.zeros(len(traj.times))])
        return Trajectory(times=traj.times, states=states, events=[])

    u0 = np.log(p2_0)
    # starting exactly on an event section breaks root bracketing; nudge off
    for thr in (SPIKE_THRESHOLD, delta):
        if u0 == np.log(thr):
            u0 -= 1e-12
    breaks = stimulus_breakpoints(p, timescale)
    if p2_floor is None:
        traj = integrate(_core_log_rhs(p, timescale), [p1_0, u0], t_span,
                         tol=tol, atol=tol * 1e-3,
                         events=_core_event_specs(p, delta),
                         breakpoints=breaks)
        return _delog(traj)
    return _delog(_simulate_core_floored(p, (p1_0, max(u0, np.log(p2_floor))),
                                         t_span, timescale, tol, delta,
                                         np.log(p2_floor), breaks))


def _simulate_core_floored(p, y0, t_span, timescale, tol, delta, u_floor,
                           breaks) -> Trajectory:
    """Free flight alternating with floor-riding segments (log coords)."""
    rhs = _core_log_rhs(p, timescale)
    t, t_end = t_span
    y = np.array(y0, dtype=float)
    ts, ys, evs = [], [], []

    def collect(traj):
        ts.append(traj.times if not ts else traj.times[1:])
        ys.append(traj.states if not ys else traj.states[1:])
        evs.extend(e for e in traj.events if e.kind != "floor")

    while t < t_end - 1e-12:
        touch = EventSpec("floor", lambda tt, yy: yy[1] - u_floor,
                          direction=-1.0, terminal=True)
        traj = integrate(rhs, y, (t, t_end), tol=tol, atol=tol * 1e-3,
                         events=[*_core_event_specs(p, delta), touch],
                         breakpoints=breaks)
        collect(traj)
        t, y = traj.times[-1], traj.states[-1].copy()
        if t >= t_end - 1e-12:
            break
        # ride the floor: p1 advances on the axis until it turns repelling
        release = EventSpec("floor", lambda tt, yy: rhs(tt, yy)[1],
                            direction=1.0, terminal=True)
        frozen = (lambda tt, yy: [rhs(tt, yy)[0], 0.0])
        y[1] = u_floor
        traj = integrate(frozen, y, (t, t_end), tol=tol, atol=tol * 1e-3,
                         events=[release], breakpoints=breaks)
        collect(traj)
        t, y = traj.times[-1], traj.states[-1].copy()
    evs.sort(key=lambda e: e.time)
    return Trajectory(times=np.concatenate(ts), states=np.vstack(ys), events=evs)


def simulate_full(p: ModelParams, state0, t_span, tol: float = 1e-9) -> Trajectory:
    """Full 6D scenario run, in slow time, with core events attached."""
    state0 = np.asarray(state0, dtype=float)
    if state0[1] == 0.0:
        def rhs(t, y):
            z = np.concatenate([[y[0], 0.0], y[1:]])
            f = full_field(p, z, t)
            return np.concatenate([[f[0]], f[2:]])

        traj = integrate(rhs, np.concatenate([[state0[0]], state0[2:]]), t_span,
                         tol=tol, atol=tol * 1e-3,
                         breakpoints=stimulus_breakpoints(p, "slow"))
        states = np.column_stack([traj.states[:, 0], np.zeros(len(traj.times)),
                                  traj.states[:, 1:]])
        return Trajectory(times=traj.times, states=states, events=[])

    def rhs(t, y):
        z = y.copy()
        z[1] = np.exp(min(y[1], LOG_P2_CLIP))
        f = full_field(p, z, t)
        f = np.asarray(f, dtype=float)
        f[1] = f[1] / z[1]
        return f

    y0 = state0.copy()
    y0[1] = np.log(state0[1])
    for thr in (SPIKE_THRESHOLD, p.epsilon):
        if y0[1] == np.log(thr):
            y0[1] -= 1e-12
    traj = integrate(rhs, y0, t_span, tol=tol, atol=tol * 1e-3,
                     events=_core_event_specs(p, p.epsilon),
                     breakpoints=stimulus_breakpoints(p, "slow"))
    return _delog(traj)


def classify_asymptotics(p: ModelParams, traj: Trajectory,
                         cycle_rtol: float = 1e-3,
                         eq_tol: float = 1e-6) -> Classification:
    """Decide between equilibrium convergence and limit-cycle capture.

    Loops are delimited by successive spike_on events; three consecutive
    loops whose signatures (max p2, p1 extrema, duration) agree within
    cycle_rtol mark the periodic regime. The transient loop count is the
    number of spikes strictly before the first matched loop.
    """
    t, states = traj.times, traj.states
    p1, p2 = states[:, 0], states[:, 1]

    # equilibrium convergence: final state parked at an equilibrium
    eqs = find_equilibria(p)
    final = states[-1, :2]
    tail = t >= t[0] + 0.95 * (t[-1] - t[0])
    for eq in eqs:
        d = np.hypot(p1[tail] - eq.location[0], p2[tail] - eq.location[1])
        if np.all(d < eq_tol):
            n_spikes = sum(1 for e in traj.events if e.kind == "spike_on")
            return Classification(kind="equilibrium", label=eq.label.value,
                                  transient_loops=n_spikes)

    ons = [e.time for e in traj.events if e.kind == "spike_on"]
    if len(ons) >= 4:
        sigs, spans = [], []
        for lo, hi in zip(ons, ons[1:]):
            m = (t >= lo) & (t < hi)
            if not np.any(m):
                continue
            sigs.append((np.max(p2[m]), np.max(p1[m]), np.min(p1[m]), hi - lo))
            spans.append((lo, hi))
        for k in range(len(sigs) - 2):
            ok = True
            for j in range(2):
                s0, s1 = np.array(sigs[k + j]), np.array(sigs[k + j + 1])
                if np.any(np.abs(s1 - s0) > cycle_rtol * np.maximum(1.0, np.abs(s0))):
                    ok = False
                    break
            if ok:
                lo, hi = spans[k]
                return Classification(kind="limit_cycle", transient_loops=k,
                                      period=hi - lo, amplitude=sigs[k][0],
                                      cycle_window=(lo, hi))
    return Classification(kind="undecided",
                          transient_loops=sum(1 for e in traj.events
                                              if e.kind == "spike_on"))


def slow_branch_fractions(p: ModelParams, traj: Trajectory,
                          window: tuple[float, float]) -> tuple[float, float]:
    """Fraction of cycle time spent slowly on the lower / upper branch.

    Slow means |p2'| below epsilon times the cycle's peak |p2'|; lower
    branch is the attracting piece between the first two folds, upper the
    one past the last fold.
    """
    folds = fold_points(p.quartic)
    m = (traj.times >= window[0]) & (traj.times <= window[1])
    t, p1, p2 = traj.times[m], traj.states[m, 0], traj.states[m, 1]
    speed = np.abs(p2 * (p1 - gamma_eval(p.quartic, p2)))
    slow = speed < p.epsilon * np.max(speed)
    dt = np.diff(t)
    mid_slow = slow[:-1] & slow[1:]
    total = t[-1] - t[0]
    lower = (p2[:-1] > folds[0].p2) & (p2[:-1] < folds[1].p2)
    upper = p2[:-1] > folds[2].p2
    frac_lower = float(np.sum(dt[mid_slow & lower]) / total)
    frac_upper = float(np.sum(dt[mid_slow & upper]) / total)
    return frac_lower, frac_upper
