"""Vector fields of the 2D slow-fast core and the full 6D model.

The planar core (conformational coordinates p1 slow, p2 fast) is

    p1' = eps * ( (p2 - (a p1 + b)) (p2 - (at p1 + bt)) (alpha - p2) + V_in(t) )
    p2' = p2 * ( p1 - Gamma(p2) )

in fast time; dividing by eps gives the slow-time form. The 6D model
appends the (d, f) synaptic-resources pair, the postsynaptic conductance
g_syn and the membrane potential v, driven by p2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quartic_geometry import QuarticSpec, gamma_eval, tc_point


@dataclass(frozen=True)
class Stimulus:
    """Step input V * chi_[t_start, t_end)(t), half-open on the right.

    `timescale` names the time variable in which t_start/t_end are given
    ("fast" or "slow"); the field evaluators convert when the integration
    runs in the other variable.
    """

    V: float = 0.0
    t_start: float = 0.0
    t_end: float = 0.0
    timescale: str = "fast"

    def __post_init__(self):
        if self.V < 0:
            raise ValueError("stimulus amplitude must be >= 0")
        if self.V > 0 and not self.t_start < self.t_end:
            raise ValueError("stimulus needs t_start < t_end")
        if self.timescale not in ("fast", "slow"):
            raise ValueError(f"unknown timescale {self.timescale!r}")


@dataclass(frozen=True)
class TailParams:
    """Constants of the four non-core equations of the 6D model."""

    tau_D: float = 200.0
    tau_F: float = 2500.0
    f0: float = 0.3
    F: float = 0.25
    tau_syn: float = 20.0
    gbar_syn: float = 0.4
    C: float = 0.196
    g_L: float = 1.0 / 220.0
    E_L: float = -55.0
    E_syn: float = -57.0

    def __post_init__(self):
        for name in ("tau_D", "tau_F", "tau_syn", "gbar_syn", "C", "g_L"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    a: float
    b: float
    a_tilde: float
    b_tilde: float
    alpha: float
    quartic: QuarticSpec
    stimulus: Stimulus = field(default_factory=Stimulus)
    tail: TailParams = field(default_factory=TailParams)

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        _, _, ok = tc_point(self.quartic, self.a_tilde, self.b_tilde)
        if not ok:
            raise ValueError("Gamma(0) < -b_tilde/a_tilde: axis stability switch "
                             "lies left of the unstable equilibrium")

    @property
    def rest_state_2d(self) -> np.ndarray:
        return np.array([-self.b / self.a, 0.0])

    @property
    def rest_state_6d(self) -> np.ndarray:
        t = self.tail
        return np.array([-self.b / self.a, 0.0, 1.0, t.f0, 0.0, t.E_L])


def stimulus_eval(s: Stimulus, t: float) -> float:
    """Stimulus value at time t, in the stimulus's own time variable."""
    if s.V > 0 and s.t_start <= t < s.t_end:
        return s.V
    return 0.0


def _stimulus_at(p: ModelParams, t: float, timescale: str) -> float:
    """Stimulus seen by an integration running in `timescale` time."""
    s = p.stimulus
    if s.timescale == timescale:
        ts = t
    elif timescale == "fast":        # stimulus declared in slow time
        ts = t * p.epsilon
    else:                            # stimulus declared in fast time
        ts = t / p.epsilon
    return stimulus_eval(s, ts)


def stimulus_breakpoints(p: ModelParams, timescale: str) -> list[float]:
    """Stimulus discontinuity times converted to the integration variable."""
    s = p.stimulus
    if s.V <= 0:
        return []
    pts = [s.t_start, s.t_end]
    if s.timescale == timescale:
        return pts
    if timescale == "fast":
        return [t / p.epsilon for t in pts]
    return [t * p.epsilon for t in pts]


def slow_nullcline_factor(p: ModelParams, p1, p2):
    """The product (p2 - (a p1 + b))(p2 - (at p1 + bt))(alpha - p2)."""
    l1 = p.a * p1 + p.b
    l2 = p.a_tilde * p1 + p.b_tilde
    return (p2 - l1) * (p2 - l2) * (p.alpha - p2)


def core_field(p: ModelParams, state, t: float = 0.0, timescale: str = "fast") -> np.ndarray:
    """Right-hand side of the planar core in fast or slow time."""
    p1, p2 = state
    g = slow_nullcline_factor(p, p1, p2) + _stimulus_at(p, t, timescale)
    h = p2 * (p1 - gamma_eval(p.quartic, p2))
    if timescale == "fast":
        return np.array([p.epsilon * g, h])
    if timescale == "slow":
        return np.array([g, h / p.epsilon])
    raise ValueError(f"unknown timescale {timescale!r}")


def layer_field(p: ModelParams, p2, p1_frozen: float):
    """Fast subsystem (layer equation) with p1 frozen as a parameter."""
    return p2 * (p1_frozen - gamma_eval(p.quartic, p2))


def axis_reduced_rate(p: ModelParams, p1):
    """Reduced slow flow on the axis branch {p2 = 0}."""
    return p.alpha * (p.a * p1 + p.b) * (p.a_tilde * p1 + p.b_tilde)


def full_field(p: ModelParams, state, t: float = 0.0) -> np.ndarray:
    """Right-hand side of the 6D model, in slow time."""
    p1, p2, d, f, g_syn, v = state
    tl = p.tail
    g = slow_nullcline_factor(p, p1, p2) + _stimulus_at(p, t, "slow")
    h = p2 * (p1 - gamma_eval(p.quartic, p2)) / p.epsilon
    dd = (1.0 - d) / tl.tau_D - d * f * p2
    df = (tl.f0 - f) / tl.tau_F + tl.F * (1.0 - f) * p2
    dg = -g_syn / tl.tau_syn + tl.gbar_syn * d * f * p2
    dv = (-tl.g_L * (v - tl.E_L) - g_syn * (v - tl.E_syn)) / tl.C
    return np.array([g, h, dd, df, dg, dv])
