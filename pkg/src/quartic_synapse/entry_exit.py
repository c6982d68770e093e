"""Delayed-exit computation for orbits hugging the axis {p2 = 0}.

An orbit entering a neighbourhood of the axis at p1 = p10 (between the
unstable axis equilibrium and the transcritical abscissa Gamma(0)) leaves
it at the p11 > Gamma(0) that balances attraction against repulsion:

    int_{p10}^{p11} (x - Gamma(0)) / ((a x + b)(at x + bt)) dx = 0.

Three routes are provided: the closed-form antiderivative (partial
fractions), adaptive quadrature, and direct simulation of the fast-time
system; they must agree and cross-check each other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from .model_dynamics import ModelParams
from .errors import EntryOutOfRange, NoExit, NoExitBeforeTmax, PoleInInterval
from .quartic_geometry import fold_points, gamma_eval, FoldKind


@dataclass(frozen=True)
class EntryExitResult:
    p10: float
    p11: float
    method: str          # "closed_form" | "quadrature" | "simulation"
    residual: float


def _poles(p: ModelParams) -> tuple[float, float]:
    pole1 = -p.b / p.a
    pole2 = -p.b_tilde / p.a_tilde
    if abs(p.a * p.b_tilde - p.a_tilde * p.b) < 1e-14 * max(
            1.0, abs(p.a * p.b_tilde)):
        raise ValueError("coincident integrand poles: a*bt == at*b")
    return pole1, pole2


def _antiderivative(p: ModelParams, x):
    """Closed-form antiderivative of (x - G0)/((a x + b)(at x + bt))."""
    g0 = p.quartic.gamma0
    det = p.a * p.b_tilde - p.a_tilde * p.b
    A = -(p.a * g0 + p.b) / det
    B = (p.a_tilde * g0 + p.b_tilde) / det
    return (A / p.a) * np.log(np.abs(p.a * x + p.b)) \
        + (B / p.a_tilde) * np.log(np.abs(p.a_tilde * x + p.b_tilde))


def exit_integral(p: ModelParams, p10: float, p11: float,
                  method: str = "closed_form") -> float:
    """The balance integral over [p10, p11], by either route."""
    lo, hi = min(p10, p11), max(p10, p11)
    for pole in _poles(p):
        if lo < pole < hi:
            raise PoleInInterval(f"pole {pole} inside [{lo}, {hi}]")
    if method == "closed_form":
        return float(_antiderivative(p, p11) - _antiderivative(p, p10))
    if method == "quadrature":
        g0 = p.quartic.gamma0

        def integrand(x):
            return (x - g0) / ((p.a * x + p.b) * (p.a_tilde * x + p.b_tilde))

        with warnings.catch_warnings():
            # long flat tails trip quad's roundoff heuristics; accuracy is
            # cross-checked against the closed form in the tests
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(integrand, p10, p11, epsabs=1e-13, epsrel=1e-13,
                          limit=400)
        return float(val)
    raise ValueError(f"unknown method {method!r}")


def exit_point(p: ModelParams, p10: float, method: str = "closed_form",
               p11_max: float = 1e12) -> EntryExitResult:
    """The unique exit p11 > Gamma(0) balancing the entry at p10.

    The bracket grows geometrically from Gamma(0); NoExit is raised only
    if no sign change appears below p11_max.
    """
    g0 = p.quartic.gamma0
    _, pole2 = _poles(p)
    lo_adm = min(pole2, g0)  # entry interval is (-bt/at, Gamma(0))
    if p10 == g0:
        return EntryExitResult(p10=p10, p11=g0, method=method, residual=0.0)
    if not lo_adm < p10 < g0:
        raise EntryOutOfRange(f"p10={p10} outside ({lo_adm}, {g0})")

    def phi(x):
        return exit_integral(p, p10, x, method=method)

    # phi is negative just above Gamma(0) and increasing; expand the bracket
    step = max(abs(g0) + 1.0, 1e-2)
    hi = g0 + step
    while hi <= p11_max and phi(hi) < 0:
        step *= 4.0
        hi = g0 + step
    if phi(hi) < 0:
        raise NoExit(f"no sign change below p11_max={p11_max}")
    lo = g0 + 1e-300
    p11 = brentq(phi, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=300)
    return EntryExitResult(p10=p10, p11=float(p11), method=method,
                           residual=abs(phi(p11)))


def simulated_exit(p: ModelParams, p10: float, delta: float | None = None,
                   t_max: float = 1e7, rtol: float = 1e-10,
                   atol: float = 1e-12) -> EntryExitResult:
    """Exit point realized by fast-time simulation from (p10, delta).

    Integrates the stimulus-free core in (p1, log p2) coordinates, so the
    exponentially small passage near the axis stays well resolved, and
    reports p1 where p2 re-crosses delta upward. delta defaults to epsilon.
    """
    if delta is None:
        delta = p.epsilon
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    u0 = np.log(delta)
    q = p.quartic

    def rhs(t, y):
        p1, u = y
        p2 = np.exp(min(u, 60.0))
        l1 = p.a * p1 + p.b
        l2 = p.a_tilde * p1 + p.b_tilde
        return [p.epsilon * (p2 - l1) * (p2 - l2) * (p.alpha - p2),
                p1 - gamma_eval(q, p2)]

    def crossing(t, y):
        return y[1] - u0

    crossing.terminal = True
    crossing.direction = 1.0

    sol = solve_ivp(rhs, (0.0, t_max), [p10, u0], method="DOP853",
                    events=crossing, rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise NoExitBeforeTmax(f"integrator failed: {sol.message}")
    if not sol.t_events[0].size:
        raise NoExitBeforeTmax(f"no upward re-crossing of delta before t={t_max}")
    p11 = float(sol.y_events[0][0][0])
    res = abs(exit_integral(p, p10, p11, method="closed_form"))
    return EntryExitResult(p10=p10, p11=p11, method="simulation", residual=res)


def upper_branch_accessible(p: ModelParams, p10: float) -> bool:
    """Whether the exit overshoots the local maximum of the quartic."""
    result = exit_point(p, p10)
    local_max = next(f for f in fold_points(p.quartic) if f.kind == FoldKind.LOCAL_MAX)
    return result.p11 > local_max.p1
