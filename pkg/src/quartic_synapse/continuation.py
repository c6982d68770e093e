"""Branch continuation: equilibria in alpha, Hopf points, limit cycles.

The equilibrium branch (Gamma(alpha), alpha) is classified analytically;
its Hopf points sit exactly where Gamma'(alpha) = 0 with positive
linearization determinant. Limit-cycle branches are grown from each Hopf
by pseudo-arclength continuation of the multiple-shooting system, with
the mesh re-balanced after every accepted point and Floquet multipliers
from the scaled product of segment variational matrices.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .model_dynamics import ModelParams
from .errors import SeedCorrectionFailed
from .quartic_geometry import fold_points, gamma_deriv, gamma_eval
from . import shooting
from .shooting import (ShootResult, balanced_mesh, expansion_budget,
                       field_parts, floquet_multipliers, nodes_from_samples,
                       orbit_samples, solve_periodic)


class Termination(Enum):
    DOMAIN_EDGE = "domain_edge"
    PERIOD_OVERFLOW = "period_overflow"
    STEP_UNDERFLOW = "step_underflow"
    CONNECTS_TO = "connects_to"
    FOLD_TURNAROUND = "fold_turnaround"
    POINT_BUDGET = "point_budget"


@dataclass(frozen=True)
class HopfPoint:
    label: str               # "H1", "H2", ... ordered by alpha
    alpha: float
    p1: float
    p2: float
    frequency: float         # imaginary part of the critical eigenvalue


@dataclass(frozen=True)
class EqBranchPoint:
    alpha: float
    p1: float
    p2: float
    trace: float
    det: float
    stability: str           # "stable" | "unstable"


@dataclass(frozen=True)
class CyclePoint:
    alpha: float
    period: float
    p1_max: float
    p1_min: float
    p2_max: float
    p2_min: float
    diameter: float
    multipliers: tuple[complex, complex]
    stability: str           # "stable" | "unstable" | "neutral"
    n_segments: int
    residual: float
    is_fold: bool = False


@dataclass
class CycleBranch:
    origin: str                       # Hopf label the branch emanates from
    points: list[CyclePoint]
    termination: Termination
    connects_to: str | None = None    # Hopf label when CONNECTS_TO


def _eq_trace_det(p: ModelParams, alpha: float) -> tuple[float, float]:
    """Trace and determinant of the linearization at (Gamma(alpha), alpha)."""
    G = gamma_eval(p.quartic, alpha)
    tr = -alpha * gamma_deriv(p.quartic, alpha)
    det = (p.epsilon * alpha * (alpha - (p.a * G + p.b))
           * (alpha - (p.a_tilde * G + p.b_tilde)))
    return tr, det


def equilibrium_branch(p: ModelParams, alpha_lo: float, alpha_hi: float,
                       n_points: int = 400
                       ) -> tuple[list[EqBranchPoint], list[HopfPoint]]:
    """Sample the branch-equilibrium family and locate its Hopf points."""
    alphas = np.linspace(alpha_lo, alpha_hi, n_points)
    pts = []
    for a in alphas:
        tr, det = _eq_trace_det(p, a)
        stab = "stable" if (tr < 0 and det > 0) else "unstable"
        pts.append(EqBranchPoint(alpha=float(a),
                                 p1=float(gamma_eval(p.quartic, a)),
                                 p2=float(a), trace=tr, det=det,
                                 stability=stab))
    hopfs = []
    tr_vals = np.array([q.trace for q in pts])
    for i in np.nonzero(np.sign(tr_vals[:-1]) * np.sign(tr_vals[1:]) < 0)[0]:
        a_h = brentq(lambda a: _eq_trace_det(p, a)[0],
                     alphas[i], alphas[i + 1], xtol=1e-14, rtol=8.9e-16)
        _, det = _eq_trace_det(p, a_h)
        if det > 0:
            hopfs.append((a_h, np.sqrt(det)))
    # labels run H1, H2, ... from the greatest Hopf alpha downward
    hopfs.sort(reverse=True)
    return pts, [HopfPoint(label=f"H{k + 1}", alpha=float(a),
                           p1=float(gamma_eval(p.quartic, a)), p2=float(a),
                           frequency=float(w))
                 for k, (a, w) in enumerate(hopfs)]


@dataclass
class ContinuationControls:
    n_seg: int = 32
    n_seg_max: int = 192
    nats_per_seg: float = 8.0
    h0: float = 0.02
    h_max: float = 0.6
    h_min: float = 1e-8
    max_points: int = 400
    T_max: float = 1e4
    alpha_min: float = 1e-3
    alpha_max: float | None = None    # default: just past the largest zero
    rtol: float = 1e-10
    atol: float = 1e-12
    res_tol: float = 1e-9
    seed_radius: float = 1e-3
    connect_diameter: float = 0.05
    connect_alpha_tol: float = 1e-3
    grown_diameter: float = 0.2
    weight_alpha: float = 5.0
    weight_period: float = 0.5
    max_dalpha: float = 0.1           # per-step sheet-jump guards
    max_diam_ratio: float = 2.5


def _hopf_frame(p: ModelParams, alpha_h: float):
    """Equilibrium (log coords), frequency and the critical eigenvector."""
    x_h = np.array([gamma_eval(p.quartic, alpha_h), np.log(alpha_h)])
    _, J, _ = field_parts(p, x_h, alpha_h)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    omega = np.sqrt(det)
    v = np.array([J[0, 1], 1j * omega - J[0, 0]])
    v /= np.max(np.abs([v.real, v.imag]))
    return x_h, omega, v


def lc_seed_near_hopf(p: ModelParams, hopf: HopfPoint, radius: float,
                      c: ContinuationControls) -> ShootResult:
    """Small cycle near a Hopf point, corrected to the shooting system.

    The initial guess is the linearized center motion at amplitude
    `radius`; the first node is pinned there and (period, alpha) are free.
    """
    x_h, omega, v = _hopf_frame(p, hopf.alpha)
    m = c.n_seg
    s = np.arange(m) / m
    X0 = x_h[None, :] + radius * (np.cos(2 * np.pi * s)[:, None] * v.real
                                  - np.sin(2 * np.pi * s)[:, None] * v.imag)
    pin = X0[0].copy()
    w = np.full(m, 1.0 / m)

    def constraints(X, T, alpha):
        rows = np.zeros((2, 2 * m + 2))
        rows[0, 0] = 1.0
        rows[1, 1] = 1.0
        return X[0] - pin, rows

    sol = solve_periodic(p, X0, 2 * np.pi / omega, hopf.alpha, w,
                         constraints, rtol=c.rtol, atol=c.atol,
                         res_tol=c.res_tol)
    if sol is None:
        raise SeedCorrectionFailed(
            f"no converged cycle near {hopf.label} at radius {radius}")
    return sol


def _pack(X, T, alpha):
    return np.concatenate([X.reshape(-1), [T, alpha]])


def _node_diameter(X):
    """(p1, p2) diameter of a node set given in (p1, log p2) coords."""
    p2 = np.exp(np.minimum(X[:, 1], shooting.U_CLIP))
    return float(np.hypot(np.ptp(X[:, 0]), np.ptp(p2)))


def _weights(X, T, c: ContinuationControls):
    """Diagonal weights of the arclength metric.

    log-p2 node coordinates are measured relative to their magnitude:
    cycles hugging the axis deepen by hundreds of log units per step,
    which is cheap for the corrector and must not throttle the step.
    Period changes are measured relatively for the same reason.
    """
    m = X.shape[0]
    d = np.empty(2 * m + 2)
    d[0:2 * m:2] = 1.0 / np.sqrt(2 * m)
    d[1:2 * m:2] = 1.0 / (np.sqrt(2 * m) * (1.0 + np.abs(X[:, 1])))
    d[2 * m] = c.weight_period / max(1.0, abs(T))
    d[2 * m + 1] = c.weight_alpha
    return d


def _summarize(p: ModelParams, sol: ShootResult, ts, xs,
               c: ContinuationControls, is_fold=False) -> CyclePoint:
    p1 = xs[:, 0]
    p2 = np.exp(np.minimum(xs[:, 1], shooting.U_CLIP))
    diam = float(np.hypot(p1.max() - p1.min(), p2.max() - p2.min()))
    lams = floquet_multipliers(sol.M)
    # nontrivial multiplier: the one farther from the trivial value 1
    nt = lams[int(np.argmax(np.abs(lams - 1.0)))]
    if abs(nt) < 1.0 - 1e-6:
        stab = "stable"
    elif abs(nt) > 1.0 + 1e-6:
        stab = "unstable"
    else:
        stab = "neutral"
    return CyclePoint(alpha=sol.alpha, period=sol.T,
                      p1_max=float(p1.max()), p1_min=float(p1.min()),
                      p2_max=float(p2.max()), p2_min=float(p2.min()),
                      diameter=diam, multipliers=(complex(lams[0]), complex(lams[1])),
                      stability=stab, n_segments=sol.X.shape[0],
                      residual=sol.residual, is_fold=is_fold)


def lc_continue(p: ModelParams, hopf: HopfPoint, all_hopfs: list[HopfPoint],
                    c: ContinuationControls | None = None) -> CycleBranch:
    """Grow the limit-cycle branch emanating from one Hopf point."""
    c = c or ContinuationControls()
    alpha_max = c.alpha_max
    if alpha_max is None:
        from .quartic_geometry import gamma_zeros
        alpha_max = 1.05 * gamma_zeros(p.quartic)[-1]

    sol_prev = lc_seed_near_hopf(p, hopf, c.seed_radius, c)
    sol_cur = lc_seed_near_hopf(p, hopf, 2 * c.seed_radius, c)
    ts, xs = orbit_samples(p, sol_cur, c.rtol, c.atol)
    points = [_summarize(p, sol_cur, ts, xs, c)]
    ts_prev, _xs_prev = orbit_samples(p, sol_prev, c.rtol, c.atol)
    xs_prev = _xs_prev

    h = c.h0
    grown = False
    termination = Termination.POINT_BUDGET
    connects_to = None
    last_dalpha = 0.0

    while len(points) < c.max_points:
        # re-balance the mesh on the current orbit; grow it if the
        # accumulated expansion wants more segments
        nats = expansion_budget(p, ts, xs, sol_cur.alpha)
        m = int(np.clip(max(c.n_seg, int(np.ceil(nats / c.nats_per_seg)) + 8),
                        c.n_seg, c.n_seg_max))
        w = balanced_mesh(p, ts, xs, sol_cur.alpha, m)
        X_cur = nodes_from_samples(ts, xs, w, sol_cur.T)
        X_prev = nodes_from_samples(ts_prev, xs_prev, w, ts_prev[-1])
        U_cur = _pack(X_cur, sol_cur.T, sol_cur.alpha)
        U_prev = _pack(X_prev, ts_prev[-1], sol_prev.alpha)

        D = _weights(X_cur, sol_cur.T, c)
        tan = U_cur - U_prev
        nrm = np.linalg.norm(D * tan)
        if nrm == 0:
            termination = Termination.STEP_UNDERFLOW
            break
        tan /= nrm

        # integral phase condition over all nodes: anchoring a single node
        # is ill-conditioned wherever the orbit is slow, and the resulting
        # phase slippage wrecks the secant tangent
        F_ref, _, _ = field_parts(p, X_cur, sol_cur.alpha)
        F_ref = F_ref / np.linalg.norm(F_ref)
        X_ref = X_cur.copy()

        sol_new = None
        while h >= c.h_min:
            U_pred = U_cur + h * tan
            arc_row = (D ** 2) * tan

            def constraints(X, T, alpha):
                U = _pack(X, T, alpha)
                r_phase = float(np.sum(F_ref * (X - X_ref)))
                r_arc = float(arc_row @ (U - U_pred))
                rows = np.zeros((2, 2 * m + 2))
                rows[0, :2 * m] = F_ref.reshape(-1)
                rows[1] = arc_row
                return np.array([r_phase, r_arc]), rows

            try:
                sol_new = solve_periodic(
                    p, U_pred[:2 * m].reshape(m, 2), U_pred[2 * m],
                    U_pred[2 * m + 1], w, constraints,
                    rtol=c.rtol, atol=c.atol, res_tol=c.res_tol)
            except Exception:
                sol_new = None
            if sol_new is not None:
                # the shooting system also admits a degenerate family of
                # zero-period, zero-amplitude "orbits"; falling onto it
                # means the predictor overshot, so retry with a smaller step
                spread_pred = np.ptp(U_pred[:2 * m].reshape(m, 2), axis=0)
                spread_new = np.ptp(sol_new.X, axis=0)
                if (sol_new.T < 0.2 * U_pred[2 * m]
                        or np.any(spread_new < 0.2 * spread_pred - 1e-12)):
                    sol_new = None
            if sol_new is not None:
                # reject implausible per-step jumps: the corrector can land
                # on a coexisting cycle family (several overlap in alpha)
                dn = _node_diameter(sol_new.X)
                dc = _node_diameter(X_cur)
                # softened so the guard never blocks the final collapse
                # onto a Hopf point (tiny diameters shrink by large factors)
                ratio = (dn + 0.05) / (dc + 0.05)
                if (abs(sol_new.alpha - sol_cur.alpha) > c.max_dalpha
                        or ratio > c.max_diam_ratio
                        or ratio < 1.0 / c.max_diam_ratio):
                    sol_new = None
            if sol_new is not None:
                break
            h *= 0.5
        if sol_new is None:
            termination = Termination.STEP_UNDERFLOW
            break

        dalpha = sol_new.alpha - sol_cur.alpha
        is_fold = bool(last_dalpha != 0.0 and dalpha * last_dalpha < 0)
        last_dalpha = dalpha

        sol_prev, ts_prev, xs_prev = sol_cur, ts, xs
        sol_cur = sol_new
        ts, xs = orbit_samples(p, sol_cur, c.rtol, c.atol)
        pt = _summarize(p, sol_cur, ts, xs, c, is_fold=is_fold)
        points.append(pt)

        if pt.diameter > c.grown_diameter:
            grown = True
        if sol_cur.T > c.T_max:
            termination = Termination.PERIOD_OVERFLOW
            break
        if not (c.alpha_min <= sol_cur.alpha <= alpha_max):
            termination = Termination.DOMAIN_EDGE
            break
        if grown and pt.diameter < c.connect_diameter:
            tgt = min(all_hopfs, key=lambda hp: abs(hp.alpha - sol_cur.alpha))
            if abs(tgt.alpha - sol_cur.alpha) < c.connect_alpha_tol:
                termination = Termination.CONNECTS_TO
                connects_to = tgt.label
            else:
                termination = Termination.DOMAIN_EDGE
            break

        if sol_new.newton_iters <= 5:
            h = min(h * 1.4, c.h_max)

    return CycleBranch(origin=hopf.label, points=points,
                       termination=termination, connects_to=connects_to)


@dataclass
class BranchTopology:
    hopf_labels: list[str]
    connected_pairs: list[tuple[str, str]]
    small_alpha_branches: list[str]   # origins whose branch heads to tiny alpha
    inconclusive: list[str]
    terminations: dict[str, str]


def branch_topology(hopfs: list[HopfPoint],
                    branches: list[CycleBranch]) -> BranchTopology:
    """Classify how the cycle branches tie the Hopf points together."""
    pairs, small, inconclusive, terms = [], [], [], {}
    for br in branches:
        terms[br.origin] = br.termination.value
        if br.termination is Termination.CONNECTS_TO and br.connects_to:
            if br.connects_to == br.origin:
                # hairpinned back onto its own origin: no information
                inconclusive.append(br.origin)
                continue
            pair = tuple(sorted((br.origin, br.connects_to)))
            if pair not in pairs:
                pairs.append(pair)
        elif br.termination in (Termination.PERIOD_OVERFLOW,
                                Termination.DOMAIN_EDGE):
            if br.points and br.points[-1].alpha < min(h.alpha for h in hopfs):
                small.append(br.origin)
            else:
                inconclusive.append(br.origin)
        else:
            inconclusive.append(br.origin)
    return BranchTopology(hopf_labels=[h.label for h in hopfs],
                          connected_pairs=pairs,
                          small_alpha_branches=small,
                          inconclusive=inconclusive,
                          terminations=terms)


def with_alpha(p: ModelParams, alpha: float) -> ModelParams:
    """A copy of the parameter set at a different alpha."""
    return dataclasses.replace(p, alpha=alpha)
