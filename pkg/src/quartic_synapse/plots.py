"""Deterministic SVG figures: phase planes, time series, bifurcation diagrams.

Rendering is pinned for reproducibility: Agg backend, fixed svg.hashsalt,
no date metadata, so identical inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .continuation import CycleBranch, EqBranchPoint, HopfPoint
from .errors import MissingArtifact
from .integrator import Trajectory
from .model_dynamics import ModelParams
from .quartic_geometry import fold_points, gamma_deriv, gamma_eval, gamma_zeros

matplotlib.rcParams["svg.hashsalt"] = "quartic-synapse"

_STABLE = dict(color="tab:blue", lw=1.4)
_UNSTABLE = dict(color="tab:red", lw=1.4)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _draw_critical_manifold(ax, p: ModelParams):
    """Quartic curve and axis, solid where attracting, dashed where repelling."""
    q = p.quartic
    zeros = gamma_zeros(q)
    folds = fold_points(q)
    edges = [0.0, *[f.p2 for f in folds], 1.05 * zeros[-1]]
    # stability on the curve: attracting iff -p2 * Gamma'(p2) < 0
    for lo, hi in zip(edges, edges[1:]):
        grid = np.linspace(lo, hi, 200)
        mid = 0.5 * (lo + hi)
        style = "-" if -mid * gamma_deriv(q, mid) < 0 else "--"
        ax.plot(gamma_eval(q, grid), grid, style, color="black", lw=1.0)
    # axis: attracting left of Gamma(0), repelling right of it
    g0 = q.gamma0
    xlim = ax.get_xlim()
    lo_x = min(xlim[0], -p.b / p.a - 0.5)
    hi_x = max(xlim[1], gamma_eval(q, folds[-1].p2) + 0.5)
    ax.plot([lo_x, g0], [0, 0], "-", color="black", lw=1.0)
    ax.plot([g0, hi_x], [0, 0], "--", color="black", lw=1.0)
    for f in folds:
        ax.plot(f.p1, f.p2, "o", ms=4, color="green")
    ax.plot(g0, 0.0, "o", ms=4, color="green")


def phase_plane_svg(path, p: ModelParams,
                    traj: Trajectory | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if traj is not None:
        ax.plot(traj.states[:, 0], traj.states[:, 1], color="tab:purple",
                lw=0.9)
    _draw_critical_manifold(ax, p)
    ax.set_xlabel("p1")
    ax.set_ylabel("p2")
    return _save(fig, path)


def time_series_svg(path, traj: Trajectory,
                    columns: tuple[str, ...] = ("p1", "p2")) -> Path:
    names = ("p1", "p2", "d", "f", "g_syn", "v")
    fig, axes = plt.subplots(len(columns), 1, figsize=(6, 2.0 * len(columns)),
                             sharex=True, squeeze=False)
    for ax, name in zip(axes[:, 0], columns):
        idx = names.index(name)
        if idx >= traj.states.shape[1]:
            raise MissingArtifact(f"trajectory has no column {name!r}")
        ax.plot(traj.times, traj.states[:, idx], color="tab:purple", lw=0.9)
        ax.set_ylabel(name)
    axes[-1, 0].set_xlabel("t")
    return _save(fig, path)


def bifurcation_svg(path, eq_points: list[EqBranchPoint],
                    hopfs: list[HopfPoint],
                    branches: list[CycleBranch]) -> Path:
    """(alpha, p1) diagram: equilibria solid/dashed, cycles by stability."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    al = np.array([q.alpha for q in eq_points])
    p1 = np.array([q.p1 for q in eq_points])
    stable = np.array([q.stability == "stable" for q in eq_points])
    for flag, style in ((True, "-"), (False, "--")):
        masked = np.where(stable == flag, p1, np.nan)
        ax.plot(al, masked, style, color="black", lw=1.2)
    for br in branches:
        for key in ("p1_max", "p1_min"):
            xs = [q.alpha for q in br.points]
            ys = [getattr(q, key) for q in br.points]
            st = [q.stability == "stable" for q in br.points]
            for flag, style in ((True, _STABLE), (False, _UNSTABLE)):
                masked = [y if f == flag else np.nan for y, f in zip(ys, st)]
                ax.plot(xs, masked, **style)
    for h in hopfs:
        ax.plot(h.alpha, h.p1, "o", color="black", ms=5)
        ax.annotate(h.label, (h.alpha, h.p1), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    ax.set_xlabel("alpha")
    ax.set_ylabel("p1")
    return _save(fig, path)
