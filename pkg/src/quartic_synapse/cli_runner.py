"""Command-line front end: config-driven scenarios, analyses and exports.

Exit codes: 0 success, 2 configuration error, 3 numerical failure. Every
run writes a manifest (config hash, versions, tolerances, artifact list)
into the output directory; failures leave a machine-readable error.json.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import exports, plots
from .config import RunConfig
from .continuation import (ContinuationControls, branch_topology,
                           equilibrium_branch, lc_continue)
from .entry_exit import exit_point, simulated_exit
from .errors import ConfigError, ModelError
from .integrator import (classify_asymptotics, simulate_core, simulate_full,
                         slow_branch_fractions)
from .equilibrium_analysis import find_equilibria
from .quartic_geometry import fold_points, gamma_zeros, tc_point

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load(args) -> RunConfig:
    if args.preset is not None:
        cfg = cfgmod.load_preset(args.preset)
    elif args.config is not None:
        cfg = cfgmod.load_config(args.config)
    else:
        raise ConfigError("provide --config PATH or --preset figN")
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol must be positive")
        cfg = cfgmod.RunConfig(
            model=cfg.model,
            simulate=cfgmod.SimulateSpec(
                **{**cfg.simulate.__dict__, "tol": args.tol}),
            entry_exit=cfg.entry_exit, continuation=cfg.continuation,
            raw=cfg.raw)
    return cfg


def _tolerances(cfg: RunConfig, extra: dict | None = None) -> dict:
    tols = {"simulate_tol": cfg.simulate.tol}
    if extra:
        tols.update(extra)
    return tols


def _run_simulation(cfg: RunConfig):
    p, s = cfg.model, cfg.simulate
    if s.system == "full":
        x0 = np.array(s.initial) if s.initial is not None else p.rest_state_6d
        traj = simulate_full(p, x0, (0.0, s.t_end), tol=s.tol)
    else:
        x0 = s.initial if s.initial is not None else (-p.b / p.a, p.epsilon)
        traj = simulate_core(p, x0, (0.0, s.t_end), timescale=s.timescale,
                             tol=s.tol, p2_floor=s.p2_floor)
    return traj


def cmd_simulate(cfg: RunConfig, out: Path) -> list[str]:
    traj = _run_simulation(cfg)
    cls = classify_asymptotics(cfg.model, traj)
    record = exports.classification_record(cls)
    if cls.kind == "limit_cycle" and cls.cycle_window is not None:
        lo_frac, hi_frac = slow_branch_fractions(cfg.model, traj,
                                                 cls.cycle_window)
        record["slow_fraction_lower"] = lo_frac
        record["slow_fraction_upper"] = hi_frac
    arts = [
        exports.write_trajectory_csv(out / "trajectory.csv", traj),
        exports.write_events_csv(out / "events.csv", traj),
        exports.write_json(out / "classification.json", record),
        plots.phase_plane_svg(out / "phase_plane.svg", cfg.model, traj),
        plots.time_series_svg(out / "time_series.svg", traj),
    ]
    return [a.name for a in arts]


def cmd_entry_exit(cfg: RunConfig, out: Path) -> list[str]:
    p, e = cfg.model, cfg.entry_exit
    g0 = p.quartic.gamma0
    lo = -p.b_tilde / p.a_tilde + e.margin
    hi = g0 - e.margin
    if not lo < hi:
        raise ConfigError("entry interval is empty; reduce entry_exit.margin")
    grid = np.linspace(lo, hi, e.n_entries)
    rows = []
    for p10 in grid:
        closed = exit_point(p, float(p10), method="closed_form")
        quadr = exit_point(p, float(p10), method="quadrature")
        row = [p10, closed.p11, quadr.p11, abs(closed.p11 - quadr.p11)]
        if e.simulate_check:
            sim = simulated_exit(p, float(p10), delta=e.delta)
            row += [sim.p11, abs(sim.p11 - closed.p11)]
        rows.append(row)
    header = ["p10", "p11_closed_form", "p11_quadrature", "method_gap"]
    if e.simulate_check:
        header += ["p11_simulated", "simulation_gap"]
    art = exports.write_csv(out / "entry_exit.csv", header, rows)
    return [art.name]


def cmd_folds(cfg: RunConfig, out: Path) -> list[str]:
    q = cfg.model.quartic
    folds = fold_points(q)
    g0, _, ok = tc_point(q, cfg.model.a_tilde, cfg.model.b_tilde)
    rows = [(f.kind.value, f.p2, f.p1) for f in folds]
    rows.append(("transcritical", 0.0, g0))
    arts = [
        exports.write_csv(out / "folds.csv", ("kind", "p2", "p1"), rows),
        exports.write_json(out / "geometry.json", {
            "zeros": gamma_zeros(q), "gamma0": g0,
            "axis_switch_right_of_U": ok}),
    ]
    return [a.name for a in arts]


def cmd_equilibria(cfg: RunConfig, out: Path) -> list[str]:
    eqs = find_equilibria(cfg.model)
    rows = [(eq.label.value, eq.location[0], eq.location[1],
             eq.eigenvalues[0].real, eq.eigenvalues[0].imag,
             eq.eigenvalues[1].real, eq.eigenvalues[1].imag,
             eq.classification.value) for eq in eqs]
    art = exports.write_csv(
        out / "equilibria.csv",
        ("label", "p1", "p2", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
         "class"), rows)
    return [art.name]


def _alpha_window(cfg: RunConfig) -> tuple[float, float]:
    c = cfg.continuation
    hi = c.alpha_hi
    if hi is None:
        hi = 1.05 * gamma_zeros(cfg.model.quartic)[-1]
    return c.alpha_lo, hi


def cmd_continue_eq(cfg: RunConfig, out: Path) -> list[str]:
    lo, hi = _alpha_window(cfg)
    points, hopfs = equilibrium_branch(cfg.model, lo, hi)
    arts = [
        exports.write_eq_branch_csv(out / "equilibrium_branch.csv", points),
        exports.write_markers_csv(out / "markers.csv", hopfs,
                                  fold_points(cfg.model.quartic)),
    ]
    return [a.name for a in arts]


def _continue_cycles(cfg: RunConfig, out: Path) -> list[str]:
    lo, hi = _alpha_window(cfg)
    points, hopfs = equilibrium_branch(cfg.model, lo, hi)
    controls = ContinuationControls(T_max=cfg.continuation.T_max,
                                    max_points=cfg.continuation.max_points,
                                    alpha_min=lo)
    origins = cfg.continuation.origins or [h.label for h in hopfs]
    branches = []
    for h in hopfs:
        if h.label not in origins:
            continue
        branches.append(lc_continue(cfg.model, h, hopfs, controls))
    topo = branch_topology(hopfs, branches)
    arts = [exports.write_eq_branch_csv(out / "equilibrium_branch.csv", points),
            exports.write_markers_csv(out / "markers.csv", hopfs,
                                      fold_points(cfg.model.quartic))]
    for br in branches:
        arts.append(exports.write_cycle_branch_csv(
            out / f"cycle_branch_{br.origin}.csv", br))
    arts.append(exports.write_json(out / "topology.json", {
        "hopf_labels": topo.hopf_labels,
        "hopf_alphas": {h.label: h.alpha for h in hopfs},
        "connected_pairs": [list(pr) for pr in topo.connected_pairs],
        "small_alpha_branches": topo.small_alpha_branches,
        "inconclusive": topo.inconclusive,
        "terminations": topo.terminations,
    }))
    arts.append(plots.bifurcation_svg(out / "bifurcation.svg", points, hopfs,
                                      branches))
    return [a.name for a in arts]


def cmd_continue_lc(cfg: RunConfig, out: Path) -> list[str]:
    return _continue_cycles(cfg, out)


def cmd_scenario(cfg: RunConfig, out: Path, name: str) -> list[str]:
    if name in ("fig3", "fig4", "fig5", "fig6"):
        return cmd_simulate(cfg, out)
    return _continue_cycles(cfg, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quartic-synapse",
        description="Numerical lab for the quartic slow-fast synapse model")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, preset_default=None):
        sp.add_argument("--config", metavar="PATH",
                        help="JSON configuration file")
        sp.add_argument("--preset", choices=cfgmod.PRESET_NAMES,
                        default=preset_default,
                        help="shipped preset configuration")
        sp.add_argument("--out", metavar="DIR", default="out",
                        help="output directory (default: out)")
        sp.add_argument("--tol", type=float, default=None,
                        help="override the simulation tolerance")

    for name in ("simulate", "entry-exit", "folds", "equilibria",
                 "continue-eq", "continue-lc"):
        common(sub.add_parser(name))
    scen = sub.add_parser("scenario", help="run a shipped figure scenario")
    scen.add_argument("figure", choices=cfgmod.PRESET_NAMES)
    common(scen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    command = args.command
    try:
        if command == "scenario" and args.config is None and args.preset is None:
            args.preset = args.figure
        cfg = _load(args)
    except ConfigError as exc:
        exports.write_error_record(out, exc, command)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    handlers = {
        "simulate": lambda: cmd_simulate(cfg, out),
        "entry-exit": lambda: cmd_entry_exit(cfg, out),
        "folds": lambda: cmd_folds(cfg, out),
        "equilibria": lambda: cmd_equilibria(cfg, out),
        "continue-eq": lambda: cmd_continue_eq(cfg, out),
        "continue-lc": lambda: cmd_continue_lc(cfg, out),
        "scenario": lambda: cmd_scenario(cfg, out, args.figure),
    }
    try:
        artifacts = handlers[command]()
    except ConfigError as exc:
        exports.write_error_record(out, exc, command)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        exports.write_error_record(out, exc, command)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest = exports.write_manifest(out, cfg, command, _tolerances(cfg),
                                      artifacts)
    print(f"wrote {len(artifacts)} artifact(s) + {manifest.name} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
