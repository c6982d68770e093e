"""Flat-file artifact writers: CSV tables, JSON records, run manifests.

Numbers are written with 17 significant digits ('.' decimal separator),
rows newline-terminated, one header row per file, so repeated runs with
identical configs produce bit-identical files.
"""

from __future__ import annotations

import json
import platform
from pathlib import Path

import matplotlib
import numpy as np
import scipy

from . import __version__
from .config import RunConfig, config_hash
from .continuation import CycleBranch, EqBranchPoint, HopfPoint
from .errors import ModelError
from .integrator import Classification, Trajectory
from .quartic_geometry import FoldPoint

FULL_COLUMNS = ("t", "p1", "p2", "d", "f", "g_syn", "v")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")
    return path


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    dim = traj.states.shape[1]
    header = FULL_COLUMNS[:1 + dim]
    rows = (np.concatenate([[t], s]) for t, s in zip(traj.times, traj.states))
    return write_csv(path, header, rows)


def write_events_csv(path, traj: Trajectory) -> Path:
    rows = ((e.kind, e.time, e.state[0], e.state[1]) for e in traj.events)
    return write_csv(path, ("kind", "time", "p1", "p2"), rows)


def write_eq_branch_csv(path, points: list[EqBranchPoint]) -> Path:
    rows = ((q.alpha, q.p1, q.p2, q.trace, q.det, q.stability) for q in points)
    return write_csv(path, ("alpha", "p1", "p2", "trace", "det", "stability"),
                     rows)


def write_cycle_branch_csv(path, branch: CycleBranch) -> Path:
    rows = ((q.alpha, q.p1_max, q.p1_min, q.period, q.stability, q.n_segments)
            for q in branch.points)
    return write_csv(path, ("alpha", "p1_max", "p1_min", "period",
                            "stability", "n_segments"), rows)


def write_markers_csv(path, hopfs: list[HopfPoint],
                      folds: list[FoldPoint]) -> Path:
    rows = [("hopf", h.label, h.alpha, h.p1, h.p2) for h in hopfs]
    rows += [("fold", f.kind.value, f.p2, f.p1, f.p2) for f in folds]
    return write_csv(path, ("kind", "label", "alpha", "p1", "p2"), rows)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    raise TypeError(f"not JSON-serializable: {type(x)}")


def classification_record(cls: Classification) -> dict:
    return {"kind": cls.kind, "transient_loops": cls.transient_loops,
            "label": cls.label, "period": cls.period,
            "amplitude": cls.amplitude, "cycle_window": cls.cycle_window}


def write_manifest(out_dir, cfg: RunConfig, command: str,
                   tolerances: dict, artifacts: list[str]) -> Path:
    """Record everything needed to reproduce the run byte-for-byte."""
    record = {
        "command": command,
        "config_sha256": config_hash(cfg.raw),
        "config": cfg.raw,
        "tolerances": tolerances,
        "artifacts": sorted(artifacts),
        "versions": {
            "quartic_synapse": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
    return write_json(Path(out_dir) / "manifest.json", record)


def write_error_record(out_dir, exc: Exception, command: str) -> Path:
    record = {
        "command": command,
        "error_type": type(exc).__name__,
        "is_model_error": isinstance(exc, ModelError),
        "message": str(exc),
    }
    return write_json(Path(out_dir) / "error.json", record)
