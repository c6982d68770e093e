#!/usr/bin/env python3
"""Compute the full bifurcation diagram for one quartic shape.

Usage: bifurcation_diagram.py [R1] [OUT_DIR]

Continues the equilibrium family, locates the three Hopf points, grows the
limit-cycle branch from each of them, and writes branch CSVs plus the
(alpha, p1) diagram SVG.
"""

import sys
import time

from quartic_synapse.config import parse_config
from quartic_synapse.cli_runner import cmd_continue_lc
from quartic_synapse import exports
from pathlib import Path


def diagram_config(r1: float) -> dict:
    return {
        "model": {
            "epsilon": 0.02, "a": -1.0, "b": -2.3,
            "a_tilde": -1.0, "b_tilde": -2.2, "alpha": 0.22, "Q": 0.05,
            "c": [-3.0, -3.0, -3.0, -3.0], "r": [r1, 4.0, 2.0, 0.0],
        },
        "continuation": {"alpha_lo": 0.001, "T_max": 2500.0,
                         "max_points": 800},
    }


if __name__ == "__main__":
    r1 = float(sys.argv[1]) if len(sys.argv) > 1 else 6.4
    out = Path(sys.argv[2] if len(sys.argv) > 2 else f"out/diagram_r1_{r1:g}")
    out.mkdir(parents=True, exist_ok=True)
    cfg = parse_config(diagram_config(r1))
    t0 = time.perf_counter()
    artifacts = cmd_continue_lc(cfg, out)
    exports.write_manifest(out, cfg, "continue-lc",
                           {"simulate_tol": cfg.simulate.tol}, artifacts)
    print(f"r1={r1:g}: {len(artifacts)} artifacts in "
          f"{time.perf_counter() - t0:.1f}s -> {out}")
