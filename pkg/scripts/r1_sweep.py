#!/usr/bin/env python3
"""Sweep the first quartic zero r1 and report how the branch topology changes.

The two outermost Hopf-branch families exchange their connection pattern
somewhere in r1 between 6 and 6.15; this script brackets the switch.
"""

import sys
import time

from quartic_synapse.config import parse_config
from quartic_synapse.continuation import (ContinuationControls,
                                          branch_topology, equilibrium_branch,
                                          lc_continue)

from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))
from bifurcation_diagram import diagram_config  # noqa: E402

R1_VALUES = (5.0, 6.0, 6.08, 6.15, 6.4)

if __name__ == "__main__":
    values = [float(v) for v in sys.argv[1:]] or list(R1_VALUES)
    for r1 in values:
        cfg = parse_config(diagram_config(r1))
        p = cfg.model
        t0 = time.perf_counter()
        _, hopfs = equilibrium_branch(p, 1e-3, 2.3)
        controls = ContinuationControls(T_max=2500.0, max_points=800)
        branches = [lc_continue(p, h, hopfs, controls) for h in hopfs]
        topo = branch_topology(hopfs, branches)
        print(f"r1={r1:<5g} connected={topo.connected_pairs} "
              f"small_alpha={topo.small_alpha_branches} "
              f"({time.perf_counter() - t0:.1f}s)")
