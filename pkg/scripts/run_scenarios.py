#!/usr/bin/env python3
"""Run the four shipped stimulus scenarios and print their classifications.

Artifacts (trajectory/event CSVs, SVG figures, manifests) land in
out/scenarios/<name>/.
"""

import sys

from quartic_synapse.cli_runner import main

SCENARIOS = ("fig3", "fig4", "fig5", "fig6")

if __name__ == "__main__":
    out_root = sys.argv[1] if len(sys.argv) > 1 else "out/scenarios"
    status = 0
    for name in SCENARIOS:
        print(f"== {name} ==")
        rc = main(["scenario", name, "--out", f"{out_root}/{name}"])
        status = status or rc
    raise SystemExit(status)
