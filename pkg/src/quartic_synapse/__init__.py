"""Numerical laboratory for a quartic slow-fast neurotransmitter-release model.

Modules
-------
quartic_geometry      factored-quartic nullcline: zeros, folds, stability
model_dynamics        parameters and vector fields (2D core and 6D model)
equilibrium_analysis  equilibria, analytic Jacobian, classification
entry_exit            delayed-exit computation along the invariant axis
integrator            event-aware scenario integration and classification
shooting              multiple-shooting periodic solver with Floquet data
continuation          pseudo-arclength continuation and branch topology
config                JSON run configuration and shipped presets
exports               CSV / JSON artifact writers and run manifests
plots                 deterministic SVG figures
cli_runner            command-line front end
"""

__version__ = "0.1.0"
