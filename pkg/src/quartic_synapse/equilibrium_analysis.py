"""Equilibria of the planar core: location, analytic Jacobian, stability.

Without stimulus the core has two axis equilibria, S = (-b/a, 0) and
U = (-bt/at, 0), and one on the quartic branch, U_tilde = (Gamma(alpha),
alpha), provided the two oblique slow-nullcline lines do not intersect
the quartic curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .model_dynamics import ModelParams, slow_nullcline_factor
from .errors import AssumptionViolated, NotAnEquilibrium
from .quartic_geometry import gamma_deriv, gamma_eval, gamma_zeros

RESIDUAL_TOL = 1e-12
HYPERBOLICITY_TOL = 1e-10


class EqLabel(Enum):
    S = "S"
    U = "U"
    U_TILDE = "U_tilde"


class EqClass(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NON_HYPERBOLIC = "non_hyperbolic"


@dataclass(frozen=True)
class Equilibrium:
    location: np.ndarray
    label: EqLabel | None
    eigenvalues: np.ndarray
    classification: EqClass


def autonomous_core_field(p: ModelParams, state) -> np.ndarray:
    """Fast-time core field with the stimulus off."""
    p1, p2 = state
    g = slow_nullcline_factor(p, p1, p2)
    h = p2 * (p1 - gamma_eval(p.quartic, p2))
    return np.array([p.epsilon * g, h])


def jacobian(p: ModelParams, state) -> np.ndarray:
    """Analytic Jacobian of the fast-time core field."""
    p1, p2 = state
    l1 = p.a * p1 + p.b
    l2 = p.a_tilde * p1 + p.b_tilde
    g = gamma_eval(p.quartic, p2)
    dg = gamma_deriv(p.quartic, p2)
    d11 = p.epsilon * (p.alpha - p2) * (-p.a * (p2 - l2) - p.a_tilde * (p2 - l1))
    d12 = p.epsilon * ((p2 - l2) * (p.alpha - p2) + (p2 - l1) * (p.alpha - p2)
                       - (p2 - l1) * (p2 - l2))
    d21 = p2
    d22 = (p1 - g) - p2 * dg
    return np.array([[d11, d12], [d21, d22]])


def _check_no_line_intersection(p: ModelParams, n_grid: int = 4000):
    """Verify neither oblique slow-nullcline line meets the quartic curve.

    Sampled on a fine p2 grid over the physical range (up to just past the
    largest zero of the quartic), with sign-change refinement.
    """
    zmax = gamma_zeros(p.quartic)[-1]
    grid = np.linspace(0.0, 1.05 * zmax, n_grid)
    gam = gamma_eval(p.quartic, grid)
    for a, b, name in ((p.a, p.b, "p2=a*p1+b"), (p.a_tilde, p.b_tilde, "p2=at*p1+bt")):
        # on the line, p1 = (p2 - b)/a; intersection iff Gamma(p2) crosses it
        diff = gam - (grid - b) / a
        sign = np.sign(diff)
        hits = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
        if hits.size:
            i = hits[0]
            root = brentq(lambda s: gamma_eval(p.quartic, s) - (s - b) / a,
                          grid[i], grid[i + 1])
            raise AssumptionViolated(
                f"line {name} intersects the quartic curve at p2={root:.6g}")


def classify_equilibrium(p: ModelParams, location, label: EqLabel | None = None) -> Equilibrium:
    """Eigenvalues of the analytic Jacobian and the resulting class."""
    location = np.asarray(location, dtype=float)
    res = np.linalg.norm(autonomous_core_field(p, location))
    if res > RESIDUAL_TOL:
        raise NotAnEquilibrium(f"residual {res:.3g} exceeds {RESIDUAL_TOL}")
    eig = np.linalg.eigvals(jacobian(p, location))
    re = eig.real
    if np.max(np.abs(re)) < HYPERBOLICITY_TOL:
        cls = EqClass.NON_HYPERBOLIC
    elif np.all(re < 0):
        cls = EqClass.STABLE
    else:
        cls = EqClass.UNSTABLE
    return Equilibrium(location=location, label=label, eigenvalues=eig, classification=cls)


def find_equilibria(p: ModelParams) -> list[Equilibrium]:
    """S, U and (for alpha > 0) U_tilde, each classified."""
    _check_no_line_intersection(p)
    out = [
        classify_equilibrium(p, (-p.b / p.a, 0.0), EqLabel.S),
        classify_equilibrium(p, (-p.b_tilde / p.a_tilde, 0.0), EqLabel.U),
    ]
    if p.alpha > 0:
        loc = (gamma_eval(p.quartic, p.alpha), p.alpha)
        out.append(classify_equilibrium(p, loc, EqLabel.U_TILDE))
    return out


def u_tilde_determinant(p: ModelParams) -> float:
    """Constant term eps*alpha*(alpha-(a G+b))*(alpha-(at G+bt)) at U_tilde."""
    G = gamma_eval(p.quartic, p.alpha)
    return (p.epsilon * p.alpha
            * (p.alpha - (p.a * G + p.b))
            * (p.alpha - (p.a_tilde * G + p.b_tilde)))
