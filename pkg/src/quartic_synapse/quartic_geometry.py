"""Quartic fast-nullcline geometry.

The fast nullcline is the graph p1 = Gamma(p2) of a fully factored quartic

    Gamma(p2) = Q * (c1*p2 + r1)(c2*p2 + r2)(c3*p2 + r3)(c4*p2 + r4),

an M-shaped curve with four nonnegative zeros, three folds (two minima,
one maximum in between), and a transcritical point at (Gamma(0), 0) where
the curve meets the invariant axis {p2 = 0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import DuplicateZero, FoldNotFound, NonNegativityViolation

ZERO_SEP_TOL = 1e-9


class FoldKind(Enum):
    LOCAL_MIN = "local_min"
    LOCAL_MAX = "local_max"


class BranchStability(Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    FOLD = "fold"


@dataclass(frozen=True)
class QuarticSpec:
    """Coefficients (Q, c_i, r_i) of the factored quartic nullcline."""

    Q: float
    c: tuple[float, float, float, float]
    r: tuple[float, float, float, float]

    def __post_init__(self):
        if not self.Q > 0:
            raise ValueError(f"Q must be positive, got {self.Q}")
        if len(self.c) != 4 or len(self.r) != 4:
            raise ValueError("c and r must each have four entries")
        if any(ci == 0 for ci in self.c):
            raise ValueError("all c_i must be nonzero (degree must be four)")
        # validates distinctness / nonnegativity of the zeros
        gamma_zeros(self)

    @property
    def gamma0(self) -> float:
        """Value of the quartic at p2 = 0 (the transcritical abscissa)."""
        return self.Q * self.r[0] * self.r[1] * self.r[2] * self.r[3]


@dataclass(frozen=True)
class FoldPoint:
    p2: float
    p1: float
    kind: FoldKind


def gamma_eval(q: QuarticSpec, p2):
    """Evaluate the quartic in its factored form."""
    p2 = np.asarray(p2, dtype=float)
    out = np.full_like(p2, q.Q)
    for ci, ri in zip(q.c, q.r):
        out = out * (ci * p2 + ri)
    return out if out.ndim else float(out)

def gamma_deriv(q: QuarticSpec, p2):
    """First derivative of the quartic, by the product rule over factors."""
    p2 = np.asarray(p2, dtype=float)
    acc = np.zeros_like(p2)
    for i in range(4):
        term = np.full_like(p2, q.c[i])
        for j in range(4):
            if j != i:
                term = term * (q.c[j] * p2 + q.r[j])
        acc = acc + term
    out = q.Q * acc
    return out if out.ndim else float(out)


def gamma_second_deriv(q: QuarticSpec, p2):
    """Second derivative, as the pairwise product-rule sum."""
    p2 = np.asarray(p2, dtype=float)
    acc = np.zeros_like(p2)
    for i in range(4):
        for j in range(4):
            if j == i:
                continue
            term = np.full_like(p2, q.c[i] * q.c[j])
            for k in range(4):
                if k not in (i, j):
                    term = term * (q.c[k] * p2 + q.r[k])
            acc = acc + term
    out = q.Q * acc
    return out if out.ndim else float(out)


def gamma_zeros(q: QuarticSpec) -> list[float]:
    """The four zeros -r_i/c_i, sorted ascending.

    Raises DuplicateZero if two zeros coincide within tolerance and
    NonNegativityViolation if any zero is negative.
    """
    zeros = sorted(-ri / ci for ci, ri in zip(q.c, q.r))
    scale = max(1.0, abs(zeros[0]), abs(zeros[-1]))
    if zeros[0] < -ZERO_SEP_TOL * scale:
        raise NonNegativityViolation(f"smallest zero {zeros[0]} is negative")
    for lo, hi in zip(zeros, zeros[1:]):
        if hi - lo <= ZERO_SEP_TOL * scale:
            raise DuplicateZero(f"zeros {lo} and {hi} coincide within tolerance")
    return zeros


def _deriv_coeff_scale(q: QuarticSpec) -> float:
    """max |coefficient| of the cubic Gamma', for residual scaling."""
    prod = np.array([q.Q])
    for ci, ri in zip(q.c, q.r):
        prod = np.convolve(prod, [ci, ri])
    dcoef = np.polyder(prod)
    return float(np.max(np.abs(dcoef)))


def fold_points(q: QuarticSpec) -> list[FoldPoint]:
    """The three folds of the quartic, bracketed between consecutive zeros.

    Each root of the cubic Gamma' is refined to |Gamma'| <= 1e-12 * scale,
    where scale is the largest coefficient magnitude of the cubic. Fold
    kinds come from the sign of Gamma''; in increasing p2 the pattern is
    always [min, max, min].
    """
    zeros = gamma_zeros(q)
    scale = _deriv_coeff_scale(q)
    folds = []
    for lo, hi in zip(zeros, zeros[1:]):
        pad = 1e-13 * max(1.0, abs(lo), abs(hi))
        try:
            root = brentq(lambda p: gamma_deriv(q, p), lo + pad, hi - pad,
                          xtol=1e-15, rtol=8.9e-16)
        except ValueError as exc:
            raise FoldNotFound(f"no fold bracket in ({lo}, {hi})") from exc
        # one Newton polish step
        d1, d2 = gamma_deriv(q, root), gamma_second_deriv(q, root)
        if d2 != 0:
            root -= d1 / d2
        if abs(gamma_deriv(q, root)) > 1e-12 * scale:
            raise FoldNotFound(f"fold residual too large at p2={root}")
        kind = FoldKind.LOCAL_MIN if gamma_second_deriv(q, root) > 0 else FoldKind.LOCAL_MAX
        folds.append(FoldPoint(p2=root, p1=gamma_eval(q, root), kind=kind))
    return folds


def tc_point(q: QuarticSpec, a_tilde: float, b_tilde: float) -> tuple[float, float, bool]:
    """The transcritical point (Gamma(0), 0) and its validity flag.

    The flag asserts Gamma(0) >= -b_tilde/a_tilde, i.e. the axis stability
    switch happens to the right of the unstable axis equilibrium.
    """
    g0 = q.gamma0
    return g0, 0.0, bool(g0 >= -b_tilde / a_tilde)


def fast_branch_stability(q: QuarticSpec, p2: float, tol: float = 1e-10) -> BranchStability:
    """Stability of the quartic branch at p2, from the layer linearization.

    On the nullcline the layer equation linearizes to -p2 * Gamma'(p2):
    negative means attracting, positive repelling.
    """
    if not p2 > 0:
        raise ValueError("branch stability is defined for p2 > 0")
    lam = -p2 * gamma_deriv(q, p2)
    scale = max(1.0, _deriv_coeff_scale(q))
    if abs(lam) < tol * scale:
        return BranchStability.FOLD
    return BranchStability.ATTRACTING if lam < 0 else BranchStability.REPELLING
