"""Multiple-shooting solver for periodic orbits of the planar core.

Orbits are represented by node states on a (possibly non-uniform) time
mesh, integrated segment-by-segment in (p1, log p2) coordinates together
with the variational matrix and the sensitivities to period and alpha.
Working in log p2 keeps the exponentially thin axis passages well scaled:
the huge normal expansion of the axis becomes a mere shear there, so a
moderate segment count survives even for near-heteroclinic cycles.

All segments are advanced in lockstep by an embedded Dormand-Prince 5(4)
step with a shared adaptive step size; the inner loop is numba-compiled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .model_dynamics import ModelParams
from .errors import StepSizeUnderflow
from .quartic_geometry import gamma_deriv, gamma_eval

U_CLIP = 60.0


def field_parts(p: ModelParams, X, alpha):
    """Vectorized field, Jacobian and d/dalpha in (p1, u=log p2) coords.

    X has shape (..., 2); returns f (..., 2), J (..., 2, 2), fa (..., 2).
    """
    p1 = X[..., 0]
    u = X[..., 1]
    p2 = np.exp(np.minimum(u, U_CLIP))
    l1 = p.a * p1 + p.b
    l2 = p.a_tilde * p1 + p.b_tilde
    A = p2 - l1
    B = p2 - l2
    C = alpha - p2
    g = gamma_eval(p.quartic, p2)
    dg = gamma_deriv(p.quartic, p2)
    f = np.stack([p.epsilon * A * B * C, p1 - g], axis=-1)
    J = np.empty(np.shape(p1) + (2, 2))
    J[..., 0, 0] = p.epsilon * C * (-p.a * B - p.a_tilde * A)
    J[..., 0, 1] = p.epsilon * p2 * (B * C + A * C - A * B)
    J[..., 1, 0] = 1.0
    J[..., 1, 1] = -dg * p2
    fa = np.stack([p.epsilon * A * B, np.zeros_like(p1)], axis=-1)
    return f, J, fa


# Dormand-Prince 5(4) tableau
_DP_A = np.zeros((7, 7))
_DP_A[1, 0] = 1 / 5
_DP_A[2, :2] = [3 / 40, 9 / 40]
_DP_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_DP_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_DP_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_DP_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                   11 / 84, 0.0])
_DP_ERR = _DP_B5 - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                             -92097 / 339200, 187 / 2100, 1 / 40])


@njit(cache=True)
def _rhs(Y, out, w, T, alpha, eps, a, b, at, bt, Q, cc, rr):
    m = Y.shape[0]
    nf = cc.shape[0]
    fac = np.empty(nf)
    for i in range(m):
        p1 = Y[i, 0]
        u = Y[i, 1]
        if u > 60.0:
            u = 60.0
        p2 = np.exp(u)
        l1 = a * p1 + b
        l2 = at * p1 + bt
        A = p2 - l1
        B = p2 - l2
        C = alpha - p2
        g = Q
        for j in range(nf):
            fac[j] = cc[j] * p2 + rr[j]
            g *= fac[j]
        dg = 0.0
        for j in range(nf):
            term = Q * cc[j]
            for k in range(nf):
                if k != j:
                    term *= fac[k]
            dg += term
        f1 = eps * A * B * C
        f2 = p1 - g
        J11 = eps * C * (-a * B - at * A)
        J12 = eps * p2 * (B * C + A * C - A * B)
        J22 = -dg * p2
        fa1 = eps * A * B
        wT = w[i] * T
        out[i, 0] = wT * f1
        out[i, 1] = wT * f2
        out[i, 2] = wT * (J11 * Y[i, 2] + J12 * Y[i, 4])
        out[i, 3] = wT * (J11 * Y[i, 3] + J12 * Y[i, 5])
        out[i, 4] = wT * (Y[i, 2] + J22 * Y[i, 4])
        out[i, 5] = wT * (Y[i, 3] + J22 * Y[i, 5])
        out[i, 6] = w[i] * f1 + wT * (J11 * Y[i, 6] + J12 * Y[i, 7])
        out[i, 7] = w[i] * f2 + wT * (Y[i, 6] + J22 * Y[i, 7])
        out[i, 8] = wT * (fa1 + J11 * Y[i, 8] + J12 * Y[i, 9])
        out[i, 9] = wT * (Y[i, 8] + J22 * Y[i, 9])


@njit(cache=True)
def _flow_jit(X, T, alpha, w, eps, a, b, at, bt, Q, cc, rr,
              rtol, atol, A_, B5, ERR, rec_s, rec_x, record, max_steps):
    """Advance all segments over s in [0, 1] with a shared adaptive step.

    Returns (Y, status, n_recorded); status: 0 ok, 1 step underflow,
    2 step budget exceeded, 3 sample buffer full.
    """
    m = X.shape[0]
    Y = np.zeros((m, 10))
    for i in range(m):
        Y[i, 0] = X[i, 0]
        Y[i, 1] = X[i, 1]
        Y[i, 2] = 1.0
        Y[i, 5] = 1.0
    s = 0.0
    dt = 1e-3
    nrec = 0
    if record:
        rec_s[0] = 0.0
        for i in range(m):
            rec_x[0, i, 0] = Y[i, 0]
            rec_x[0, i, 1] = Y[i, 1]
        nrec = 1
    k = np.zeros((7, m, 10))
    ytmp = np.zeros((m, 10))
    y5 = np.zeros((m, 10))
    nsteps = 0
    while s < 1.0:
        nsteps += 1
        if nsteps > max_steps:
            return Y, 2, nrec
        if dt > 1.0 - s:
            dt = 1.0 - s
        _rhs(Y, k[0], w, T, alpha, eps, a, b, at, bt, Q, cc, rr)
        for st in range(1, 7):
            for i in range(m):
                for c in range(10):
                    acc = 0.0
                    for j in range(st):
                        acc += A_[st, j] * k[j, i, c]
                    ytmp[i, c] = Y[i, c] + dt * acc
            _rhs(ytmp, k[st], w, T, alpha, eps, a, b, at, bt, Q, cc, rr)
        errsq = 0.0
        ok = True
        for i in range(m):
            for c in range(10):
                acc5 = 0.0
                e = 0.0
                for j in range(7):
                    acc5 += B5[j] * k[j, i, c]
                    e += ERR[j] * k[j, i, c]
                yn = Y[i, c] + dt * acc5
                y5[i, c] = yn
                ay = abs(Y[i, c])
                ayn = abs(yn)
                sc = atol + rtol * (ay if ay > ayn else ayn)
                d = dt * e / sc
                errsq += d * d
                if not np.isfinite(yn):
                    ok = False
        enorm = np.sqrt(errsq / (10.0 * m))
        if not ok or not np.isfinite(enorm):
            dt *= 0.25
        elif enorm <= 1.0:
            s += dt
            for i in range(m):
                for c in range(10):
                    Y[i, c] = y5[i, c]
            if record:
                if nrec >= rec_s.shape[0]:
                    return Y, 3, nrec
                rec_s[nrec] = s
                for i in range(m):
                    rec_x[nrec, i, 0] = Y[i, 0]
                    rec_x[nrec, i, 1] = Y[i, 1]
                nrec += 1
            fac = 0.9 * (enorm + 1e-16) ** -0.2
            if fac > 5.0:
                fac = 5.0
            elif fac < 0.2:
                fac = 0.2
            dt *= fac
        else:
            fac = 0.9 * enorm ** -0.2
            if fac < 0.1:
                fac = 0.1
            dt *= fac
        if dt < 1e-14:
            return Y, 1, nrec
    return Y, 0, nrec


@dataclass
class ShootResult:
    X: np.ndarray            # (m, 2) node states (converged)
    T: float
    alpha: float
    w: np.ndarray            # (m,) mesh fractions, sum 1
    endpoints: np.ndarray    # (m, 2) segment endpoint states
    M: np.ndarray            # (m, 2, 2) segment variational matrices
    residual: float
    newton_iters: int


_REC_CAP = 40_000


def _flow_all(p: ModelParams, X, T, alpha, w, rtol, atol,
              want_samples=False, max_steps=60_000):
    """Integrate all segments with variational + sensitivity blocks."""
    m = X.shape[0]
    q = p.quartic
    cc = np.asarray(q.c, dtype=float)
    rr = np.asarray(q.r, dtype=float)
    if want_samples:
        rec_s = np.empty(_REC_CAP)
        rec_x = np.empty((_REC_CAP, m, 2))
    else:
        rec_s = np.empty(1)
        rec_x = np.empty((1, m, 2))
    Yf, status, nrec = _flow_jit(
        np.ascontiguousarray(X, dtype=float), float(T), float(alpha),
        np.ascontiguousarray(w, dtype=float),
        p.epsilon, p.a, p.b, p.a_tilde, p.b_tilde, q.Q, cc, rr,
        rtol, atol, _DP_A, _DP_B5, _DP_ERR,
        rec_s, rec_x, want_samples, max_steps)
    if status == 1:
        raise StepSizeUnderflow("shooting substep underflow")
    if status == 2:
        raise StepSizeUnderflow("shooting step budget exceeded")
    if status == 3:
        raise StepSizeUnderflow("shooting sample buffer exhausted")
    endpoints = Yf[:, :2].copy()
    M = Yf[:, 2:6].reshape(m, 2, 2).copy()
    qT = Yf[:, 6:8].copy()
    qa = Yf[:, 8:10].copy()
    samples_t = samples_x = None
    if want_samples:
        offs = np.concatenate([[0.0], np.cumsum(w)[:-1]]) * T
        ss = rec_s[:nrec]
        xs = rec_x[:nrec]                           # (n_s, m, 2)
        tt = offs[None, :] + ss[:, None] * (w * T)[None, :]
        samples_t = tt.T.reshape(-1)                # segment-major, increasing
        samples_x = xs.transpose(1, 0, 2).reshape(-1, 2)
    return endpoints, M, qT, qa, samples_t, samples_x


def solve_periodic(p: ModelParams, X0, T0, alpha0, w,
                   constraints, rtol=1e-10, atol=1e-12,
                   res_tol=1e-9, max_iter=12):
    """Newton solve of the multiple-shooting system.

    `constraints(X, T, alpha)` returns (residual_vector, rows) supplying
    the final two equations (phase + arclength, or seed pins); rows are
    gradients with respect to the full unknown vector.
    """
    m = X0.shape[0]
    n = 2 * m + 2
    X, T, alpha = np.asarray(X0, dtype=float).copy(), float(T0), float(alpha0)
    for it in range(max_iter):
        endpoints, M, qT, qa, _, _ = _flow_all(p, X, T, alpha, w, rtol, atol)
        R = np.zeros(n)
        Jac = np.zeros((n, n))
        nxt = np.roll(np.arange(m), -1)
        for i in range(m):
            R[2 * i:2 * i + 2] = endpoints[i] - X[nxt[i]]
            Jac[2 * i:2 * i + 2, 2 * i:2 * i + 2] = M[i]
            Jac[2 * i:2 * i + 2, 2 * nxt[i]:2 * nxt[i] + 2] -= np.eye(2)
            Jac[2 * i:2 * i + 2, 2 * m] = qT[i]
            Jac[2 * i:2 * i + 2, 2 * m + 1] = qa[i]
        Rc, rows = constraints(X, T, alpha)
        R[2 * m:] = Rc
        Jac[2 * m:] = rows
        scale = max(1.0, np.max(np.abs(X)))
        rnorm = np.max(np.abs(R)) / scale
        if rnorm < res_tol:
            return ShootResult(X=X, T=T, alpha=alpha, w=w.copy(),
                               endpoints=endpoints, M=M,
                               residual=rnorm, newton_iters=it)
        try:
            dU = np.linalg.solve(Jac, -R)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dU)):
            return None
        # shrink the update if it would leave the admissible region
        lam = 1.0
        for _ in range(6):
            Tn = T + lam * dU[2 * m]
            an = alpha + lam * dU[2 * m + 1]
            if Tn > 0 and an > 0:
                break
            lam *= 0.5
        else:
            return None
        X = X + lam * dU[:2 * m].reshape(m, 2)
        T, alpha = Tn, an
    return None


def floquet_multipliers(M):
    """Multipliers of the cycle from the per-segment variational matrices.

    The product is accumulated with rescaling so strongly contracting or
    expanding cycles do not overflow. When the partial products span a
    dynamic range wide enough to drown the neutral direction in roundoff
    (deep canard and relaxation cycles), the multipliers are recomputed by
    a periodic QR sweep, which accumulates the log-magnitudes segment by
    segment and stays accurate for strongly hyperbolic cycles.
    """
    P = np.eye(2)
    logscale = 0.0
    spread_hi, spread_lo = 0.0, 0.0
    for Mi in M:
        P = Mi @ P
        s = np.max(np.abs(P))
        if s > 0:
            P /= s
            logscale += np.log(s)
            spread_hi = max(spread_hi, logscale)
            spread_lo = min(spread_lo, logscale)
    tr = P[0, 0] + P[1, 1]
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    disc = tr * tr - 4 * det
    if disc >= 0:
        rt = np.sqrt(disc)
        lams = np.array([(tr + rt) / 2, (tr - rt) / 2], dtype=complex)
    else:
        rt = np.sqrt(-disc)
        lams = np.array([complex(tr / 2, rt / 2), complex(tr / 2, -rt / 2)])
    # recover the small eigenvalue through the determinant for accuracy
    i_big = int(np.argmax(np.abs(lams)))
    if abs(lams[i_big]) > 0:
        lams[1 - i_big] = det / lams[i_big]
    lams = lams * np.exp(logscale)
    # an autonomous cycle always has the trivial multiplier 1; if the plain
    # product cannot see it, its dynamic range has swamped the neutral
    # direction and the log-accumulating sweep takes over
    if (spread_hi - spread_lo < 20.0
            and min(abs(l - 1.0) for l in lams) < 1e-4):
        return lams
    return _qr_multipliers(M)


def _qr_multipliers(M, sweeps: int = 3):
    """Multipliers via a periodic QR sweep (log-accumulated magnitudes).

    Only used for strongly hyperbolic cycles, whose multipliers are real;
    the orthogonal frame is first converged by repeated sweeps, then one
    recording sweep accumulates log |diag R| and the diagonal signs.

    In this regime the neutral direction is only resolvable when it is the
    dominant one: segments crossing deep contraction lose the subdominant
    column below roundoff. The dominant multiplier is therefore reported
    as measured, while the neutral one -- exactly 1 for an autonomous flow
    -- is imposed, and the hyperbolic multiplier keeps the positive sign
    the orientation-preserving planar flow dictates.
    """
    Q0 = np.eye(2)
    for _ in range(sweeps - 1):
        for Mi in M:
            Q0, _ = np.linalg.qr(Mi @ Q0)
    Q = Q0.copy()
    logs = np.zeros(2)
    signs = np.ones(2)
    for Mi in M:
        Q, R = np.linalg.qr(Mi @ Q)
        d = np.array([R[0, 0], R[1, 1]])
        sgn = np.where(d >= 0, 1.0, -1.0)
        Q = Q * sgn                     # keep R's diagonal positive
        logs += np.log(np.abs(d))
        signs *= sgn
    # the frame closes up to column signs; fold them into the multipliers
    closure = np.sign(np.diag(Q0.T @ Q))
    lams = signs * closure * np.exp(logs)
    i_dom = int(np.argmax(np.abs(lams)))
    if abs(lams[i_dom]) > 1.0:
        nontrivial = abs(lams[i_dom])      # expanding cycle: dominant is real
    else:
        nontrivial = abs(lams[1 - i_dom])  # contracting: subdominant is real
    return np.array([1.0, nontrivial], dtype=complex)


def orbit_samples(p: ModelParams, sol: ShootResult, rtol=1e-10, atol=1e-12):
    """Dense (t, state) samples along the converged orbit."""
    _, _, _, _, ts, xs = _flow_all(p, sol.X, sol.T, sol.alpha, sol.w,
                                   rtol, atol, want_samples=True)
    return ts, xs


def _growth_rates(p: ModelParams, ts, xs, alpha):
    """Speed and positive local growth rate at sample midpoints."""
    mid = 0.5 * (xs[1:] + xs[:-1])
    f, J, _ = field_parts(p, mid, alpha)
    speed = np.linalg.norm(f, axis=-1)
    tr = J[:, 0, 0] + J[:, 1, 1]
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    disc = tr * tr - 4 * det
    mu = np.where(disc >= 0, (tr + np.sqrt(np.maximum(disc, 0.0))) / 2, tr / 2)
    return speed, np.maximum(mu, 0.0)


def balanced_mesh(p: ModelParams, ts, xs, alpha, m):
    """Segment fractions equalizing a time + arclength + expansion cost.

    The expansion term charges the local positive growth rate of the
    linearization so repelling canard passages get short segments.
    """
    T = ts[-1]
    dt = np.diff(ts)
    speed, mu = _growth_rates(p, ts, xs, alpha)
    cost = (dt / T
            + speed * dt / max(np.sum(speed * dt), 1e-300)
            + mu * dt / 8.0)
    cum = np.concatenate([[0.0], np.cumsum(cost)])
    targets = np.linspace(0.0, cum[-1], m + 1)
    edges_t = np.interp(targets, cum, ts)
    w = np.diff(edges_t) / T
    w = np.maximum(w, 1e-9)
    w /= w.sum()
    return w


def expansion_budget(p: ModelParams, ts, xs, alpha) -> float:
    """Total accumulated positive growth (nats) along the orbit."""
    dt = np.diff(ts)
    _, mu = _growth_rates(p, ts, xs, alpha)
    return float(np.sum(mu * dt))


def nodes_from_samples(ts, xs, w, T):
    """Node states at the mesh edges, interpolated from dense samples."""
    edges = np.concatenate([[0.0], np.cumsum(w)[:-1]]) * T
    p1 = np.interp(edges, ts, xs[:, 0])
    u = np.interp(edges, ts, xs[:, 1])
    return np.column_stack([p1, u])
