"""Convex QP solver based on operator splitting with an active-set polish.

Solves
    minimize    0.5 x' P x + q' x
    subject to  Aeq x = beq,   lin <= Ain x <= uin

with a fixed-point splitting iteration (ADMM on the constraint slack),
adaptive penalty with deterministic update points, and a final polish step
that solves the equality-constrained KKT system on the detected active set.
All floating-point reductions are sequential and input-ordered, so repeated
solves of identical problems are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["QpProblem", "SolveReport", "solve_qp", "QpInfeasibleError"]

_SIGMA = 1e-6
_ALPHA = 1.6
_RHO_EQ_SCALE = 1e3
_CHECK_EVERY = 25
_RHO_UPDATE_EVERY = 100
_EPS_INFEAS = 1e-10


class QpInfeasibleError(RuntimeError):
    """Raised by callers that treat infeasibility as exceptional."""


@dataclass
class SolveReport:
    status: str  # optimal | max_iter | infeasible
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float


@dataclass
class QpProblem:
    """Canonical convex QP data.  Either constraint block may be omitted."""

    P: object
    q: np.ndarray
    Aeq: object = None
    beq: np.ndarray = None
    Ain: object = None
    lin: np.ndarray = None
    uin: np.ndarray = None
    warm_start: tuple = None  # (x0, y0)

    n_eq: int = field(init=False, default=0)

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).ravel()
        n = self.q.shape[0]
        self.P = sp.csc_matrix(self.P)
        if self.P.shape != (n, n):
            raise ValueError("P shape does not match q")
        if abs(self.P - self.P.T).max() > 1e-8 * max(1.0, abs(self.P).max()):
            raise ValueError("P must be symmetric")
        blocks, lo, hi = [], [], []
        if self.Aeq is not None:
            Aeq = sp.csc_matrix(self.Aeq)
            beq = np.asarray(self.beq, dtype=float).ravel()
            if Aeq.shape != (beq.shape[0], n):
                raise ValueError("equality system dimensions inconsistent")
            blocks.append(Aeq)
            lo.append(beq)
            hi.append(beq)
            self.n_eq = beq.shape[0]
        if self.Ain is not None:
            Ain = sp.csc_matrix(self.Ain)
            lin = np.asarray(self.lin, dtype=float).ravel()
            uin = np.asarray(self.uin, dtype=float).ravel()
            if Ain.shape != (lin.shape[0], n) or lin.shape != uin.shape:
                raise ValueError("inequality system dimensions inconsistent")
            if np.any(lin > uin):
                raise ValueError("lin > uin")
            blocks.append(Ain)
            lo.append(lin)
            hi.append(uin)
        if blocks:
            self.A = sp.vstack(blocks, format="csc")
            self.l = np.concatenate(lo)
            self.u = np.concatenate(hi)
        else:
            self.A = sp.csc_matrix((0, n))
            self.l = np.zeros(0)
            self.u = np.zeros(0)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]


def _factor_kkt(P, A, sigma, rho):
    n, m = P.shape[0], A.shape[0]
    if m == 0:
        kkt = (P + sigma * sp.eye(n)).tocsc()
    else:
        kkt = sp.bmat(
            [[P + sigma * sp.eye(n), A.T], [A, -sp.diags(1.0 / rho)]], format="csc"
        )
    return spla.splu(kkt)


def _residuals(P, q, A, x, y, z):
    if A.shape[0] == 0:
        r_pri = 0.0
        ax = np.zeros(0)
        aty = np.zeros_like(q)
    else:
        ax = A @ x
        r_pri = float(np.max(np.abs(ax - z))) if z.size else 0.0
        aty = A.T @ y
    px = P @ x
    r_dual = float(np.max(np.abs(px + q + aty)))
    return r_pri, r_dual, ax, px, aty


def solve_qp(problem: QpProblem, tol: float = 1e-6, max_iter: int = 4000):
    """Solve a QpProblem.  Returns (x, SolveReport)."""
    P, q, A = problem.P, problem.q, problem.A
    l, u = problem.l, problem.u
    n, m = problem.n, problem.m

    rho_bar = 0.1
    rho = np.full(m, rho_bar)
    is_eq = (l == u)
    rho[is_eq] = rho_bar * _RHO_EQ_SCALE

    if problem.warm_start is not None:
        x = np.array(problem.warm_start[0], dtype=float)
        y = np.array(problem.warm_start[1], dtype=float)
        if x.shape[0] != n or y.shape[0] != m:
            raise ValueError("warm start dimensions inconsistent")
    else:
        x = np.zeros(n)
        y = np.zeros(m)
    z = np.clip(A @ x, l, u) if m else np.zeros(0)

    lu = _factor_kkt(P, A, _SIGMA, rho)
    y_last = y.copy()
    x_last = x.copy()
    status = "max_iter"
    r_pri = r_dual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        if m:
            rhs = np.concatenate([_SIGMA * x - q, z - y / rho])
            sol = lu.solve(rhs)
            xt, nu = sol[:n], sol[n:]
            zt = z + (nu - y) / rho
            x = _ALPHA * xt + (1.0 - _ALPHA) * x
            z_tmp = _ALPHA * zt + (1.0 - _ALPHA) * z + y / rho
            z = np.clip(z_tmp, l, u)
            y = rho * (z_tmp - z)
        else:
            x = lu.solve(_SIGMA * x - q)

        if it % _CHECK_EVERY == 0 or it == max_iter:
            r_pri, r_dual, ax, px, aty = _residuals(P, q, A, x, y, z)
            eps_pri = tol + tol * max(
                float(np.max(np.abs(ax))) if m else 0.0,
                float(np.max(np.abs(z))) if m else 0.0,
            )
            eps_dual = tol + tol * max(
                float(np.max(np.abs(px))),
                float(np.max(np.abs(q))) if q.size else 0.0,
                float(np.max(np.abs(aty))),
            )
            if r_pri <= eps_pri and r_dual <= eps_dual:
                status = "optimal"
                break
            if m and _primal_infeasible(A, l, u, y - y_last):
                obj = float(0.5 * x @ (P @ x) + q @ x)
                return x, SolveReport("infeasible", it, r_pri, r_dual, obj)
            y_last = y.copy()
            x_last = x.copy()
            if it % _RHO_UPDATE_EVERY == 0 and it < max_iter:
                denom_p = max(float(np.max(np.abs(ax))) if m else 0.0,
                              float(np.max(np.abs(z))) if m else 0.0, 1e-12)
                denom_d = max(float(np.max(np.abs(px))),
                              float(np.max(np.abs(q))) if q.size else 0.0,
                              float(np.max(np.abs(aty))), 1e-12)
                scale = np.sqrt((r_pri / denom_p) / max(r_dual / denom_d, 1e-14))
                scale = min(max(scale, 1e-3), 1e3)
                if scale > 5.0 or scale < 0.2:
                    rho_bar = min(max(rho_bar * scale, 1e-6), 1e6)
                    rho = np.full(m, rho_bar)
                    rho[is_eq] = rho_bar * _RHO_EQ_SCALE
                    lu = _factor_kkt(P, A, _SIGMA, rho)

    if m:
        x_p, y_p = _polish(problem, x, y, z)
        if x_p is not None:
            r_pri_p, r_dual_p, *_ = _residuals(P, q, A, x_p, y_p, np.clip(A @ x_p, l, u))
            if max(r_pri_p, r_dual_p) <= max(r_pri, r_dual) * (1.0 + 1e-12) or \
                    max(r_pri_p, r_dual_p) <= tol:
                x, y = x_p, y_p
                r_pri, r_dual = r_pri_p, r_dual_p
                if max(r_pri, r_dual) <= tol * 10:
                    status = "optimal"
    elif status == "optimal":
        # refine unconstrained solve to kill the sigma bias
        for _ in range(3):
            x = x - lu.solve(P @ x + q)
        r_pri, r_dual, *_ = _residuals(P, q, A, x, y, z)
        if r_dual <= tol:
            status = "optimal"

    obj = float(0.5 * x @ (P @ x) + q @ x)
    return x, SolveReport(status, it, r_pri, r_dual, obj)


def _primal_infeasible(A, l, u, dy):
    norm_dy = float(np.max(np.abs(dy))) if dy.size else 0.0
    if norm_dy < _EPS_INFEAS:
        return False
    dy = dy / norm_dy
    if float(np.max(np.abs(A.T @ dy))) > 1e-8:
        return False
    dy_pos = np.maximum(dy, 0.0)
    dy_neg = np.minimum(dy, 0.0)
    # unbounded sides cannot certify
    if np.any((u == np.inf) & (dy_pos > 1e-12)):
        return False
    if np.any((l == -np.inf) & (dy_neg < -1e-12)):
        return False
    support = float(np.sum(u[dy_pos > 0] * dy_pos[dy_pos > 0])
                    + np.sum(l[dy_neg < 0] * dy_neg[dy_neg < 0]))
    return support < -1e-8


def _polish(problem: QpProblem, x, y, z):
    """Equality-KKT solve on the detected active set with refinement."""
    P, q, A = problem.P, problem.q, problem.A
    l, u = problem.l, problem.u
    n = problem.n
    is_eq = (l == u)
    act_low = (~is_eq) & (y < -1e-10)
    act_up = (~is_eq) & (y > 1e-10)
    active = is_eq | act_low | act_up
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return None, None
    A_act = A[idx]
    b_act = np.where(act_low[idx], l[idx], u[idx])
    b_act = np.where(is_eq[idx], l[idx], b_act)
    delta = 1e-8
    kkt = sp.bmat(
        [[P + delta * sp.eye(n), A_act.T],
         [A_act, -delta * sp.eye(idx.size)]],
        format="csc",
    )
    try:
        lu = spla.splu(kkt)
    except RuntimeError:
        return None, None
    rhs = np.concatenate([-q, b_act])
    sol = lu.solve(rhs)
    # iterative refinement against the unregularized KKT system
    for _ in range(3):
        xr, yr = sol[:n], sol[n:]
        res = np.concatenate([P @ xr + q + A_act.T @ yr, A_act @ xr - b_act])
        sol = sol - lu.solve(res)
    x_p = sol[:n]
    y_p = np.zeros(problem.m)
    y_p[idx] = sol[n:]
    if not np.all(np.isfinite(x_p)):
        return None, None
    return x_p, y_p
