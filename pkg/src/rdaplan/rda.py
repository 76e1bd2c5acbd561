"""Core alternating solver for the biconvex collision-avoidance problem.

Each iteration alternates between
  1. a horizon QP over the trajectory and safety-distance variables with
     the per-obstacle dual variables frozen,
  2. independent conic least-squares blocks, one per (time step, obstacle),
     solved in parallel,
  3. multiplier ascent on the two coupling residuals H (rotation
     stationarity) and I (certified-distance margin),
followed by a residual-based stopping test on raw sums over all blocks.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dynamics import ControlBounds, ControlInput, LinearizedDynamics
from .geometry import AffinePoseMap, ConvexRegion, RobotFootprint
from .subsolvers.conic import (ConicLsqProblem, ball_decomposition,
                               solve_conic_lsq)
from .subsolvers.qp import QpProblem, solve_qp
from .tracking import TrackingCost

__all__ = [
    "RdaProblem",
    "PrimalBlock",
    "ObstacleDualBlock",
    "RdaSolution",
    "RdaInfeasibleError",
    "eval_H",
    "eval_I",
    "update_primal",
    "update_obstacle_dual",
    "update_multipliers",
    "check_stopping",
    "solve",
    "warm_start_from",
    "augmented_lagrangian",
]

QP_TOL = 1e-6
QP_MAX_ITER = 4000
CONIC_TOL = 1e-6
CONIC_MAX_ITER = 2000


class RdaInfeasibleError(RuntimeError):
    """The horizon QP is infeasible; message names the constraint family."""


@dataclass
class RdaProblem:
    """One receding-horizon problem instance.

    ``obstacles[m][t]`` is obstacle m's region at step t (a static obstacle
    repeats the same region).  ``dynamics`` has N per-step affine models and
    ``pose_maps`` N+1 affine rotation models along the nominal trajectory.
    """

    N: int
    s_init: np.ndarray
    obstacles: list  # M entries, each a list of N+1 ConvexRegion
    footprint: RobotFootprint
    dynamics: list  # N LinearizedDynamics
    pose_maps: list  # N+1 AffinePoseMap
    bounds: ControlBounds
    cost: TrackingCost
    d_min: float = 0.1
    d_max: float = 1.0
    eta: float = 10.0
    rho: float = 10.0
    eps_pri: float = 0.5
    eps_dual: float = 0.5
    max_iters: int = 50
    u_prev: ControlInput = None
    threads: int = 1
    multiplier_convention: str = "k+1"  # or "k" to match the printed update
    normalize_residuals: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("horizon must be >= 1")
        if not (0 <= self.d_min <= self.d_max):
            raise ValueError("need 0 <= d_min <= d_max")
        if self.eta < 0 or self.rho <= 0:
            raise ValueError("eta must be >= 0 and rho > 0")
        if len(self.dynamics) != self.N:
            raise ValueError("need N per-step dynamics models")
        if len(self.pose_maps) != self.N + 1:
            raise ValueError("need N+1 pose maps")
        for obs in self.obstacles:
            if len(obs) != self.N + 1:
                raise ValueError("each obstacle needs N+1 per-step regions")
        self.s_init = np.asarray(self.s_init, dtype=float).ravel()

    @property
    def M(self) -> int:
        return len(self.obstacles)


@dataclass
class PrimalBlock:
    s: np.ndarray  # (N+1, 3)
    u: np.ndarray  # (N, 2)
    d: np.ndarray  # (N+1,)


@dataclass
class ObstacleDualBlock:
    lam: np.ndarray
    mu: np.ndarray
    z: float
    xi: np.ndarray  # (2,) multiplier for H
    zeta: float  # multiplier for I

    def copy(self) -> "ObstacleDualBlock":
        return ObstacleDualBlock(self.lam.copy(), self.mu.copy(), self.z,
                                 self.xi.copy(), self.zeta)

    @staticmethod
    def zeros(n_lam: int, n_mu: int) -> "ObstacleDualBlock":
        return ObstacleDualBlock(np.zeros(n_lam), np.zeros(n_mu), 0.0,
                                 np.zeros(2), 0.0)


@dataclass
class RdaSolution:
    primal: PrimalBlock
    duals: list  # duals[t][m] -> ObstacleDualBlock
    residual_history: list  # (primal_residual, dual_residual) per iteration
    iterations: int
    converged: bool
    wall_time: float
    qp_warm: tuple = None  # carried QP warm start (internal)


def eval_H(pose_map: AffinePoseMap, region: ConvexRegion,
           footprint: RobotFootprint, state, lam, mu) -> np.ndarray:
    """Rotation-stationarity residual mu'G + lam'D R(theta)."""
    R = pose_map.rotation(float(state[2]))
    return mu @ footprint.G + lam @ (region.D @ R)


def eval_I(region: ConvexRegion, footprint: RobotFootprint, state, lam, mu,
           d_t: float, z: float) -> float:
    """Certified-margin residual lam'D p - lam'b - mu'h - d_t - z."""
    p = np.asarray(state, dtype=float)[:2]
    return float(lam @ (region.D @ p) - lam @ region.b
                 - mu @ footprint.h - d_t - z)


def _layout(N: int):
    off_u = 3 * (N + 1)
    off_d = off_u + 2 * N
    return off_u, off_d, off_d + (N + 1)


def _tracking_terms(problem: RdaProblem, P_diag, q):
    cost = problem.cost
    w = cost.state_weights()
    N = problem.N
    off_u, _, _ = _layout(N)
    for t in range(N + 1):
        for j in range(3):
            P_diag[3 * t + j] += 2.0 * w[j]
            q[3 * t + j] += -2.0 * w[j] * cost.reference_states[t, j]
    for t in range(N):
        iv = off_u + 2 * t
        P_diag[iv] += 2.0 * cost.P
        q[iv] += -2.0 * cost.P * cost.reference_speeds[t]


def update_primal(problem: RdaProblem, duals, warm=None):
    """Horizon QP update with all per-obstacle dual blocks frozen.

    Returns (PrimalBlock, qp_warm) where qp_warm carries the splitting
    iterates for the next call.
    """
    N, M = problem.N, problem.M
    off_u, off_d, n = _layout(N)
    P_diag = np.zeros(n)
    q = np.zeros(n)
    _tracking_terms(problem, P_diag, q)
    q[off_d:] += -problem.eta

    rows, cols, vals = [], [], []

    def add_sq(indices, coeffs, const, weight):
        # weight/2 * (coeffs . x[indices] + const)^2
        for i, ci in zip(indices, coeffs):
            q[i] += weight * const * ci
            for j, cj in zip(indices, coeffs):
                rows.append(i)
                cols.append(j)
                vals.append(weight * ci * cj)

    rho = problem.rho
    for t in range(N + 1):
        pm = problem.pose_maps[t]
        i_th = 3 * t + 2
        for m in range(M):
            blk = duals[t][m]
            region = problem.obstacles[m][t]
            lamD = blk.lam @ region.D  # (2,)
            # H penalty: quadratic in theta_t
            g = lamD @ pm.dR  # (2,)
            h0 = blk.mu @ problem.footprint.G + lamD @ pm.R0
            for j in range(2):
                add_sq([i_th], [g[j]],
                       h0[j] + blk.xi[j] - g[j] * pm.nominal_theta, rho)
            # I penalty: affine in (x_t, y_t, d_t)
            c_i = (-blk.lam @ region.b - blk.mu @ problem.footprint.h
                   - blk.z + blk.zeta)
            add_sq([3 * t, 3 * t + 1, off_d + t],
                   [lamD[0], lamD[1], -1.0], c_i, rho)

    P = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    P = P + sp.diags(P_diag)

    # equality constraints: initial state and dynamics
    e_rows, e_cols, e_vals, beq = [], [], [], []
    r = 0
    for j in range(3):
        e_rows.append(r)
        e_cols.append(j)
        e_vals.append(1.0)
        beq.append(problem.s_init[j])
        r += 1
    for t in range(N):
        dyn = problem.dynamics[t]
        for j in range(3):
            e_rows.append(r)
            e_cols.append(3 * (t + 1) + j)
            e_vals.append(1.0)
            for k in range(3):
                e_rows.append(r)
                e_cols.append(3 * t + k)
                e_vals.append(-dyn.A[j, k])
            for k in range(2):
                e_rows.append(r)
                e_cols.append(off_u + 2 * t + k)
                e_vals.append(-dyn.B[j, k])
            beq.append(dyn.c[j])
            r += 1
    Aeq = sp.coo_matrix((e_vals, (e_rows, e_cols)), shape=(r, n)).tocsc()
    beq = np.array(beq)

    # inequalities: control box (first step tightened by slew from u_prev),
    # slew between consecutive controls, d box
    u_lo, u_hi = problem.bounds.box()
    a_lo, a_hi = problem.bounds.slew()
    i_rows, i_cols, i_vals, lin, uin = [], [], [], [], []
    r = 0
    for t in range(N):
        lo, hi = u_lo.copy(), u_hi.copy()
        if t == 0 and problem.u_prev is not None:
            up = problem.u_prev.as_array()
            lo = np.maximum(lo, up + a_lo)
            hi = np.minimum(hi, up + a_hi)
            if np.any(lo > hi):
                raise RdaInfeasibleError(
                    "control bounds: first-step slew window is empty")
        for k in range(2):
            i_rows.append(r)
            i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0)
            lin.append(lo[k])
            uin.append(hi[k])
            r += 1
    for t in range(1, N):
        for k in range(2):
            i_rows.append(r)
            i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0)
            i_rows.append(r)
            i_cols.append(off_u + 2 * (t - 1) + k)
            i_vals.append(-1.0)
            lin.append(a_lo[k])
            uin.append(a_hi[k])
            r += 1
    for t in range(N + 1):
        i_rows.append(r)
        i_cols.append(off_d + t)
        i_vals.append(1.0)
        lin.append(problem.d_min)
        uin.append(problem.d_max)
        r += 1
    Ain = sp.coo_matrix((i_vals, (i_rows, i_cols)), shape=(r, n)).tocsc()

    qp = QpProblem(P=P, q=q, Aeq=Aeq, beq=beq, Ain=Ain,
                   lin=np.array(lin), uin=np.array(uin), warm_start=warm)
    x, report = solve_qp(qp, tol=QP_TOL, max_iter=QP_MAX_ITER)
    if report.status == "infeasible":
        raise RdaInfeasibleError(
            "horizon QP infeasible (dynamics/bounds inconsistent)")
    s = x[:off_u].reshape(N + 1, 3)
    u = x[off_u:off_d].reshape(N, 2)
    d = x[off_d:]
    qp_warm = (x.copy(), _qp_duals(qp, x))
    return PrimalBlock(s, u, d), qp_warm


def _qp_duals(qp: QpProblem, x):
    # warm-start duals are re-estimated cheaply as zeros; the splitting
    # method recovers them quickly from a good primal point
    return np.zeros(qp.m)


def update_obstacle_dual(problem: RdaProblem, t: int, m: int,
                         primal: PrimalBlock, blk: ObstacleDualBlock,
                         warm: np.ndarray = None, ball=None):
    """Solve one (t, m) conic least-squares block with the primal frozen."""
    region = problem.obstacles[m][t]
    fp = problem.footprint
    pm = problem.pose_maps[t]
    state = primal.s[t]
    R = pm.rotation(float(state[2]))
    p = state[:2]
    l, h = region.n_rows, fp.n_rows
    ncols = l + h + 1
    Mstack = np.zeros((3, ncols))
    Mstack[:2, :l] = (region.D @ R).T
    Mstack[:2, l:l + h] = fp.G.T
    Mstack[2, :l] = region.D @ p - region.b
    Mstack[2, l:l + h] = -fp.h
    Mstack[2, -1] = -1.0
    r = np.array([-blk.xi[0], -blk.xi[1], primal.d[t] - blk.zeta])
    ball_V, ball_w = ball if ball is not None else (None, None)
    prob = ConicLsqProblem(
        M=Mstack, r=r, n_lam=l, n_mu=h,
        lam_cone=region.cone, mu_cone=fp.cone, D=region.D,
        warm_start=warm, ball_V=ball_V, ball_w=ball_w,
    )
    x, report = solve_conic_lsq(prob, tol=CONIC_TOL, max_iter=CONIC_MAX_ITER)
    return x[:l], x[l:l + h], float(x[-1]), report


def update_multipliers(problem: RdaProblem, t: int, m: int,
                       primal: PrimalBlock, lam, mu, z,
                       xi, zeta):
    """Multiplier ascent: xi' = xi + H, zeta' = zeta + I."""
    region = problem.obstacles[m][t]
    H = eval_H(problem.pose_maps[t], region, problem.footprint,
               primal.s[t], lam, mu)
    I = eval_I(region, problem.footprint, primal.s[t], lam, mu,
               float(primal.d[t]), z)
    return xi + H, zeta + I, H, I


def check_stopping(problem: RdaProblem, pri: float, dual: float):
    """Raw-sum residual test; optional per-term normalization."""
    scale = 1.0
    if problem.normalize_residuals and problem.M > 0:
        scale = 1.0 / ((problem.N + 1) * problem.M)
    pri_s, dual_s = pri * scale, dual * scale
    return (pri_s <= problem.eps_pri and dual_s <= problem.eps_dual,
            pri_s, dual_s)


def _init_duals(problem: RdaProblem):
    duals = []
    for t in range(problem.N + 1):
        row = []
        for m in range(problem.M):
            region = problem.obstacles[m][t]
            row.append(ObstacleDualBlock.zeros(region.n_rows,
                                               problem.footprint.n_rows))
        duals.append(row)
    return duals


def solve(problem: RdaProblem, warm: dict = None) -> RdaSolution:
    """Run the full alternating iteration up to the stopping test.

    ``warm`` is the bundle produced by :func:`warm_start_from`: primal
    trajectory plus dual blocks and multipliers used as initial values.
    """
    t0 = time.perf_counter()
    N, M = problem.N, problem.M
    if warm is not None:
        duals = warm["duals"]
        primal = warm["primal"]
        qp_warm = None
    else:
        duals = _init_duals(problem)
        primal = None
        qp_warm = None

    pairs = [(t, m) for t in range(N + 1) for m in range(M)]
    # the norm-ball eigendecomposition depends only on each obstacle's D
    balls = [ball_decomposition(problem.obstacles[m][0].D) for m in range(M)]
    pool = (ThreadPoolExecutor(max_workers=problem.threads)
            if problem.threads > 1 and pairs else None)
    history = []
    converged = False
    it = 0
    try:
        for it in range(1, problem.max_iters + 1):
            primal, qp_warm = update_primal(problem, duals, warm=qp_warm)

            def run_block(pair):
                t, m = pair
                blk = duals[t][m]
                ws = np.concatenate([blk.lam, blk.mu, [blk.z]])
                return update_obstacle_dual(problem, t, m, primal, blk,
                                            warm=ws, ball=balls[m])
            if pool is not None:
                results = list(pool.map(run_block, pairs))
            else:
                results = [run_block(p) for p in pairs]

            pri = 0.0
            dual = 0.0
            for (t, m), (lam, mu, z, _rep) in zip(pairs, results):
                blk = duals[t][m]
                dual += float(np.sum((lam - blk.lam) ** 2)
                              + np.sum((mu - blk.mu) ** 2))
                if problem.multiplier_convention == "k":
                    xi, zeta, _, _ = update_multipliers(
                        problem, t, m, primal, blk.lam, blk.mu, blk.z,
                        blk.xi, blk.zeta)
                    _, _, H, I = update_multipliers(
                        problem, t, m, primal, lam, mu, z, blk.xi, blk.zeta)
                else:
                    xi, zeta, H, I = update_multipliers(
                        problem, t, m, primal, lam, mu, z, blk.xi, blk.zeta)
                pri += float(H @ H + I * I)
                duals[t][m] = ObstacleDualBlock(lam, mu, z, xi, zeta)

            stop, pri_s, dual_s = check_stopping(problem, pri, dual)
            history.append((pri_s, dual_s))
            if M == 0 or stop:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    return RdaSolution(
        primal=primal,
        duals=duals,
        residual_history=history if history else [(0.0, 0.0)],
        iterations=it,
        converged=converged,
        wall_time=time.perf_counter() - t0,
        qp_warm=qp_warm,
    )


def warm_start_from(previous: RdaSolution, problem: RdaProblem) -> dict:
    """Shift the primal one step (tail repeated); carry duals unshifted.

    New obstacles (problem has more blocks than the previous solution)
    get zero-initialized blocks; vanished ones are dropped.
    """
    prev = previous.primal
    N = problem.N
    if prev.s.shape[0] != N + 1:
        raise ValueError("warm-start horizon length mismatch")
    s = np.vstack([prev.s[1:], prev.s[-1:]])
    u = np.vstack([prev.u[1:], prev.u[-1:]]) if N > 1 else prev.u.copy()
    d = np.concatenate([prev.d[1:], prev.d[-1:]])
    duals = []
    for t in range(N + 1):
        row = []
        for m in range(problem.M):
            region = problem.obstacles[m][t]
            carried = None
            if m < len(previous.duals[t]):
                cand = previous.duals[t][m]
                if cand.lam.shape[0] == region.n_rows:
                    carried = cand.copy()
            if carried is None:
                carried = ObstacleDualBlock.zeros(region.n_rows,
                                                  problem.footprint.n_rows)
            row.append(carried)
        duals.append(row)
    return {"primal": PrimalBlock(s, u, d), "duals": duals}


def augmented_lagrangian(problem: RdaProblem, primal: PrimalBlock,
                         duals) -> float:
    """Objective + penalty value at feasible iterates (indicators dropped)."""
    val = problem.cost.evaluate(primal.s, primal.u)
    val += -problem.eta * float(np.sum(primal.d))
    for t in range(problem.N + 1):
        for m in range(problem.M):
            blk = duals[t][m]
            region = problem.obstacles[m][t]
            H = eval_H(problem.pose_maps[t], region, problem.footprint,
                       primal.s[t], blk.lam, blk.mu)
            I = eval_I(region, problem.footprint, primal.s[t], blk.lam,
                       blk.mu, float(primal.d[t]), blk.z)
            val += 0.5 * problem.rho * (float((H + blk.xi) @ (H + blk.xi))
                                        + (I + blk.zeta) ** 2)
    return val
