"""Receding-horizon planning: MPC orchestration and baseline planners.

The main planner alternates between the dual-ADMM solver and the plant;
the baselines solve the same horizon problem either by sequential
convexification of the coupled bilinear program (``scp-obca``) or by
reducing every obstacle to its circumscribed disk (``point-mass``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import rda
from .dubins import ReferencePath
from .dynamics import (AckermannParams, ControlBounds, ControlInput,
                       linearize, step_exact)
from .geometry import (ConvexRegion, Pose, RobotFootprint,
                       linearize_pose_maps, wrap_angle)
from .subsolvers.qp import QpProblem, solve_qp
from .tracking import TrackingCost

__all__ = [
    "PlannerConfig",
    "WorldState",
    "Planner",
    "build_tracking_cost",
    "scp_obca_solve",
    "point_mass_plan",
    "PlannerStuckError",
    "VARIANTS",
]

VARIANTS = ("rda", "rda-fixed", "scp-obca", "scp-obca-fixed", "point-mass")


class PlannerStuckError(RuntimeError):
    """The baseline QP reported infeasibility (treated as stuck)."""


@dataclass
class PlannerConfig:
    variant: str = "rda"
    horizon: int = 20
    Q: float = 1.0
    P: float = 1.0
    eta: float = 10.0
    rho: float = 10.0
    d_min: float = 0.1
    d_max: float = 1.0
    d_safe: float = 0.5
    eps_pri: float = 0.5
    eps_dual: float = 0.5
    max_iters: int = 50
    goal_tolerance: float = 0.5
    step_budget: int = 400
    threads: int = 1
    warm_start: bool = True
    control_smooth_weight: float = 0.0
    multiplier_convention: str = "k+1"
    normalize_residuals: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("unknown planner variant %r (choose from %s)"
                             % (self.variant, ", ".join(VARIANTS)))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @property
    def fixed_distance(self) -> bool:
        return self.variant in ("rda-fixed", "scp-obca-fixed")

    def d_box(self):
        if self.fixed_distance:
            return self.d_safe, self.d_safe
        return self.d_min, self.d_max


@dataclass
class WorldState:
    """Everything the planner may observe at one control tick."""

    pose: Pose
    u_prev: ControlInput
    obstacles: list  # ConvexRegion at the current instant
    obstacle_velocities: list = None  # per-obstacle 2-vector or None
    t_sim: float = 0.0


def build_tracking_cost(path: ReferencePath, current_pose: Pose, N: int,
                        Q: float, P: float, v_ref: float,
                        dt: float) -> TrackingCost:
    """Reference window: N+1 samples ahead of the nearest-point projection.

    Headings are unwrapped along the path and then shifted so the first
    reference heading is within pi of the current heading.
    """
    xy = path.samples[:, :2]
    dxy = xy - np.array([current_pose.x, current_pose.y])
    idx = int(np.argmin(np.einsum("ij,ij->i", dxy, dxy)))
    s0 = float(path.arclen[idx])
    th_unwrapped = np.unwrap(path.samples[:, 2])
    targets = s0 + v_ref * dt * np.arange(N + 1)
    clamped = np.minimum(targets, path.length)
    ref = np.empty((N + 1, 3))
    ref[:, 0] = np.interp(clamped, path.arclen, path.samples[:, 0])
    ref[:, 1] = np.interp(clamped, path.arclen, path.samples[:, 1])
    ref[:, 2] = np.interp(clamped, path.arclen, th_unwrapped)
    shift = 2.0 * math.pi * round((current_pose.theta - ref[0, 2])
                                  / (2.0 * math.pi))
    ref[:, 2] += shift
    speeds = np.where(targets < path.length, v_ref, 0.0)
    return TrackingCost(Q=Q, P=P, reference_states=ref,
                        reference_speeds=speeds)


def _predict_obstacles(world: WorldState, N: int, dt: float):
    """Per-obstacle list of N+1 regions; constant-velocity extrapolation."""
    vels = world.obstacle_velocities or [None] * len(world.obstacles)
    out = []
    for region, vel in zip(world.obstacles, vels):
        if vel is None or not np.any(np.asarray(vel)):
            out.append([region] * (N + 1))
        else:
            v = np.asarray(vel, dtype=float)
            out.append([region.translated(v * (dt * t))
                        for t in range(N + 1)])
    return out


@dataclass
class MpcCarry:
    """Warm data threaded between consecutive MPC steps."""

    solution: rda.RdaSolution = None


class Planner:
    """One planner instance per episode; owns the reference path."""

    def __init__(self, config: PlannerConfig, footprint: RobotFootprint,
                 params: AckermannParams, bounds: ControlBounds,
                 path: ReferencePath, goal: Pose, v_ref: float):
        self.config = config
        self.footprint = footprint
        self.params = params
        self.bounds = bounds
        self.path = path
        self.goal = goal
        self.v_ref = v_ref

    # -- nominal trajectory -------------------------------------------------

    def _nominal(self, world: WorldState, carry: MpcCarry):
        N = self.config.horizon
        if carry is not None and carry.solution is not None:
            prev = carry.solution.primal
            s = np.vstack([prev.s[1:], prev.s[-1:]])
            s[0] = world.pose.as_array()
            u = np.vstack([prev.u[1:], prev.u[-1:]])
            return s, [ControlInput(*row) for row in u]
        # cold start: constant-speed rollout along the current heading
        u0 = ControlInput(self.v_ref, 0.0)
        s = np.empty((N + 1, 3))
        pose = world.pose
        s[0] = pose.as_array()
        for t in range(N):
            pose = step_exact(pose, u0, self.params)
            s[t + 1] = pose.as_array()
        return s, [u0] * N

    # -- one control tick ---------------------------------------------------

    def mpc_step(self, world: WorldState, carry: MpcCarry = None):
        """Returns (u0, predicted (N+1,3) states, diagnostics, new carry)."""
        cfg = self.config
        diag = {"done": False, "error": None, "stuck": False,
                "iterations": 0, "converged": True, "pri": 0.0, "dual": 0.0,
                "wall_time": 0.0}
        goal_gap = math.hypot(world.pose.x - self.goal.x,
                              world.pose.y - self.goal.y)
        if goal_gap <= cfg.goal_tolerance:
            diag["done"] = True
            pred = np.tile(world.pose.as_array(), (cfg.horizon + 1, 1))
            return ControlInput(0.0, 0.0), pred, diag, MpcCarry()

        nom_s, nom_u = self._nominal(world, carry)
        problem = self._build_problem(world, nom_s, nom_u)
        t0 = time.perf_counter()
        try:
            sol = self._dispatch(problem, world, carry, nom_s)
        except (rda.RdaInfeasibleError, PlannerStuckError) as exc:
            diag["error"] = str(exc)
            diag["stuck"] = isinstance(exc, PlannerStuckError)
            diag["wall_time"] = time.perf_counter() - t0
            pred = np.tile(world.pose.as_array(), (cfg.horizon + 1, 1))
            return ControlInput(0.0, 0.0), pred, diag, MpcCarry()
        diag["wall_time"] = time.perf_counter() - t0
        diag["iterations"] = sol.iterations
        diag["converged"] = sol.converged
        if sol.residual_history:
            diag["pri"], diag["dual"] = sol.residual_history[-1]
        if not sol.converged and diag["pri"] > 10.0 * cfg.eps_pri:
            diag["stuck"] = True
        u0 = self._clamp(sol.primal.u[0], world.u_prev)
        return u0, sol.primal.s.copy(), diag, MpcCarry(solution=sol)

    def _clamp(self, u, u_prev):
        # the QP solution is feasible only up to solver tolerance; snap
        # the emitted control back into the box and slew window
        lo, hi = self.bounds.box()
        alo, ahi = self.bounds.slew()
        if u_prev is not None:
            prev = u_prev.as_array()
            lo = np.maximum(lo, prev + alo)
            hi = np.minimum(hi, prev + ahi)
        return ControlInput(*np.clip(u, lo, hi))

    def _build_problem(self, world: WorldState, nom_s, nom_u):
        cfg = self.config
        N = cfg.horizon
        cost = build_tracking_cost(self.path, world.pose, N, cfg.Q, cfg.P,
                                   self.v_ref, self.params.dt)
        d_lo, d_hi = cfg.d_box()
        return rda.RdaProblem(
            N=N,
            s_init=world.pose.as_array(),
            obstacles=_predict_obstacles(world, N, self.params.dt),
            footprint=self.footprint,
            dynamics=[linearize(Pose(*nom_s[t]), nom_u[t], self.params)
                      for t in range(N)],
            pose_maps=[linearize_pose_maps(Pose(*nom_s[t]))
                       for t in range(N + 1)],
            bounds=self.bounds,
            cost=cost,
            d_min=d_lo,
            d_max=d_hi,
            eta=cfg.eta,
            rho=cfg.rho,
            eps_pri=cfg.eps_pri,
            eps_dual=cfg.eps_dual,
            max_iters=cfg.max_iters,
            u_prev=world.u_prev,
            threads=cfg.threads,
            multiplier_convention=cfg.multiplier_convention,
            normalize_residuals=cfg.normalize_residuals,
        )

    def _dispatch(self, problem, world, carry, nom_s):
        cfg = self.config
        warm_sol = carry.solution if (carry is not None
                                      and cfg.warm_start) else None
        if cfg.variant in ("rda", "rda-fixed"):
            warm = (rda.warm_start_from(warm_sol, problem)
                    if warm_sol is not None else None)
            return rda.solve(problem, warm=warm)
        if cfg.variant in ("scp-obca", "scp-obca-fixed"):
            warm_duals = warm_sol.duals if warm_sol is not None else None
            return scp_obca_solve(problem, nominal_s=nom_s,
                                  warm_duals=warm_duals)
        return point_mass_plan(problem, nominal_s=nom_s)


# -- sequential-convexification baseline ------------------------------------

_SCP_MAX_OUTER = 30
_SCP_STEP_TOL = 1e-3
_SCP_PROX = 1.0
_BALL_CUTS = 16


def _tangent_cut_dirs(k: int = _BALL_CUTS) -> np.ndarray:
    ang = 2.0 * math.pi * np.arange(k) / k
    return np.column_stack([np.cos(ang), np.sin(ang)])


def scp_obca_solve(problem: rda.RdaProblem, nominal_s=None,
                   warm_duals=None,
                   max_outer: int = _SCP_MAX_OUTER) -> rda.RdaSolution:
    """Solve the coupled horizon problem by repeated convexification.

    All trajectory and per-obstacle dual variables are stacked into one QP;
    the bilinear stationarity/margin terms are linearized about the current
    iterate and the norm ball is replaced by fixed tangent cuts.  A proximal
    term keeps successive iterates close, giving the usual trust-region
    behaviour without a separate radius update.
    """
    t0 = time.perf_counter()
    N, M = problem.N, problem.M
    fp = problem.footprint
    off_u, off_d, n_traj = rda._layout(N)
    # variable layout: trajectory block, then per-(t, m) lambda and mu
    block_off = []
    n = n_traj
    for t in range(N + 1):
        row = []
        for m in range(M):
            l = problem.obstacles[m][t].n_rows
            row.append((n, l, fp.n_rows))
            n += l + fp.n_rows
        block_off.append(row)

    x = np.zeros(n)
    if nominal_s is not None:
        x[:off_u] = np.asarray(nominal_s, dtype=float).ravel()
    x[off_d:n_traj] = problem.d_min
    if warm_duals is not None:
        for t in range(N + 1):
            for m in range(M):
                off, l, h = block_off[t][m]
                blk = warm_duals[t][m]
                if blk.lam.shape[0] == l:
                    x[off:off + l] = blk.lam
                    x[off + l:off + l + h] = blk.mu
    cuts = _tangent_cut_dirs()

    history = []
    converged = False
    it = 0
    qp_warm = None
    for it in range(1, max_outer + 1):
        qp = _scp_assemble(problem, x, block_off, n, cuts)
        qp.warm_start = qp_warm
        sol, report = solve_qp(qp, tol=rda.QP_TOL, max_iter=rda.QP_MAX_ITER)
        if report.status == "infeasible":
            raise rda.RdaInfeasibleError(
                "coupled convexified QP infeasible")
        qp_warm = (sol.copy(), np.zeros(qp.m))
        step = float(np.max(np.abs(sol - x)))
        history.append((step, step))
        x = sol
        if step < _SCP_STEP_TOL:
            converged = True
            break

    primal = rda.PrimalBlock(x[:off_u].reshape(N + 1, 3).copy(),
                             x[off_u:off_d].reshape(N, 2).copy(),
                             x[off_d:n_traj].copy())
    duals = []
    for t in range(N + 1):
        row = []
        for m in range(M):
            off, l, h = block_off[t][m]
            row.append(rda.ObstacleDualBlock(
                x[off:off + l].copy(), x[off + l:off + l + h].copy(),
                0.0, np.zeros(2), 0.0))
        duals.append(row)
    return rda.RdaSolution(primal=primal, duals=duals,
                           residual_history=history or [(0.0, 0.0)],
                           iterations=it, converged=converged,
                           wall_time=time.perf_counter() - t0)


def _scp_assemble(problem: rda.RdaProblem, x_bar, block_off, n, cuts):
    N, M = problem.N, problem.M
    fp = problem.footprint
    off_u, off_d, n_traj = rda._layout(N)
    P_diag = np.full(n, _SCP_PROX)
    q = -_SCP_PROX * x_bar.copy()
    rda._tracking_terms(problem, P_diag, q)
    q[off_d:n_traj] += -problem.eta
    P = sp.diags(P_diag).tocsc()

    e_rows, e_cols, e_vals, beq = [], [], [], []
    r = 0
    for j in range(3):
        e_rows.append(r); e_cols.append(j); e_vals.append(1.0)
        beq.append(problem.s_init[j]); r += 1
    for t in range(N):
        dyn = problem.dynamics[t]
        for j in range(3):
            e_rows.append(r); e_cols.append(3 * (t + 1) + j)
            e_vals.append(1.0)
            for k in range(3):
                e_rows.append(r); e_cols.append(3 * t + k)
                e_vals.append(-dyn.A[j, k])
            for k in range(2):
                e_rows.append(r); e_cols.append(off_u + 2 * t + k)
                e_vals.append(-dyn.B[j, k])
            beq.append(dyn.c[j]); r += 1
    # linearized stationarity H = 0 per block
    for t in range(N + 1):
        pm = problem.pose_maps[t]
        th_bar = x_bar[3 * t + 2]
        for m in range(M):
            region = problem.obstacles[m][t]
            off, l, h = block_off[t][m]
            lam_bar = x_bar[off:off + l]
            R_bar = pm.rotation(float(th_bar))
            DR = region.D @ R_bar  # (l, 2)
            DdR = region.D @ pm.dR
            g_th = lam_bar @ DdR  # dH/dtheta (2,)
            for j in range(2):
                # H_j ~ lam.DR_bar[:,j] + mu.G[:,j] + g_th*(th - th_bar)
                e_rows.append(r); e_cols.append(3 * t + 2)
                e_vals.append(float(g_th[j]))
                for i in range(l):
                    e_rows.append(r); e_cols.append(off + i)
                    e_vals.append(float(DR[i, j]))
                for i in range(h):
                    e_rows.append(r); e_cols.append(off + l + i)
                    e_vals.append(float(fp.G[i, j]))
                beq.append(float(g_th[j]) * th_bar)
                r += 1
    Aeq = sp.coo_matrix((e_vals, (e_rows, e_cols)), shape=(r, n)).tocsc()
    beq = np.array(beq)

    i_rows, i_cols, i_vals, lin, uin = [], [], [], [], []
    r = 0
    u_lo, u_hi = problem.bounds.box()
    a_lo, a_hi = problem.bounds.slew()
    big = 1e20
    for t in range(N):
        lo, hi = u_lo.copy(), u_hi.copy()
        if t == 0 and problem.u_prev is not None:
            up = problem.u_prev.as_array()
            lo = np.maximum(lo, up + a_lo)
            hi = np.minimum(hi, up + a_hi)
            if np.any(lo > hi):
                raise rda.RdaInfeasibleError(
                    "control bounds: first-step slew window is empty")
        for k in range(2):
            i_rows.append(r); i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0); lin.append(lo[k]); uin.append(hi[k]); r += 1
    for t in range(1, N):
        for k in range(2):
            i_rows.append(r); i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0)
            i_rows.append(r); i_cols.append(off_u + 2 * (t - 1) + k)
            i_vals.append(-1.0)
            lin.append(a_lo[k]); uin.append(a_hi[k]); r += 1
    for t in range(N + 1):
        i_rows.append(r); i_cols.append(off_d + t)
        i_vals.append(1.0)
        lin.append(problem.d_min); uin.append(problem.d_max); r += 1
    for t in range(N + 1):
        p_bar = x_bar[3 * t:3 * t + 2]
        for m in range(M):
            region = problem.obstacles[m][t]
            off, l, h = block_off[t][m]
            lam_bar = x_bar[off:off + l]
            lamD_bar = lam_bar @ region.D  # (2,)
            Dp_bar = region.D @ p_bar - region.b  # coeffs on lam
            # margin: lamD_bar.p + lam.(D p_bar - b) - lamD_bar.p_bar
            #         - mu.h - d >= 0  (linearized bilinear term)
            for k in range(2):
                i_rows.append(r); i_cols.append(3 * t + k)
                i_vals.append(float(lamD_bar[k]))
            for i in range(l):
                i_rows.append(r); i_cols.append(off + i)
                i_vals.append(float(Dp_bar[i]))
            for i in range(h):
                i_rows.append(r); i_cols.append(off + l + i)
                i_vals.append(float(-fp.h[i]))
            i_rows.append(r); i_cols.append(off_d + t)
            i_vals.append(-1.0)
            lin.append(float(lamD_bar @ p_bar))
            uin.append(big)
            r += 1
            # cone membership
            if region.cone.is_orthant:
                for i in range(l):
                    i_rows.append(r); i_cols.append(off + i)
                    i_vals.append(1.0); lin.append(0.0); uin.append(big)
                    r += 1
            else:
                # second-order cone replaced by tangent cuts c.v <= bound
                for c in cuts:
                    i_rows.append(r); i_cols.append(off + l - 1)
                    i_vals.append(1.0)
                    for i in range(l - 1):
                        i_rows.append(r); i_cols.append(off + i)
                        i_vals.append(float(-c[i]))
                    lin.append(0.0); uin.append(big); r += 1
            for i in range(h):
                i_rows.append(r); i_cols.append(off + l + i)
                i_vals.append(1.0); lin.append(0.0); uin.append(big)
                r += 1
            # norm ball by tangent cuts on D^T lam
            DT = region.D.T  # (2, l)
            for c in cuts:
                coef = c @ DT  # (l,)
                for i in range(l):
                    i_rows.append(r); i_cols.append(off + i)
                    i_vals.append(float(coef[i]))
                lin.append(-big); uin.append(1.0)
                r += 1
    Ain = sp.coo_matrix((i_vals, (i_rows, i_cols)), shape=(r, n)).tocsc()
    return QpProblem(P=P, q=q, Aeq=Aeq, beq=beq, Ain=Ain,
                     lin=np.array(lin), uin=np.array(uin))


# -- point-mass baseline -----------------------------------------------------

_PM_MAX_OUTER = 10


def point_mass_plan(problem: rda.RdaProblem, nominal_s=None,
                    max_outer: int = _PM_MAX_OUTER) -> rda.RdaSolution:
    """Disk-on-disk reduction: keep-out circles around obstacle centers.

    Each obstacle becomes the constraint ``||p_t - c_m|| >= r_m + r_robot``
    linearized about the nominal trajectory, re-linearized a few times.
    An infeasible QP raises :class:`PlannerStuckError`.
    """
    t0 = time.perf_counter()
    N, M = problem.N, problem.M
    off_u, off_d, n = rda._layout(N)
    r_robot = problem.footprint.circumradius()
    centers = []
    radii = []
    for m in range(M):
        regs = problem.obstacles[m]
        centers.append(np.array([reg.center_hint for reg in regs]))
        radii.append(regs[0].circumradius())

    x = np.zeros(n)
    if nominal_s is not None:
        x[:off_u] = np.asarray(nominal_s, dtype=float).ravel()
    x[off_d:] = problem.d_min

    history = []
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        qp = _pm_assemble(problem, x, centers, radii, r_robot)
        sol, report = solve_qp(qp, tol=rda.QP_TOL, max_iter=rda.QP_MAX_ITER)
        if report.status == "infeasible" or (report.status == "max_iter"
                                             and report.primal_residual
                                             > 1e-3):
            raise PlannerStuckError(
                "point-mass keep-out circles admit no feasible trajectory")
        step = float(np.max(np.abs(sol - x)))
        history.append((step, step))
        x = sol
        if step < _SCP_STEP_TOL:
            converged = True
            break

    primal = rda.PrimalBlock(x[:off_u].reshape(N + 1, 3).copy(),
                             x[off_u:off_d].reshape(N, 2).copy(),
                             x[off_d:].copy())
    duals = [[rda.ObstacleDualBlock.zeros(problem.obstacles[m][t].n_rows,
                                          problem.footprint.n_rows)
              for m in range(M)] for t in range(N + 1)]
    return rda.RdaSolution(primal=primal, duals=duals,
                           residual_history=history or [(0.0, 0.0)],
                           iterations=it, converged=converged,
                           wall_time=time.perf_counter() - t0)


def _pm_assemble(problem: rda.RdaProblem, x_bar, centers, radii, r_robot):
    N, M = problem.N, problem.M
    off_u, off_d, n = rda._layout(N)
    P_diag = np.zeros(n)
    q = np.zeros(n)
    rda._tracking_terms(problem, P_diag, q)
    P = sp.diags(P_diag + 1e-8).tocsc()

    e_rows, e_cols, e_vals, beq = [], [], [], []
    r = 0
    for j in range(3):
        e_rows.append(r); e_cols.append(j); e_vals.append(1.0)
        beq.append(problem.s_init[j]); r += 1
    for t in range(N):
        dyn = problem.dynamics[t]
        for j in range(3):
            e_rows.append(r); e_cols.append(3 * (t + 1) + j)
            e_vals.append(1.0)
            for k in range(3):
                e_rows.append(r); e_cols.append(3 * t + k)
                e_vals.append(-dyn.A[j, k])
            for k in range(2):
                e_rows.append(r); e_cols.append(off_u + 2 * t + k)
                e_vals.append(-dyn.B[j, k])
            beq.append(dyn.c[j]); r += 1
    Aeq = sp.coo_matrix((e_vals, (e_rows, e_cols)), shape=(r, n)).tocsc()

    i_rows, i_cols, i_vals, lin, uin = [], [], [], [], []
    r = 0
    u_lo, u_hi = problem.bounds.box()
    a_lo, a_hi = problem.bounds.slew()
    big = 1e20
    for t in range(N):
        lo, hi = u_lo.copy(), u_hi.copy()
        if t == 0 and problem.u_prev is not None:
            up = problem.u_prev.as_array()
            lo = np.maximum(lo, up + a_lo)
            hi = np.minimum(hi, up + a_hi)
            if np.any(lo > hi):
                raise PlannerStuckError(
                    "control bounds: first-step slew window is empty")
        for k in range(2):
            i_rows.append(r); i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0); lin.append(lo[k]); uin.append(hi[k]); r += 1
    for t in range(1, N):
        for k in range(2):
            i_rows.append(r); i_cols.append(off_u + 2 * t + k)
            i_vals.append(1.0)
            i_rows.append(r); i_cols.append(off_u + 2 * (t - 1) + k)
            i_vals.append(-1.0)
            lin.append(a_lo[k]); uin.append(a_hi[k]); r += 1
    for t in range(N + 1):
        p_bar = x_bar[3 * t:3 * t + 2]
        for m in range(M):
            c = centers[m][t]
            gap = p_bar - c
            dist = float(np.hypot(*gap))
            nrm = gap / dist if dist > 1e-9 else np.array([1.0, 0.0])
            keep_out = radii[m] + r_robot
            for k in range(2):
                i_rows.append(r); i_cols.append(3 * t + k)
                i_vals.append(float(nrm[k]))
            lin.append(keep_out + float(nrm @ c))
            uin.append(big)
            r += 1
    for t in range(N + 1):
        i_rows.append(r); i_cols.append(off_d + t)
        i_vals.append(1.0)
        lin.append(problem.d_min); uin.append(problem.d_max); r += 1
    Ain = sp.coo_matrix((i_vals, (i_rows, i_cols)), shape=(r, n)).tocsc()
    return QpProblem(P=P, q=q, Aeq=Aeq, beq=np.array(beq), Ain=Ain,
                     lin=np.array(lin), uin=np.array(uin))
