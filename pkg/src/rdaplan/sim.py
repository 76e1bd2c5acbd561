"""Deterministic single-rate 2D episode simulator.

One tick = one MPC period = one exact Ackermann step.  Collision verdicts
come exclusively from the geometry distance oracle evaluated at exact
(non-linearized) poses; the planner never grades itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dubins import dubins_reference
from .dynamics import ControlInput, step_exact
from .geometry import min_distance
from .planner import Planner, PlannerConfig, WorldState
from .scenario import Scenario

__all__ = ["EpisodeResult", "StepRecord", "run_episode",
           "OUTCOME_SUCCESS", "OUTCOME_COLLISION", "OUTCOME_STUCK",
           "OUTCOME_BUDGET"]

OUTCOME_SUCCESS = "success"
OUTCOME_COLLISION = "collision"
OUTCOME_STUCK = "stuck"
OUTCOME_BUDGET = "budget-exhausted"

_OUTCOME_FLAGS = {OUTCOME_SUCCESS: 1, OUTCOME_COLLISION: 2,
                  OUTCOME_STUCK: 3, OUTCOME_BUDGET: 4}

# stuck detection: net path progress below this over the trailing window
_STUCK_WINDOW = 50
_STUCK_PROGRESS = 0.2


@dataclass
class StepRecord:
    step: int
    t_sim: float
    x: float
    y: float
    theta: float
    v: float
    psi: float
    min_clearance: float
    solver_iters: int
    compute_ms: float
    outcome_flag: int = 0


@dataclass
class EpisodeResult:
    outcome: str
    navigation_time: float
    steps: list  # StepRecord rows
    trajectory: np.ndarray  # (K, 3) executed poses incl. start
    min_clearance: float
    rda_iterations: list
    compute_times: list  # per-step wall seconds
    predictions: dict = field(default_factory=dict)  # step -> (N+1, 3)
    residual_traces: dict = field(default_factory=dict)  # step -> history
    scenario_name: str = ""
    variant: str = ""

    @property
    def outcome_flag(self) -> int:
        return _OUTCOME_FLAGS[self.outcome]


def _path_progress(path, pose) -> float:
    xy = path.samples[:, :2]
    d = xy - [pose.x, pose.y]
    return float(path.arclen[int(np.argmin(np.einsum("ij,ij->i", d, d)))])


def run_episode(scenario: Scenario, config: PlannerConfig,
                keep_predictions_every: int = 25) -> EpisodeResult:
    """Drive one episode to success/collision/stuck/budget-exhausted."""
    path = dubins_reference(scenario.waypoints, scenario.turning_radius)
    planner = Planner(config, scenario.footprint, scenario.params,
                      scenario.bounds, path, scenario.goal, scenario.v_ref)

    pose = scenario.start
    u_prev = ControlInput(0.0, 0.0)
    carry = None
    obstacles = list(scenario.obstacles)
    velocities = list(scenario.obstacle_velocities)
    dt = scenario.params.dt

    records = []
    trajectory = [pose.as_array()]
    iterations = []
    compute_times = []
    predictions = {}
    residual_traces = {}
    progress = []
    min_clear = float("inf")
    outcome = OUTCOME_BUDGET
    t_sim = 0.0

    for step in range(scenario.step_budget):
        world = WorldState(pose=pose, u_prev=u_prev, obstacles=obstacles,
                           obstacle_velocities=velocities, t_sim=t_sim)
        u0, pred, diag, carry = planner.mpc_step(world, carry)
        if diag["done"]:
            outcome = OUTCOME_SUCCESS
            break
        if diag["error"] is not None or diag["stuck"]:
            outcome = OUTCOME_STUCK
            break

        pose = step_exact(pose, u0, scenario.params)
        t_sim += dt
        obstacles = [ob if vel is None else ob.translated(np.asarray(vel) * dt)
                     for ob, vel in zip(obstacles, velocities)]

        clear = min((min_distance(scenario.footprint, pose, ob)
                     for ob in obstacles), default=float("inf"))
        min_clear = min(min_clear, clear)
        trajectory.append(pose.as_array())
        iterations.append(diag["iterations"])
        compute_times.append(diag["wall_time"])
        records.append(StepRecord(
            step=step, t_sim=t_sim, x=pose.x, y=pose.y, theta=pose.theta,
            v=u0.v, psi=u0.psi,
            min_clearance=clear,
            solver_iters=diag["iterations"],
            compute_ms=diag["wall_time"] * 1e3))
        if step % keep_predictions_every == 0:
            predictions[step] = pred
            if carry.solution is not None:
                residual_traces[step] = list(
                    carry.solution.residual_history)

        if clear <= 0.0:
            outcome = OUTCOME_COLLISION
            break
        progress.append(_path_progress(path, pose))
        if (len(progress) > _STUCK_WINDOW and
                progress[-1] - progress[-1 - _STUCK_WINDOW] < _STUCK_PROGRESS):
            outcome = OUTCOME_STUCK
            break
        u_prev = u0

    if records:
        records[-1].outcome_flag = _OUTCOME_FLAGS[outcome]
    return EpisodeResult(
        outcome=outcome,
        navigation_time=t_sim,
        steps=records,
        trajectory=np.array(trajectory),
        min_clearance=min_clear,
        rda_iterations=iterations,
        compute_times=compute_times,
        predictions=predictions,
        residual_traces=residual_traces,
        scenario_name=scenario.name,
        variant=config.variant,
    )
