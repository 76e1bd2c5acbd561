import math

import numpy as np
import pytest

from rdaplan import rda
from rdaplan.dubins import dubins_reference
from rdaplan.dynamics import ControlInput, check_bounds, step_exact
from rdaplan.geometry import (Pose, make_ball, make_rectangle, min_distance)
from rdaplan.planner import (MpcCarry, Planner, PlannerConfig, WorldState,
                             build_tracking_cost, point_mass_plan,
                             scp_obca_solve)

from test_rda import straight_problem, unit_square


def make_planner(cfg, params, bounds, footprint, goal_x=30.0):
    path = dubins_reference([Pose(0, 0, 0), Pose(goal_x, 0, 0)], 3.0)
    return Planner(cfg, footprint, params, bounds, path,
                   Pose(goal_x, 0, 0), v_ref=2.0)


def world_at(pose, obstacles=(), u_prev=ControlInput(0, 0)):
    return WorldState(pose=pose, u_prev=u_prev, obstacles=list(obstacles))


# ------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(variant="unknown")
    with pytest.raises(ValueError):
        PlannerConfig(horizon=0)
    cfg = PlannerConfig(variant="rda-fixed", d_safe=0.5)
    assert cfg.fixed_distance
    assert cfg.d_box() == (0.5, 0.5)
    assert PlannerConfig().d_box() == (0.1, 1.0)


# ------------------------------------------------------------- reference


def test_tracking_cost_window_on_path():
    path = dubins_reference([Pose(0, 0, 0), Pose(30, 0, 0)], 3.0)
    cost = build_tracking_cost(path, Pose(4.0, 0.1, 0.0), N=10, Q=1.0,
                               P=1.0, v_ref=2.0, dt=0.2)
    ref = cost.reference_states
    assert ref.shape == (11, 3)
    assert ref[0, 0] == pytest.approx(4.0, abs=0.06)
    # marches ahead at v_ref * dt per sample
    np.testing.assert_allclose(np.diff(ref[:, 0]), 0.4, atol=0.02)
    np.testing.assert_allclose(cost.reference_speeds, 2.0)


def test_tracking_cost_speed_tapers_at_path_end():
    path = dubins_reference([Pose(0, 0, 0), Pose(10, 0, 0)], 3.0)
    cost = build_tracking_cost(path, Pose(9.0, 0.0, 0.0), N=10, Q=1.0,
                               P=1.0, v_ref=2.0, dt=0.2)
    assert cost.reference_speeds[0] == 2.0
    assert cost.reference_speeds[-1] == 0.0
    # clamped positions saturate at the goal
    assert cost.reference_states[-1, 0] == pytest.approx(10.0, abs=0.05)


def test_tracking_cost_heading_no_wrap_jump():
    path = dubins_reference([Pose(0, 0, math.pi), Pose(-20, 0, math.pi)],
                            3.0)
    cost = build_tracking_cost(path, Pose(-3.0, 0.0, -math.pi + 0.05),
                               N=8, Q=1.0, P=1.0, v_ref=2.0, dt=0.2)
    ref_th = cost.reference_states[:, 2]
    assert abs(ref_th[0] - (-math.pi + 0.05)) < math.pi
    assert np.abs(np.diff(ref_th)).max() < 0.5


# ------------------------------------------------------------- mpc step


def test_mpc_step_obstacle_free(params, bounds, footprint):
    cfg = PlannerConfig()
    planner = make_planner(cfg, params, bounds, footprint)
    u0, pred, diag, carry = planner.mpc_step(world_at(Pose(0, 0, 0)))
    assert diag["error"] is None and not diag["stuck"]
    assert diag["converged"]
    # accelerates as hard as the slew limit allows, straight ahead
    assert u0.v == pytest.approx(1.0, abs=1e-4)
    assert u0.psi == pytest.approx(0.0, abs=1e-4)
    assert pred.shape == (cfg.horizon + 1, 3)
    assert carry.solution is not None


def test_mpc_step_goal_reached(params, bounds, footprint):
    cfg = PlannerConfig(goal_tolerance=0.5)
    planner = make_planner(cfg, params, bounds, footprint)
    u0, _, diag, _ = planner.mpc_step(world_at(Pose(29.8, 0.1, 0.0)))
    assert diag["done"]
    assert u0.v == 0.0 and u0.psi == 0.0


def test_mpc_step_infeasible_start_safe_stops(params, bounds, footprint):
    planner = make_planner(PlannerConfig(), params, bounds, footprint)
    world = world_at(Pose(0, 0, 0), u_prev=ControlInput(10.0, 0.0))
    u0, _, diag, carry = planner.mpc_step(world)
    assert diag["error"] is not None
    assert u0.v == 0.0 and u0.psi == 0.0
    assert carry.solution is None


@pytest.mark.parametrize("variant", ["rda", "rda-fixed", "scp-obca",
                                     "scp-obca-fixed", "point-mass"])
def test_variants_emit_feasible_controls(variant, params, bounds, footprint):
    cfg = PlannerConfig(variant=variant)
    planner = make_planner(cfg, params, bounds, footprint)
    pose, u_prev, carry = Pose(0, 0, 0), ControlInput(0, 0), None
    obstacles = [make_rectangle((8.0, 2.2), 1.6, 1.6)]
    controls = []
    for _ in range(8):
        u0, _, diag, carry = planner.mpc_step(
            world_at(pose, obstacles, u_prev), carry)
        assert diag["error"] is None, diag
        controls.append(u0)
        pose = step_exact(pose, u0, params)
        u_prev = u0
    ok, viol = check_bounds(controls, bounds, u_prev=ControlInput(0, 0),
                            tol=1e-6)
    assert ok, viol
    assert pose.x > 1.5  # made forward progress


def test_warm_carry_reduces_iterations(params, bounds, footprint):
    cfg = PlannerConfig(eps_pri=0.1, eps_dual=0.1)
    planner = make_planner(cfg, params, bounds, footprint)
    obstacles = [make_rectangle((8.0, 1.6), 2.0, 2.0)]
    pose, u_prev, carry = Pose(0, 0, 0), ControlInput(0, 0), None
    iters = []
    for _ in range(6):
        u0, _, diag, carry = planner.mpc_step(
            world_at(pose, obstacles, u_prev), carry)
        iters.append(diag["iterations"])
        pose = step_exact(pose, u0, params)
        u_prev = u0
    assert min(iters[1:]) <= iters[0]


def test_moving_obstacle_prediction(params, bounds, footprint):
    cfg = PlannerConfig(horizon=5)
    planner = make_planner(cfg, params, bounds, footprint)
    region = make_ball((10.0, 0.0), 0.8)
    world = WorldState(pose=Pose(0, 0, 0), u_prev=ControlInput(0, 0),
                       obstacles=[region],
                       obstacle_velocities=[np.array([0.0, 1.0])])
    problem = planner._build_problem(world, *planner._nominal(world, None))
    centers = [problem.obstacles[0][t].b[:2] for t in range(6)]
    np.testing.assert_allclose(
        centers, [[10.0, 1.0 * params.dt * t] for t in range(6)], atol=1e-9)


# ------------------------------------------------- baseline cross-checks


def test_scp_matches_obstacle_free_solution(params, bounds):
    prob = straight_problem(params, bounds, [])
    sol_rda = rda.solve(prob)
    sol_scp = scp_obca_solve(prob)
    np.testing.assert_allclose(sol_scp.primal.s, sol_rda.primal.s,
                               atol=1e-3)
    np.testing.assert_allclose(sol_scp.primal.u, sol_rda.primal.u,
                               atol=1e-3)


def test_scp_objective_close_to_rda_on_toy(params, bounds):
    obs = make_rectangle((6.0, 2.0), 1.6, 1.6)
    prob = straight_problem(params, bounds, [obs], eps_pri=0.05,
                            eps_dual=0.05, max_iters=300)
    sol_rda = rda.solve(prob)
    sol_scp = scp_obca_solve(prob)

    def objective(primal):
        return (prob.cost.evaluate(primal.s, primal.u)
                - prob.eta * float(np.sum(primal.d)))

    o_rda = objective(sol_rda.primal)
    o_scp = objective(sol_scp.primal)
    assert abs(o_rda - o_scp) <= 0.01 * abs(o_rda)


def test_scp_solution_respects_margins(params, bounds):
    obs = make_rectangle((6.0, 2.0), 1.6, 1.6)
    prob = straight_problem(params, bounds, [obs])
    sol = scp_obca_solve(prob)
    for t in range(prob.N + 1):
        dist = min_distance(prob.footprint, Pose(*sol.primal.s[t]), obs)
        assert dist >= sol.primal.d[t] - 0.1


def test_point_mass_keepout_radius(params, bounds):
    obs = make_ball((6.0, 1.2), 0.8)
    prob = straight_problem(params, bounds, [obs])
    sol = point_mass_plan(prob)
    r_keep = 0.8 + prob.footprint.circumradius()
    centers = sol.primal.s[:, :2] - np.array([6.0, 1.2])
    assert np.min(np.hypot(centers[:, 0], centers[:, 1])) >= r_keep - 0.05


def test_fixed_distance_variant_pins_slack(params, bounds):
    obs = make_rectangle((6.0, 2.0), 1.6, 1.6)
    prob = straight_problem(params, bounds, [obs], d_min=0.5, d_max=0.5,
                            eps_pri=0.1, eps_dual=0.1, max_iters=200)
    sol = rda.solve(prob)
    np.testing.assert_allclose(sol.primal.d, 0.5, atol=1e-6)
