import math
import textwrap

import numpy as np
import pytest

from rdaplan.geometry import Pose, min_distance
from rdaplan.planner import PlannerConfig
from rdaplan.scenario import (Scenario, ScenarioError, load_scenario,
                              random_scenario)
from rdaplan.sim import (OUTCOME_BUDGET, OUTCOME_STUCK, OUTCOME_SUCCESS,
                         run_episode)

MINIMAL = textwrap.dedent("""\
    name: mini
    robot:
      shape: rectangle
      length: 3.0
      width: 1.6
      wheelbase: 2.5
      dt: 0.2
      start: [0.0, 0.0, 0.0]
      u_min: [-1.0, -0.5]
      u_max: [4.0, 0.5]
      a_min: [-1.0, -0.3]
      a_max: [1.0, 0.3]
    path:
      waypoints:
        - [0.0, 0.0, 0.0]
        - [12.0, 0.0, 0.0]
      turning_radius: 3.0
      v_ref: 2.0
    goal:
      pose: [12.0, 0.0, 0.0]
      tolerance: 0.6
    obstacles: []
    step_budget: 120
    """)


def write_scn(tmp_path, text, name="t.scn"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ------------------------------------------------------------- loading


def test_load_shipped_cluttered(scenario_dir):
    scen = load_scenario(scenario_dir / "cluttered_8.scn")
    assert scen.name == "cluttered_8"
    assert scen.M == 8
    assert scen.goal.x == pytest.approx(30.0)
    assert scen.step_budget == 300
    assert scen.params.dt == pytest.approx(0.2)
    assert scen.footprint.cone.is_orthant
    # start pose must be collision free
    for ob in scen.obstacles:
        assert min_distance(scen.footprint, scen.start, ob) > 0


def test_load_shipped_corridor(scenario_dir):
    scen = load_scenario(scenario_dir / "corridor.scn")
    assert scen.name == "corridor"
    assert scen.M >= 4


def test_load_minimal_and_defaults(tmp_path):
    scen = load_scenario(write_scn(tmp_path, MINIMAL))
    assert scen.M == 0
    assert scen.obstacle_velocities == []
    assert scen.v_ref == 2.0


def test_load_moving_obstacle(tmp_path):
    text = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
        obstacles:
          - shape: circle
            center: [20.0, 5.0]
            radius: 1.0
            velocity: [0.0, -0.5]
        """).rstrip())
    scen = load_scenario(write_scn(tmp_path, text))
    assert scen.M == 1
    np.testing.assert_allclose(scen.obstacle_velocities[0], [0.0, -0.5])


def test_missing_file_raises():
    with pytest.raises(ScenarioError):
        load_scenario("/nonexistent/nope.scn")


def test_error_names_missing_field(tmp_path):
    text = MINIMAL.replace("  shape: rectangle\n", "")
    with pytest.raises(ScenarioError, match="robot.shape"):
        load_scenario(write_scn(tmp_path, text))


def test_error_names_bad_obstacle(tmp_path):
    text = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
        obstacles:
          - shape: hexagon
        """).rstrip())
    with pytest.raises(ScenarioError, match=r"obstacles\[0\]"):
        load_scenario(write_scn(tmp_path, text))


def test_error_wrong_vector_length(tmp_path):
    text = MINIMAL.replace("start: [0.0, 0.0, 0.0]", "start: [0.0, 0.0]")
    with pytest.raises(ScenarioError, match="robot.start"):
        load_scenario(write_scn(tmp_path, text))


def test_error_start_in_collision(tmp_path):
    text = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
        obstacles:
          - shape: circle
            center: [0.5, 0.0]
            radius: 1.0
        """).rstrip())
    with pytest.raises(ScenarioError):
        load_scenario(write_scn(tmp_path, text))


def test_not_yaml(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(write_scn(tmp_path, "{{{::not yaml"))


# --------------------------------------------------------- random worlds


def test_random_scenario_deterministic():
    a = random_scenario(6, seed=42)
    b = random_scenario(6, seed=42)
    assert a.M == b.M == 6
    for oa, ob in zip(a.obstacles, b.obstacles):
        assert np.array_equal(oa.D, ob.D)
        assert np.array_equal(oa.b, ob.b)
    c = random_scenario(6, seed=43)
    assert not all(np.array_equal(oa.b, oc.b)
                   for oa, oc in zip(a.obstacles, c.obstacles))


def test_random_scenario_start_goal_clear():
    for seed in range(25):
        scen = random_scenario(8, seed=seed)
        for ob in scen.obstacles:
            assert min_distance(scen.footprint, scen.start, ob) > 0.05
            assert min_distance(scen.footprint, scen.goal, ob) > 0.05


def test_random_scenario_zero_obstacles():
    scen = random_scenario(0, seed=1)
    assert scen.M == 0


# ------------------------------------------------------------- episodes


def test_episode_obstacle_free_success(tmp_path):
    scen = load_scenario(write_scn(tmp_path, MINIMAL))
    result = run_episode(scen, PlannerConfig(horizon=15))
    assert result.outcome == OUTCOME_SUCCESS
    assert result.navigation_time > 0
    assert math.isinf(result.min_clearance)
    # lateral tracking error on the straight reference stays small
    assert np.abs(result.trajectory[:, 1]).max() < 0.05
    assert len(result.steps) == len(result.trajectory) - 1
    assert result.steps[-1].outcome_flag == 1
    for rec, row in zip(result.steps, result.trajectory[1:]):
        assert rec.x == row[0] and rec.y == row[1]


def test_episode_budget_exhausted(tmp_path):
    scen = load_scenario(write_scn(tmp_path,
                                   MINIMAL.replace("step_budget: 120",
                                                   "step_budget: 5")))
    result = run_episode(scen, PlannerConfig(horizon=10))
    assert result.outcome == OUTCOME_BUDGET
    assert len(result.steps) == 5


def test_episode_blocked_point_mass_stuck(scenario_dir):
    scen = load_scenario(scenario_dir / "corridor.scn")
    result = run_episode(scen, PlannerConfig(variant="point-mass"))
    assert result.outcome == OUTCOME_STUCK


def test_episode_success_implies_clearance(tmp_path):
    text = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
        obstacles:
          - shape: circle
            center: [6.0, 1.8]
            radius: 0.8
        """).rstrip())
    scen = load_scenario(write_scn(tmp_path, text))
    result = run_episode(scen, PlannerConfig(horizon=15))
    assert result.outcome == OUTCOME_SUCCESS
    assert result.min_clearance >= 0.0
    assert result.min_clearance == pytest.approx(
        min(rec.min_clearance for rec in result.steps))


def test_episode_moving_obstacle(tmp_path):
    # crossing disk: planner sees the constant-velocity prediction
    text = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
        obstacles:
          - shape: circle
            center: [8.0, 6.0]
            radius: 0.8
            velocity: [0.0, -0.4]
        """).rstrip())
    scen = load_scenario(write_scn(tmp_path, text))
    result = run_episode(scen, PlannerConfig(horizon=15))
    assert result.outcome == OUTCOME_SUCCESS
    assert result.min_clearance > 0.0
