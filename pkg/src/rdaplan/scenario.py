"""Scenario files: schema validation, loading, and seeded random fields.

A scenario is a YAML document (conventionally ``*.scn``) describing the
robot, its reference waypoints, the obstacle field, and the episode
budget.  Loading validates every field and oracle-checks that the start
pose is collision-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .dynamics import AckermannParams, ControlBounds, ControlInput
from .geometry import (ConvexRegion, Pose, RobotFootprint, footprint_circle,
                       footprint_rectangle, make_ball, make_polytope,
                       min_distance)

__all__ = ["Scenario", "ScenarioError", "load_scenario", "random_scenario"]


class ScenarioError(ValueError):
    """Schema violation; the message names the offending field path."""


@dataclass
class Scenario:
    name: str
    footprint: RobotFootprint
    params: AckermannParams
    start: Pose
    bounds: ControlBounds
    waypoints: list  # Pose sequence for the reference path
    turning_radius: float
    v_ref: float
    goal: Pose
    goal_tolerance: float
    obstacles: list = field(default_factory=list)  # ConvexRegion
    obstacle_velocities: list = None  # per-obstacle 2-vector or None
    step_budget: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.obstacle_velocities is None:
            self.obstacle_velocities = [None] * len(self.obstacles)
        if len(self.obstacle_velocities) != len(self.obstacles):
            raise ScenarioError("obstacle_velocities length mismatch")

    @property
    def M(self) -> int:
        return len(self.obstacles)


def _need(mapping, key, where, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioError(f"missing field: {where}.{key}")
    val = mapping[key]
    if kind is not None and not isinstance(val, kind):
        raise ScenarioError(
            f"field {where}.{key} has wrong type "
            f"(expected {kind.__name__ if hasattr(kind, '__name__') else kind})")
    return val


def _vec(mapping, key, where, length):
    val = _need(mapping, key, where)
    try:
        arr = [float(v) for v in val]
    except (TypeError, ValueError):
        raise ScenarioError(f"field {where}.{key} must be a number list")
    if len(arr) != length:
        raise ScenarioError(
            f"field {where}.{key} must have {length} entries")
    return arr


def _parse_footprint(robot):
    shape = _need(robot, "shape", "robot", str)
    if shape == "rectangle":
        length = float(_need(robot, "length", "robot"))
        width = float(_need(robot, "width", "robot"))
        return footprint_rectangle(length, width)
    if shape == "circle":
        return footprint_circle(float(_need(robot, "radius", "robot")))
    raise ScenarioError(f"robot.shape must be rectangle or circle, got {shape!r}")


def _parse_obstacle(entry, idx):
    where = f"obstacles[{idx}]"
    shape = _need(entry, "shape", where, str)
    if shape == "polygon":
        verts = _need(entry, "vertices", where)
        if not isinstance(verts, list) or len(verts) < 3:
            raise ScenarioError(f"{where}.vertices needs >= 3 vertices")
        region = make_polytope([[float(c) for c in v] for v in verts])
    elif shape == "circle":
        center = _vec(entry, "center", where, 2)
        region = make_ball(center, float(_need(entry, "radius", where)))
    else:
        raise ScenarioError(
            f"{where}.shape must be polygon or circle, got {shape!r}")
    vel = entry.get("velocity")
    if vel is not None:
        vel = np.array(_vec(entry, "velocity", where, 2))
    return region, vel


def load_scenario(path) -> Scenario:
    """Parse and validate one scenario file."""
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}")
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario file is not valid YAML: {exc}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")

    robot = _need(doc, "robot", "<root>", dict)
    footprint = _parse_footprint(robot)
    params = AckermannParams(L=float(_need(robot, "wheelbase", "robot")),
                             dt=float(_need(robot, "dt", "robot")))
    start = Pose(*_vec(robot, "start", "robot", 3))
    bounds = ControlBounds(
        ControlInput(*_vec(robot, "u_min", "robot", 2)),
        ControlInput(*_vec(robot, "u_max", "robot", 2)),
        ControlInput(*_vec(robot, "a_min", "robot", 2)),
        ControlInput(*_vec(robot, "a_max", "robot", 2)),
    )

    path_cfg = _need(doc, "path", "<root>", dict)
    wp_raw = _need(path_cfg, "waypoints", "path", list)
    if len(wp_raw) < 2:
        raise ScenarioError("path.waypoints needs >= 2 entries")
    waypoints = []
    for i, wp in enumerate(wp_raw):
        try:
            waypoints.append(Pose(*[float(c) for c in wp]))
        except (TypeError, ValueError):
            raise ScenarioError(f"path.waypoints[{i}] must be [x, y, theta]")
    turning_radius = float(_need(path_cfg, "turning_radius", "path"))
    if turning_radius <= 0:
        raise ScenarioError("path.turning_radius must be positive")
    v_ref = float(_need(path_cfg, "v_ref", "path"))

    goal_cfg = _need(doc, "goal", "<root>", dict)
    goal = Pose(*_vec(goal_cfg, "pose", "goal", 3))
    goal_tolerance = float(_need(goal_cfg, "tolerance", "goal"))

    obstacles, velocities = [], []
    for i, entry in enumerate(doc.get("obstacles") or []):
        region, vel = _parse_obstacle(entry, i)
        obstacles.append(region)
        velocities.append(vel)

    scen = Scenario(
        name=str(doc.get("name", "unnamed")),
        footprint=footprint, params=params, start=start, bounds=bounds,
        waypoints=waypoints, turning_radius=turning_radius, v_ref=v_ref,
        goal=goal, goal_tolerance=goal_tolerance,
        obstacles=obstacles, obstacle_velocities=velocities,
        step_budget=int(doc.get("step_budget", 400)),
        seed=int(doc.get("seed", 0)),
    )
    for i, region in enumerate(scen.obstacles):
        if min_distance(footprint, start, region) <= 0.0:
            raise ScenarioError(
                f"start pose collides with obstacles[{i}]")
    return scen


# -- seeded random fields -----------------------------------------------------

_REJECTION_CAP = 2000


def _segment_distance(point, a, b) -> float:
    ab = b - a
    t = float(np.clip((point - a) @ ab / (ab @ ab), 0.0, 1.0))
    return float(np.hypot(*(point - (a + t * ab))))


def random_scenario(M: int, seed: int, field_bounds=(0.0, 30.0, -6.0, 6.0),
                    robot_width: float = 1.6,
                    robot_length: float = 3.0) -> Scenario:
    """Seeded random obstacle field on a straight start-goal reference.

    Obstacles are convex polygons rejection-sampled inside the field so
    that every obstacle keeps at least half the robot width (plus a small
    margin) clear of the start-goal line, guaranteeing a passable corridor,
    and stays 2 m clear of the start and goal poses.
    """
    if M < 0:
        raise ScenarioError("obstacle count must be >= 0")
    rng = np.random.default_rng(seed)
    x_lo, x_hi, y_lo, y_hi = field_bounds
    start = Pose(x_lo, 0.0, 0.0)
    goal = Pose(x_hi, 0.0, 0.0)
    a = np.array([start.x, start.y])
    b = np.array([goal.x, goal.y])
    corridor = robot_width / 2.0 + 0.15

    obstacles = []
    attempts = 0
    while len(obstacles) < M:
        attempts += 1
        if attempts > _REJECTION_CAP:
            raise ScenarioError(
                f"rejection cap reached placing {M} obstacles (seed {seed})")
        cx = rng.uniform(x_lo + 4.0, x_hi - 4.0)
        cy = rng.uniform(max(y_lo, -4.0), min(y_hi, 4.0))
        k = int(rng.integers(3, 7))
        ang = np.sort(rng.uniform(0.0, 2.0 * math.pi, k))
        rad = rng.uniform(0.6, 1.3, k)
        verts = np.column_stack([cx + rad * np.cos(ang),
                                 cy + rad * np.sin(ang)])
        try:
            region = make_polytope(verts)
        except Exception:
            continue
        margin = max(np.hypot(*(v - [cx, cy])) for v in verts)
        if _segment_distance(np.array([cx, cy]), a, b) < corridor + margin:
            continue
        if np.hypot(cx - start.x, cy - start.y) < margin + 2.0:
            continue
        if np.hypot(cx - goal.x, cy - goal.y) < margin + 2.0:
            continue
        obstacles.append(region)

    return Scenario(
        name=f"random_M{M}_seed{seed}",
        footprint=footprint_rectangle(robot_length, robot_width),
        params=AckermannParams(L=2.5, dt=0.2),
        start=start,
        bounds=ControlBounds(ControlInput(-1.0, -0.5), ControlInput(4.0, 0.5),
                             ControlInput(-1.0, -0.3), ControlInput(1.0, 0.3)),
        waypoints=[start, goal],
        turning_radius=3.0,
        v_ref=2.0,
        goal=goal,
        goal_tolerance=0.8,
        obstacles=obstacles,
        step_budget=300,
        seed=seed,
    )
