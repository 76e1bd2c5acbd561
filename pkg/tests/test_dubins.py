import math

import numpy as np
import pytest

from rdaplan.dubins import (DubinsError, dubins_reference, shortest_dubins)
from rdaplan.geometry import Pose


def test_straight_segment():
    length, word, _ = _shortest(Pose(0, 0, 0), Pose(10, 0, 0), 2.0)
    assert length == pytest.approx(10.0, abs=1e-9)


def _shortest(a, b, r):
    word, lengths, total = shortest_dubins(a, b, r)
    return total, word, lengths


def test_half_circle():
    # quarter-turn onto a parallel lane: two arcs or arc+straight,
    # never shorter than the straight-line chord
    length, _, _ = _shortest(Pose(0, 0, 0), Pose(0, 4, math.pi), 2.0)
    assert length == pytest.approx(2.0 * math.pi, abs=1e-6)


def test_length_lower_bound(rng):
    for _ in range(50):
        a = Pose(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3))
        b = Pose(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3))
        length, _, _ = _shortest(a, b, 1.5)
        assert length >= math.hypot(a.x - b.x, a.y - b.y) - 1e-9


def test_reference_path_reaches_goal(rng):
    for _ in range(10):
        goal = Pose(rng.uniform(5, 15), rng.uniform(-5, 5),
                    rng.uniform(-3, 3))
        path = dubins_reference([Pose(0, 0, 0), goal], 2.0)
        end = path.samples[-1]
        assert math.hypot(end[0] - goal.x, end[1] - goal.y) < 0.15
        dth = abs(math.atan2(math.sin(end[2] - goal.theta),
                             math.cos(end[2] - goal.theta)))
        assert dth < 0.1


def test_reference_path_sampling_invariants():
    path = dubins_reference([Pose(0, 0, 0), Pose(12, 3, 0.5)], 2.0,
                            sample_step=0.1)
    # arclength strictly increasing, matches declared length
    assert np.all(np.diff(path.arclen) > 0)
    assert path.length == pytest.approx(path.arclen[-1])
    # consecutive samples no farther apart than the step
    gaps = np.hypot(np.diff(path.samples[:, 0]),
                    np.diff(path.samples[:, 1]))
    assert gaps.max() <= 0.1 + 1e-9
    # curvature bounded by 1/radius (finite-difference heading)
    dth = np.abs(np.diff(np.unwrap(path.samples[:, 2])))
    kappa = dth / np.maximum(np.diff(path.arclen), 1e-12)
    assert kappa.max() <= 1.0 / 2.0 + 1e-6


def test_multi_waypoint_concatenation():
    wps = [Pose(0, 0, 0), Pose(10, 0, 0), Pose(20, 5, math.pi / 2)]
    path = dubins_reference(wps, 2.5)
    leg1 = dubins_reference(wps[:2], 2.5)
    leg2 = dubins_reference(wps[1:], 2.5)
    assert path.length == pytest.approx(leg1.length + leg2.length, abs=1e-6)


def test_heading_tangent_to_motion():
    path = dubins_reference([Pose(0, 0, 0), Pose(8, 4, 1.0)], 2.0)
    xy = path.samples[:, :2]
    v = np.diff(xy, axis=0)
    heading = np.arctan2(v[:, 1], v[:, 0])
    mid = 0.5 * (path.samples[:-1, 2] + path.samples[1:, 2])
    err = np.abs(np.angle(np.exp(1j * (heading - mid))))
    assert np.quantile(err, 0.95) < 0.1


def test_dubins_errors():
    with pytest.raises(DubinsError):
        shortest_dubins(Pose(0, 0, 0), Pose(1, 0, 0), -1.0)
    with pytest.raises(DubinsError):
        dubins_reference([Pose(0, 0, 0)], 2.0)
    with pytest.raises(DubinsError):
        dubins_reference([Pose(0, 0, 0), Pose(5, 0, 0)], 0.0)
