"""Shortest Dubins paths between oriented waypoints, sampled by arc length."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, wrap_angle

__all__ = ["ReferencePath", "dubins_reference", "shortest_dubins", "DubinsError"]

WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


class DubinsError(ValueError):
    pass


def _mod2pi(x: float) -> float:
    return x - 2.0 * math.pi * math.floor(x / (2.0 * math.pi))


def _lsl(a, b, d):
    p_sq = 2 + d * d - 2 * math.cos(a - b) + 2 * d * (math.sin(a) - math.sin(b))
    if p_sq < 0:
        return None
    tmp = math.atan2(math.cos(b) - math.cos(a), d + math.sin(a) - math.sin(b))
    return (_mod2pi(-a + tmp), math.sqrt(p_sq), _mod2pi(b - tmp))


def _rsr(a, b, d):
    p_sq = 2 + d * d - 2 * math.cos(a - b) + 2 * d * (math.sin(b) - math.sin(a))
    if p_sq < 0:
        return None
    tmp = math.atan2(math.cos(a) - math.cos(b), d - math.sin(a) + math.sin(b))
    return (_mod2pi(a - tmp), math.sqrt(p_sq), _mod2pi(-b + tmp))


def _lsr(a, b, d):
    p_sq = -2 + d * d + 2 * math.cos(a - b) + 2 * d * (math.sin(a) + math.sin(b))
    if p_sq < 0:
        return None
    p = math.sqrt(p_sq)
    tmp = math.atan2(-math.cos(a) - math.cos(b),
                     d + math.sin(a) + math.sin(b)) - math.atan2(-2.0, p)
    return (_mod2pi(-a + tmp), p, _mod2pi(-_mod2pi(b) + tmp))


def _rsl(a, b, d):
    p_sq = d * d - 2 + 2 * math.cos(a - b) - 2 * d * (math.sin(a) + math.sin(b))
    if p_sq < 0:
        return None
    p = math.sqrt(p_sq)
    tmp = math.atan2(math.cos(a) + math.cos(b),
                     d - math.sin(a) - math.sin(b)) - math.atan2(2.0, p)
    return (_mod2pi(a - tmp), p, _mod2pi(b - tmp))


def _rlr(a, b, d):
    tmp = (6.0 - d * d + 2.0 * math.cos(a - b)
           + 2.0 * d * (math.sin(a) - math.sin(b))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(2.0 * math.pi - math.acos(tmp))
    t = _mod2pi(a - math.atan2(math.cos(a) - math.cos(b),
                               d - math.sin(a) + math.sin(b)) + p / 2.0)
    return (t, p, _mod2pi(a - b - t + p))


def _lrl(a, b, d):
    tmp = (6.0 - d * d + 2.0 * math.cos(a - b)
           + 2.0 * d * (math.sin(b) - math.sin(a))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(2.0 * math.pi - math.acos(tmp))
    t = _mod2pi(-a + math.atan2(-math.cos(a) + math.cos(b),
                                d + math.sin(a) - math.sin(b)) + p / 2.0)
    return (t, p, _mod2pi(_mod2pi(b) - a - t + 2.0 * p))


_PLANNERS = {"LSL": _lsl, "RSR": _rsr, "LSR": _lsr,
             "RSL": _rsl, "RLR": _rlr, "LRL": _lrl}


def dubins_candidates(start: Pose, end: Pose, radius: float):
    """All feasible (word, segment lengths, total length) in world units."""
    dx, dy = end.x - start.x, end.y - start.y
    dist = math.hypot(dx, dy)
    d = dist / radius
    phi = math.atan2(dy, dx)
    a = _mod2pi(start.theta - phi)
    b = _mod2pi(end.theta - phi)
    out = []
    for word in WORDS:
        seg = _PLANNERS[word](a, b, d)
        if seg is None:
            continue
        lengths = (seg[0] * radius, seg[1] * radius, seg[2] * radius)
        total = sum(lengths)
        out.append((word, lengths, total))
    return out


def shortest_dubins(start: Pose, end: Pose, radius: float):
    """Shortest word between two poses.  Returns (word, lengths, total)."""
    if radius <= 0:
        raise DubinsError("turning radius must be positive")
    cands = dubins_candidates(start, end, radius)
    if not cands:
        raise DubinsError("no feasible Dubins word for this waypoint pair")
    return min(cands, key=lambda c: c[2])


def _integrate(pose: Pose, seg_type: str, length: float, radius: float,
               ds: float):
    """Sample one segment every ds meters (excluding the start point)."""
    pts = []
    n = max(1, int(math.ceil(length / ds)))
    x, y, th = pose.x, pose.y, pose.theta
    for i in range(1, n + 1):
        s = min(i * ds, length)
        if seg_type == "S":
            xi = x + s * math.cos(th)
            yi = y + s * math.sin(th)
            thi = th
        else:
            sign = 1.0 if seg_type == "L" else -1.0
            dth = sign * s / radius
            xi = x + sign * radius * (math.sin(th + dth) - math.sin(th))
            yi = y - sign * radius * (math.cos(th + dth) - math.cos(th))
            thi = th + dth
        pts.append((xi, yi, wrap_angle(thi), s))
    end = Pose(pts[-1][0], pts[-1][1], pts[-1][2])
    return pts, end


@dataclass
class ReferencePath:
    """Arc-length parameterized reference with a curvature bound."""

    waypoints: list
    samples: np.ndarray  # (K, 3) poses, headings unwrapped-free (wrapped)
    arclen: np.ndarray  # (K,)
    turning_radius: float

    @property
    def length(self) -> float:
        return float(self.arclen[-1])


def dubins_reference(waypoints, turning_radius: float,
                     sample_step: float = 0.1) -> ReferencePath:
    """Concatenated shortest Dubins paths through the waypoint list."""
    wps = [w if isinstance(w, Pose) else Pose(*w) for w in waypoints]
    if len(wps) < 2:
        raise DubinsError("need at least 2 waypoints")
    if turning_radius <= 0:
        raise DubinsError("turning radius must be positive")
    samples = [(wps[0].x, wps[0].y, wps[0].theta)]
    arclen = [0.0]
    pose = wps[0]
    for target in wps[1:]:
        word, lengths, _total = shortest_dubins(pose, target, turning_radius)
        for seg_type, length in zip(word, lengths):
            if length <= 1e-12:
                continue
            pts, pose = _integrate(pose, seg_type, length, turning_radius,
                                   sample_step)
            base = arclen[-1]
            for (x, y, th, s) in pts:
                samples.append((x, y, th))
                arclen.append(base + s)
        pose = target  # snap accumulated numerics to the waypoint
    return ReferencePath(wps, np.array(samples), np.array(arclen),
                         turning_radius)
