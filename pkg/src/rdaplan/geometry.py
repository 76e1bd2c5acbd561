"""Convex-set representations, pose maps, and the minimum-distance oracle.

Obstacles and robot footprints are convex regions ``{p : D p <=_K b}`` where
K is either the nonnegative orthant (polygons) or a second-order cone
(disks).  The module also provides the exact minimum-distance computation
between a posed footprint and a region, which is the single source of
geometric truth for collision checks and tests, and verification of the
dual certificates that the planner produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConeKind",
    "ConvexRegion",
    "RobotFootprint",
    "Pose",
    "AffinePoseMap",
    "make_polytope",
    "make_rectangle",
    "make_ball",
    "pose_maps",
    "linearize_pose_maps",
    "min_distance",
    "dual_cone_project",
    "verify_dual_certificate",
    "max_dual_distance",
    "GeometryError",
]


class GeometryError(ValueError):
    """Degenerate or inconsistent geometric input."""


ORTHANT = "orthant"
SECOND_ORDER = "second-order"

# position extraction map: p(s) = (x, y) for s = (x, y, theta)
POSITION_MAP = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class ConeKind:
    """Cone tag for conic inequalities.

    For the second-order cone the first ``dim - 1`` components are the norm
    part and the last one is the bound.
    """

    variant: str
    dim: int = 0

    def __post_init__(self):
        if self.variant not in (ORTHANT, SECOND_ORDER):
            raise GeometryError(f"unknown cone variant: {self.variant!r}")
        if self.variant == SECOND_ORDER and self.dim < 2:
            raise GeometryError("second-order cone needs dim >= 2")

    @property
    def is_orthant(self) -> bool:
        return self.variant == ORTHANT


def cone_project(cone: ConeKind, v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the cone itself (not its dual)."""
    v = np.asarray(v, dtype=float)
    if cone.is_orthant:
        return np.maximum(v, 0.0)
    if v.shape[0] != cone.dim:
        raise GeometryError(f"vector length {v.shape[0]} != cone dim {cone.dim}")
    x, t = v[:-1], v[-1]
    nx = np.linalg.norm(x)
    if nx <= t:
        return v.copy()
    if nx <= -t:
        return np.zeros_like(v)
    alpha = 0.5 * (nx + t)
    out = np.empty_like(v)
    out[:-1] = alpha * x / nx
    out[-1] = alpha
    return out


def dual_cone_project(cone: ConeKind, v: np.ndarray) -> np.ndarray:
    """Projection onto the dual cone.

    Both supported cones are self-dual, so this coincides with projection
    onto the cone; the distinction is kept for call-site clarity.
    """
    return cone_project(cone, v)


@dataclass(frozen=True)
class ConvexRegion:
    """Compact convex set ``{o in R^2 : D o <=_K b}``."""

    D: np.ndarray
    b: np.ndarray
    cone: ConeKind
    center_hint: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if D.shape[0] != b.shape[0]:
            raise GeometryError("D row count does not match b length")
        if D.shape[1] != 2:
            raise GeometryError("regions live in the plane: D must have 2 columns")
        if not self.cone.is_orthant and self.cone.dim != D.shape[0]:
            raise GeometryError("cone dim does not match number of rows")
        if self.cone.is_orthant:
            norms = np.linalg.norm(D, axis=1)
            if np.any(norms < 1e-12):
                raise GeometryError("zero row in polytope normals")
            D = D / norms[:, None]
            b = b / norms
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "b", b)
        object.__setattr__(
            self, "center_hint", np.asarray(self.center_hint, dtype=float).ravel()
        )
        if not self._has_point():
            raise GeometryError("region is empty")

    @property
    def n_rows(self) -> int:
        return self.D.shape[0]

    def residual(self, points: np.ndarray) -> np.ndarray:
        """Cone residual b - D p (membership iff residual in cone)."""
        return self.b - np.asarray(points, dtype=float) @ self.D.T

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        r = self.b - self.D @ np.asarray(point, dtype=float)
        if self.cone.is_orthant:
            return bool(np.all(r >= -tol))
        return bool(np.linalg.norm(r[:-1]) <= r[-1] + tol)

    def translated(self, shift: np.ndarray) -> "ConvexRegion":
        """Same shape moved by ``shift`` (b picks up D @ shift)."""
        shift = np.asarray(shift, dtype=float)
        return ConvexRegion(
            self.D, self.b + self.D @ shift, self.cone, self.center_hint + shift
        )

    def circumradius(self) -> float:
        """Radius of the smallest disk about center_hint covering the set."""
        if not self.cone.is_orthant:
            # disk representation: b = (cx, cy, r)
            return float(self.b[-1])
        verts = polytope_vertices(self)
        return float(np.max(np.linalg.norm(verts - self.center_hint, axis=1)))

    def _has_point(self) -> bool:
        if self.cone.is_orthant:
            return _chebyshev_radius(self.D, self.b) > -1e-9
        return self.b[-1] > 0


@dataclass(frozen=True)
class RobotFootprint:
    """Body-frame convex shape ``{z : G z <=_K h}`` containing the origin."""

    G: np.ndarray
    h: np.ndarray
    cone: ConeKind = field(default_factory=lambda: ConeKind(ORTHANT))

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).ravel()
        if G.shape[0] != h.shape[0]:
            raise GeometryError("G row count does not match h length")
        if self.cone.is_orthant:
            norms = np.linalg.norm(G, axis=1)
            if np.any(norms < 1e-12):
                raise GeometryError("zero row in footprint normals")
            G = G / norms[:, None]
            h = h / norms
            if np.any(h < -1e-9):
                raise GeometryError("footprint must contain the body-frame origin")
        else:
            if h[-1] <= 0:
                raise GeometryError("circular footprint needs positive radius")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)

    @property
    def n_rows(self) -> int:
        return self.G.shape[0]

    def as_region(self) -> ConvexRegion:
        return ConvexRegion(self.G, self.h, self.cone)

    def circumradius(self) -> float:
        return self.as_region().circumradius()


@dataclass(frozen=True)
class Pose:
    """Planar pose (x, y, theta) with theta wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(s: np.ndarray) -> "Pose":
        return Pose(float(s[0]), float(s[1]), float(s[2]))


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class AffinePoseMap:
    """First-order model of the pose maps about a nominal heading.

    ``R(theta) = R0 + dR * (theta - nominal_theta)`` and the translation map
    is exactly linear: ``p(s) = (s[0], s[1])``.
    """

    R0: np.ndarray
    dR: np.ndarray
    nominal_theta: float

    def rotation(self, theta: float) -> np.ndarray:
        return self.R0 + (theta - self.nominal_theta) * self.dR

    @staticmethod
    def position(state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float)[:2]


def pose_maps(pose: Pose) -> tuple[np.ndarray, np.ndarray]:
    """Exact rotation matrix and translation vector of a pose."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    R = np.array([[c, -s], [s, c]])
    return R, np.array([pose.x, pose.y])


def linearize_pose_maps(nominal: Pose) -> AffinePoseMap:
    """Taylor expansion of the rotation about the nominal heading."""
    c, s = math.cos(nominal.theta), math.sin(nominal.theta)
    R0 = np.array([[c, -s], [s, c]])
    dR = np.array([[-s, -c], [c, -s]])
    return AffinePoseMap(R0=R0, dR=dR, nominal_theta=nominal.theta)


def make_polytope(vertices, center_hint=None) -> ConvexRegion:
    """Halfspace representation of the convex hull of planar points.

    Facets are ordered counterclockwise and row normals are unit length.
    Raises :class:`GeometryError` for collinear input.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise GeometryError("need at least 3 planar vertices")
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise GeometryError(f"degenerate (collinear) vertex set: {exc}") from exc
    # hull.vertices is counterclockwise in 2D
    vs = pts[hull.vertices]
    n = vs.shape[0]
    D = np.empty((n, 2))
    b = np.empty(n)
    for i in range(n):
        v0, v1 = vs[i], vs[(i + 1) % n]
        edge = v1 - v0
        normal = np.array([edge[1], -edge[0]])
        normal /= np.linalg.norm(normal)
        D[i] = normal
        b[i] = normal @ v0
    hint = np.mean(vs, axis=0) if center_hint is None else np.asarray(center_hint)
    return ConvexRegion(D, b, ConeKind(ORTHANT), hint)


def make_rectangle(center, length: float, width: float, angle: float = 0.0) -> ConvexRegion:
    """Axis length along the rectangle's ``angle`` direction."""
    if length <= 0 or width <= 0:
        raise GeometryError("rectangle dimensions must be positive")
    cx, cy = float(center[0]), float(center[1])
    c, s = math.cos(angle), math.sin(angle)
    half = np.array([[length / 2, width / 2], [-length / 2, width / 2],
                     [-length / 2, -width / 2], [length / 2, -width / 2]])
    rot = np.array([[c, -s], [s, c]])
    verts = half @ rot.T + np.array([cx, cy])
    return make_polytope(verts, center_hint=(cx, cy))


def make_ball(center, radius: float) -> ConvexRegion:
    """Disk {o : ||o - center|| <= radius} in second-order-cone form."""
    if radius <= 0:
        raise GeometryError("radius must be positive")
    center = np.asarray(center, dtype=float).ravel()
    D = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    b = np.array([center[0], center[1], float(radius)])
    return ConvexRegion(D, b, ConeKind(SECOND_ORDER, dim=3), center)


def footprint_rectangle(length: float, width: float, rear_offset: float = 0.0) -> RobotFootprint:
    """Rectangular body frame footprint.

    ``rear_offset`` shifts the reference point back from the geometric
    center (positive offset puts more body ahead of the reference, as for a
    rear-axle reference of a car).
    """
    region = make_rectangle((rear_offset, 0.0), length, width)
    return RobotFootprint(region.D, region.b)


def footprint_circle(radius: float) -> RobotFootprint:
    region = make_ball((0.0, 0.0), radius)
    return RobotFootprint(region.D, region.b, region.cone)


def polytope_vertices(region: ConvexRegion) -> np.ndarray:
    """Vertices of a polytopal region in counterclockwise order."""
    if not region.cone.is_orthant:
        raise GeometryError("vertex enumeration needs a polytope")
    D, b = region.D, region.b
    n = D.shape[0]
    verts = []
    for i in range(n):
        j = (i + 1) % n
        A = np.vstack([D[i], D[j]])
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if abs(det) < 1e-12:
            continue
        v = np.linalg.solve(A, np.array([b[i], b[j]]))
        if np.all(D @ v <= b + 1e-7):
            verts.append(v)
    if not verts:
        raise GeometryError("could not enumerate vertices")
    return np.array(verts)


def _chebyshev_radius(D: np.ndarray, b: np.ndarray) -> float:
    """Radius of the largest inscribed disk of {x : D x <= b}."""
    from scipy.optimize import linprog

    n = D.shape[1]
    # maximize r s.t. D c + r <= b
    c_obj = np.zeros(n + 1)
    c_obj[-1] = -1.0
    A_ub = np.hstack([D, np.ones((D.shape[0], 1))])
    res = linprog(c_obj, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(None, None)],
                  method="highs")
    if not res.success:
        return -np.inf
    return float(res.x[-1])


def min_distance(
    footprint: RobotFootprint,
    pose: Pose,
    region: ConvexRegion,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> float:
    """Exact minimum Euclidean distance between the posed body and a region.

    Solves the convex program  min ||R z + p - o||  over  z in the footprint
    and o in the region.  Returns 0 when the sets intersect.  This is the
    ground-truth oracle used by tests and collision checks.
    """
    R, p = pose_maps(pose)
    if not footprint.cone.is_orthant:
        # circular body: distance from its center point to the region
        r_body = float(footprint.h[-1])
        d_center = _point_region_distance(p, region, tol, max_iter)
        return max(0.0, d_center - r_body)
    if not region.cone.is_orthant:
        # disk obstacle: distance from body to center minus radius
        c_obs = region.b[:2]
        r_obs = float(region.b[-1])
        d_center = _body_point_distance(footprint, R, p, c_obs, tol, max_iter)
        return max(0.0, d_center - r_obs)
    return _polytope_pair_distance(footprint, R, p, region, tol, max_iter)


def _point_region_distance(point, region, tol, max_iter):
    if region.cone.is_orthant:
        return _projection_distance_polytope(region.D, region.b, point, tol, max_iter)
    c, r = region.b[:2], float(region.b[-1])
    return max(0.0, float(np.linalg.norm(point - c)) - r)


def _body_point_distance(footprint, R, p, target, tol, max_iter):
    # min ||R z + p - target|| over G z <= h; substitute w = R z + p
    # => G R^T (w - p) <= h, a polytope in w
    D = footprint.G @ R.T
    b = footprint.h + D @ p
    return _projection_distance_polytope(D, b, target, tol, max_iter)


def _projection_distance_polytope(D, b, point, tol, max_iter):
    """Distance from a point to {x : D x <= b} via the QP subsolver."""
    from .subsolvers.qp import QpProblem, solve_qp

    point = np.asarray(point, dtype=float)
    if np.all(D @ point <= b + 1e-12):
        return 0.0
    P = np.eye(2)
    q = -point
    prob = QpProblem(P=P, q=q, Ain=D, lin=np.full(b.shape, -np.inf), uin=b)
    x, report = solve_qp(prob, tol=tol, max_iter=max_iter)
    _check_report(report)
    return float(np.linalg.norm(x - point))


def _polytope_pair_distance(footprint, R, p, region, tol, max_iter):
    """min 0.5 ||E w + p||^2, w = (z, o), E = [R, -I]."""
    from .subsolvers.qp import QpProblem, solve_qp

    E = np.hstack([R, -np.eye(2)])
    P = E.T @ E
    q = E.T @ p
    Ain = np.zeros((footprint.n_rows + region.n_rows, 4))
    Ain[: footprint.n_rows, :2] = footprint.G
    Ain[footprint.n_rows:, 2:] = region.D
    uin = np.concatenate([footprint.h, region.b])
    prob = QpProblem(P=P, q=q, Ain=Ain, lin=np.full(uin.shape, -np.inf), uin=uin)
    w, report = solve_qp(prob, tol=tol, max_iter=max_iter)
    _check_report(report)
    d = float(np.linalg.norm(E @ w + p))
    return 0.0 if d < 1e-7 else d


def _check_report(report):
    if report.status == "infeasible":
        raise GeometryError("distance subproblem reported infeasible")
    if report.status == "max_iter":
        raise GeometryError(
            f"distance solve hit iteration cap, best objective {report.objective:.6g}"
        )


def verify_dual_certificate(
    footprint: RobotFootprint,
    pose_map: AffinePoseMap,
    state: np.ndarray,
    region: ConvexRegion,
    lam: np.ndarray,
    mu: np.ndarray,
    d: float,
    tol: float = 1e-6,
) -> tuple[bool, dict]:
    """Check the four dual-feasibility conditions certifying distance >= d.

    Returns (ok, report) where the report maps condition names to their
    violation magnitudes (0 when satisfied).
    """
    lam = np.asarray(lam, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float).ravel()
    if lam.shape[0] != region.n_rows:
        raise GeometryError("lambda length does not match region rows")
    if mu.shape[0] != footprint.n_rows:
        raise GeometryError("mu length does not match footprint rows")
    state = np.asarray(state, dtype=float)
    R = pose_map.rotation(state[2])
    p = pose_map.position(state)

    cone_viol_lam = float(np.linalg.norm(lam - dual_cone_project(region.cone, lam)))
    cone_viol_mu = float(np.linalg.norm(mu - dual_cone_project(footprint.cone, mu)))
    margin = float(lam @ (region.D @ p) - lam @ region.b - mu @ footprint.h)
    stationarity = float(np.linalg.norm(mu @ footprint.G + lam @ (region.D @ R)))
    ball = float(np.linalg.norm(region.D.T @ lam))

    report = {
        "dual_cone_lambda": cone_viol_lam,
        "dual_cone_mu": cone_viol_mu,
        "margin_shortfall": max(0.0, d - margin),
        "stationarity": stationarity,
        "ball_excess": max(0.0, ball - 1.0),
        "certified_value": margin,
    }
    ok = (
        cone_viol_lam <= tol
        and cone_viol_mu <= tol
        and margin >= d - tol
        and stationarity <= tol
        and ball <= 1.0 + tol
    )
    return ok, report


def max_dual_distance(
    footprint: RobotFootprint,
    pose: Pose,
    region: ConvexRegion,
    tol: float = 1e-7,
    max_cuts: int = 100,
) -> float:
    """Maximum of the dual distance objective over the certificate set.

    Cutting-plane scheme: the norm-ball constraint ||D^T lam||_2 <= 1 is
    outer-approximated by tangent halfspaces refined at the current iterate,
    each LP solved by scipy's HiGGS backend.  Independent of the primal
    route in :func:`min_distance`, which makes the pair a strong-duality
    cross-check.
    """
    from scipy.optimize import linprog

    if not (footprint.cone.is_orthant and region.cone.is_orthant):
        raise GeometryError("dual maximization implemented for polytope pairs")
    R, p = pose_maps(pose)
    D, b = region.D, region.b
    G, h = footprint.G, footprint.h
    l, hr = D.shape[0], G.shape[0]
    # variables x = (lam, mu); maximize lam @ (D p - b) - mu @ h
    c = np.concatenate([-(D @ p - b), h])
    A_eq = np.hstack([(D @ R).T, G.T])  # (mu G + lam D R)^T = 0, 2 rows
    b_eq = np.zeros(2)
    cuts = [np.array([math.cos(a), math.sin(a)]) for a in np.linspace(0, 2 * math.pi, 9)[:-1]]
    bounds = [(0, None)] * (l + hr)
    for _ in range(max_cuts):
        A_ub = np.array([np.concatenate([D @ g, np.zeros(hr)]) for g in cuts])
        b_ub = np.ones(len(cuts))
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs")
        if not res.success:
            raise GeometryError(f"dual LP failed: {res.message}")
        lam = res.x[:l]
        y = D.T @ lam
        ny = float(np.linalg.norm(y))
        if ny <= 1.0 + tol:
            return float(-res.fun)
        cuts.append(y / ny)
    if ny <= 1.0 + 1e-4:
        # LP precision floor reached; rescaling the certificate into the
        # ball gives a valid (marginally weaker) value
        return float(-res.fun) / ny
    raise GeometryError("cutting-plane refinement did not converge")
