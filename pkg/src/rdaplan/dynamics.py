"""Ackermann kinematics: exact stepping, per-step affine models, bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, wrap_angle

__all__ = [
    "AckermannParams",
    "ControlInput",
    "ControlBounds",
    "LinearizedDynamics",
    "step_exact",
    "linearize",
    "linearization_error",
    "check_bounds",
]


@dataclass(frozen=True)
class AckermannParams:
    L: float  # wheelbase, meters
    dt: float  # slot length, seconds
    psi_max: float = math.pi / 4

    def __post_init__(self):
        if self.L <= 0 or self.dt <= 0:
            raise ValueError("wheelbase and slot length must be positive")


@dataclass(frozen=True)
class ControlInput:
    v: float  # linear speed, m/s
    psi: float  # steering angle, rad

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.psi])

    @staticmethod
    def from_array(u) -> "ControlInput":
        return ControlInput(float(u[0]), float(u[1]))


@dataclass(frozen=True)
class ControlBounds:
    u_min: ControlInput
    u_max: ControlInput
    a_min: ControlInput  # per-step slew lower limit
    a_max: ControlInput  # per-step slew upper limit

    def __post_init__(self):
        lo, hi = self.u_min.as_array(), self.u_max.as_array()
        if np.any(lo > hi):
            raise ValueError("u_min must be componentwise <= u_max")
        alo, ahi = self.a_min.as_array(), self.a_max.as_array()
        if np.any(alo > 0) or np.any(ahi < 0):
            raise ValueError("slew limits must bracket zero")

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u_min.as_array(), self.u_max.as_array()

    def slew(self) -> tuple[np.ndarray, np.ndarray]:
        return self.a_min.as_array(), self.a_max.as_array()


@dataclass(frozen=True)
class LinearizedDynamics:
    """One-step affine model s' = A s + B u + c about a nominal pair."""

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    nominal_state: np.ndarray
    nominal_control: ControlInput


def _check_steering(psi: float):
    if abs(psi) >= math.pi / 2:
        raise ValueError(f"steering angle {psi} at or beyond the tan singularity")


def step_exact(state: Pose, u: ControlInput, params: AckermannParams) -> Pose:
    """s + f(s, u) dt with f = (v cos th, v sin th, v tan psi / L)."""
    _check_steering(u.psi)
    dt = params.dt
    return Pose(
        state.x + u.v * math.cos(state.theta) * dt,
        state.y + u.v * math.sin(state.theta) * dt,
        wrap_angle(state.theta + u.v * math.tan(u.psi) / params.L * dt),
    )


def linearize(nominal_state: Pose, nominal_u: ControlInput,
              params: AckermannParams) -> LinearizedDynamics:
    """First-order expansion of the discrete step about the nominal pair."""
    _check_steering(nominal_u.psi)
    dt, L = params.dt, params.L
    th, v, psi = nominal_state.theta, nominal_u.v, nominal_u.psi
    c_th, s_th = math.cos(th), math.sin(th)
    cos2 = math.cos(psi) ** 2
    A = np.array([
        [1.0, 0.0, -v * s_th * dt],
        [0.0, 1.0, v * c_th * dt],
        [0.0, 0.0, 1.0],
    ])
    B = np.array([
        [c_th * dt, 0.0],
        [s_th * dt, 0.0],
        [math.tan(psi) * dt / L, v * dt / (L * cos2)],
    ])
    c = np.array([
        th * v * s_th * dt,
        -th * v * c_th * dt,
        -psi * v * dt / (L * cos2),
    ])
    return LinearizedDynamics(A, B, c, nominal_state.as_array(), nominal_u)


def linearization_error(reference_controls, start: Pose,
                        params: AckermannParams) -> np.ndarray:
    """Per-step position gap between exact and relinearized stepping.

    Each step uses the affine model expanded at the previous step's exact
    state and control, applied to the current exact state, and compares the
    predicted next position to the exact one.
    """
    controls = list(reference_controls)
    errors = np.zeros(len(controls))
    state = start
    prev_state, prev_u = start, controls[0] if controls else None
    for t, u in enumerate(controls):
        lin = linearize(prev_state, prev_u, params)
        s_pred = lin.A @ state.as_array() + lin.B @ u.as_array() + lin.c
        s_next = step_exact(state, u, params)
        errors[t] = math.hypot(s_pred[0] - s_next.x, s_pred[1] - s_next.y)
        prev_state, prev_u = state, u
        state = s_next
    return errors


def check_bounds(u_seq, bounds: ControlBounds, u_prev: ControlInput = None,
                 tol: float = 1e-9):
    """Verify box and slew constraints.  Returns (ok, first_violation)."""
    lo, hi = bounds.box()
    alo, ahi = bounds.slew()
    seq = [u.as_array() for u in u_seq]
    prev = u_prev.as_array() if u_prev is not None else None
    for i, u in enumerate(seq):
        if np.any(u < lo - tol) or np.any(u > hi + tol):
            return False, ("box", i)
        if prev is not None:
            du = u - prev
            if np.any(du < alo - tol) or np.any(du > ahi + tol):
                return False, ("slew", i)
        prev = u
    return True, None
