"""Path-tracking cost data for the horizon QP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TrackingCost"]


@dataclass
class TrackingCost:
    """Quadratic tracking weights and the horizon reference.

    The state penalty is a diagonal quadratic form with the heading term
    down-weighted by ``theta_weight`` so position tracking dominates.
    ``reference_states`` has N+1 rows; ``reference_speeds`` N+1 entries
    (the last one unused by the speed penalty).
    """

    Q: float
    P: float
    reference_states: np.ndarray
    reference_speeds: np.ndarray
    theta_weight: float = 0.1

    def __post_init__(self):
        if self.Q < 0 or self.P < 0:
            raise ValueError("tracking weights must be nonnegative")
        self.reference_states = np.atleast_2d(
            np.asarray(self.reference_states, dtype=float))
        self.reference_speeds = np.asarray(
            self.reference_speeds, dtype=float).ravel()
        if self.reference_states.shape[0] != self.reference_speeds.shape[0]:
            raise ValueError("reference state/speed lengths differ")

    @property
    def horizon(self) -> int:
        return self.reference_states.shape[0] - 1

    def state_weights(self) -> np.ndarray:
        return np.array([self.Q, self.Q, self.Q * self.theta_weight])

    def evaluate(self, s: np.ndarray, u: np.ndarray) -> float:
        """C0 of a candidate trajectory (states (N+1,3), controls (N,2))."""
        w = self.state_weights()
        ds = s - self.reference_states
        cost = float(np.sum(ds * ds @ np.diag(w)))
        dv = u[:, 0] - self.reference_speeds[: u.shape[0]]
        return cost + float(self.P * np.sum(dv * dv))
