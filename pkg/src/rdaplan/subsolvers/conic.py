"""Conic-constrained least squares via accelerated projected gradient.

This is the per-obstacle block solver of the ADMM loop: minimize
``0.5 ||M x - r||^2`` over ``x = (lam, mu, z)`` with lam in its dual cone
intersected with the norm ball ``||D' lam||_2 <= 1``, mu in its dual cone,
and z >= 0.  The inner iteration runs in a compiled extension when
available; set ``RDAPLAN_PURE_PYTHON=1`` to force the pure-python kernel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..geometry import ConeKind
from . import _apg_py
from .qp import SolveReport

__all__ = ["ConicLsqProblem", "solve_conic_lsq", "project_feasible",
           "ball_decomposition", "BACKEND"]


def _select_backend():
    if os.environ.get("RDAPLAN_PURE_PYTHON", "") == "1":
        return _apg_py, "python"
    try:
        from . import _apg  # compiled extension

        return _apg, "compiled"
    except ImportError:
        return _apg_py, "python"


_kernel, BACKEND = _select_backend()


def ball_decomposition(D: np.ndarray):
    """Eigendecomposition of D D' used by the norm-ball projection."""
    D = np.asarray(D, dtype=float)
    w, V = np.linalg.eigh(D @ D.T)
    return V, np.maximum(w, 0.0)


def _kind_code(cone: ConeKind) -> int:
    return _apg_py.KIND_ORTHANT if cone.is_orthant else _apg_py.KIND_SOC


@dataclass
class ConicLsqProblem:
    """Least-squares stack with block conic structure.

    ``M`` has columns ordered (lam, mu, z); extra trailing columns beyond
    ``n_lam + n_mu`` are orthant-constrained (the slack z).
    """

    M: np.ndarray
    r: np.ndarray
    n_lam: int
    n_mu: int
    lam_cone: ConeKind
    mu_cone: ConeKind
    D: np.ndarray  # obstacle matrix defining the norm ball on lam
    warm_start: np.ndarray = None
    # precomputed eigendecomposition of D D' (reusable across solves
    # sharing the same obstacle); computed here when not supplied
    ball_V: np.ndarray = None
    ball_w: np.ndarray = None

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=float)
        self.r = np.asarray(self.r, dtype=float).ravel()
        if self.M.shape[0] != self.r.shape[0]:
            raise ValueError("M rows do not match r")
        if self.M.shape[1] < self.n_lam + self.n_mu:
            raise ValueError("M columns smaller than block sizes")
        if self.ball_V is None or self.ball_w is None:
            self.ball_V, self.ball_w = ball_decomposition(self.D)

    @property
    def n(self) -> int:
        return self.M.shape[1]


def project_feasible(problem: ConicLsqProblem, v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the feasible set of the block."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != problem.n:
        raise ValueError("vector length does not match problem")
    return np.asarray(
        _kernel.project(
            v.copy(),
            _kind_code(problem.lam_cone),
            _kind_code(problem.mu_cone),
            problem.n_lam,
            problem.n_mu,
            problem.ball_V,
            problem.ball_w,
        )
    )


def lipschitz_estimate(MtM: np.ndarray, iters: int = 60) -> float:
    """Largest eigenvalue of M'M by deterministic power iteration."""
    n = MtM.shape[0]
    v = np.ones(n) / np.sqrt(n)
    lam = 1.0
    for _ in range(iters):
        w = MtM @ v
        nw = float(np.linalg.norm(w))
        if nw < 1e-30:
            return 1.0
        v_new = w / nw
        if abs(nw - lam) <= 1e-12 * max(1.0, lam):
            lam = nw
            break
        lam = nw
        v = v_new
    return max(lam, 1e-12)


def solve_conic_lsq(problem: ConicLsqProblem, tol: float = 1e-6,
                    max_iter: int = 2000):
    """Solve the block problem.  Returns (x, SolveReport).

    The iterate is feasible at every step (projection after every gradient
    step), so the iteration-cap outcome still returns a feasible point.
    """
    MtM = problem.M.T @ problem.M
    Mtr = problem.M.T @ problem.r
    L = lipschitz_estimate(MtM)
    step = 1.0 / (1.01 * L)
    x0 = (np.zeros(problem.n) if problem.warm_start is None
          else np.asarray(problem.warm_start, dtype=float).copy())
    x, it, res = _kernel.apg_solve(
        MtM, Mtr, x0,
        _kind_code(problem.lam_cone), _kind_code(problem.mu_cone),
        problem.n_lam, problem.n_mu,
        problem.ball_V, problem.ball_w,
        step, tol, max_iter,
    )
    x = np.asarray(x)
    misfit = problem.M @ x - problem.r
    obj = float(0.5 * misfit @ misfit)
    status = "optimal" if res <= tol else "max_iter"
    return x, SolveReport(status, it, float(res), 0.0, obj)
