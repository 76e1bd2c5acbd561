from .qp import QpProblem, SolveReport, solve_qp
from .conic import ConicLsqProblem, project_feasible, solve_conic_lsq

__all__ = [
    "QpProblem",
    "SolveReport",
    "solve_qp",
    "ConicLsqProblem",
    "solve_conic_lsq",
    "project_feasible",
]
