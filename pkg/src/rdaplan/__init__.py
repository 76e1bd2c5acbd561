"""Collision-free MPC motion planning with regularized dual ADMM."""

from . import (benchmark, dubins, dynamics, geometry, outputs, planner, rda,
               scenario, sim, subsolvers, tracking)

__all__ = ["geometry", "dynamics", "dubins", "subsolvers", "tracking",
           "rda", "planner", "scenario", "sim", "outputs", "benchmark"]

__version__ = "0.1.0"
