"""Benchmark runners: obstacle-count scaling and stopping-threshold sweep."""

from __future__ import annotations

import csv
from dataclasses import replace, dataclass

import numpy as np

from .planner import PlannerConfig
from .scenario import random_scenario
from .sim import OUTCOME_SUCCESS, run_episode

__all__ = ["benchmark_scaling", "sweep_stopping",
           "write_scaling_csv", "write_sweep_csv"]


@dataclass
class ScalingRow:
    variant: str
    M: int
    mean_ms: float
    p95_ms: float
    steps: int


@dataclass
class SweepRow:
    eps: float
    trials: int
    success_rate: float
    mean_ms: float
    mean_iters: float


def benchmark_scaling(M_list=(2, 4, 8, 16), trials: int = 2,
                      variants=("rda", "scp-obca"), steps_per_trial: int = 10,
                      seed0: int = 100, horizon: int = 20,
                      threads: int = 1,
                      field_bounds=(0.0, 30.0, -6.0, 6.0)) -> list:
    """Mean/p95 per-step compute time per (variant, obstacle count).

    Episodes are truncated to ``steps_per_trial`` control ticks; the
    comparison targets per-step cost, not full navigation.  Stopping
    thresholds are normalized per block so the iteration count does not
    itself grow with the obstacle count being scaled.
    """
    rows = []
    for variant in variants:
        for M in M_list:
            times = []
            for trial in range(trials):
                scen = random_scenario(M, seed=seed0 + trial,
                                       field_bounds=field_bounds)
                scen = replace(scen, step_budget=steps_per_trial)
                cfg = PlannerConfig(variant=variant, horizon=horizon,
                                    threads=threads,
                                    normalize_residuals=True,
                                    eps_pri=0.01, eps_dual=0.01)
                res = run_episode(scen, cfg)
                times.extend(res.compute_times)
            arr = np.asarray(times) * 1e3
            rows.append(ScalingRow(variant=variant, M=M,
                                   mean_ms=float(arr.mean()),
                                   p95_ms=float(np.percentile(arr, 95)),
                                   steps=arr.size))
    return rows


def sweep_stopping(eps_list=(0.01, 0.1, 1.0, 5.0), trials: int = 20,
                   M: int = 8, seed0: int = 300, horizon: int = 20,
                   threads: int = 1,
                   field_bounds=(0.0, 30.0, -6.0, 6.0)) -> list:
    """Success rate and compute cost across stopping thresholds."""
    rows = []
    for eps in eps_list:
        successes = 0
        times = []
        iters = []
        for trial in range(trials):
            scen = random_scenario(M, seed=seed0 + trial,
                                   field_bounds=field_bounds)
            cfg = PlannerConfig(variant="rda", horizon=horizon,
                                eps_pri=float(eps), eps_dual=float(eps),
                                threads=threads)
            res = run_episode(scen, cfg)
            if res.outcome == OUTCOME_SUCCESS:
                successes += 1
            times.extend(res.compute_times)
            iters.extend(res.rda_iterations)
        times = np.asarray(times) * 1e3
        rows.append(SweepRow(eps=float(eps), trials=trials,
                             success_rate=successes / trials,
                             mean_ms=float(times.mean()),
                             mean_iters=float(np.mean(iters))))
    return rows


def write_scaling_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["variant", "M", "mean_ms", "p95_ms", "steps"])
        for r in rows:
            w.writerow([r.variant, r.M, repr(r.mean_ms), repr(r.p95_ms),
                        r.steps])


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["eps", "trials", "success_rate", "mean_ms",
                    "mean_iters"])
        for r in rows:
            w.writerow([repr(r.eps), r.trials, repr(r.success_rate),
                        repr(r.mean_ms), repr(r.mean_iters)])
