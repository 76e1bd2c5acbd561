"""Compare the compiled block-solver kernel against the pure-python one.

Runs the same batch of conic least-squares blocks (the inner loop of the
planner) and a short planning episode under both backends and reports
wall-clock times.  The pure-python run happens in a subprocess with
RDAPLAN_PURE_PYTHON=1 because the backend is chosen at import time.

Usage:  python3 benchmarks/backend_bench.py
"""

import json
import os
import subprocess
import sys
import time


def run_workload():
    import numpy as np

    from rdaplan.geometry import ConeKind, make_polytope
    from rdaplan.planner import PlannerConfig
    from rdaplan.scenario import random_scenario
    from rdaplan.sim import run_episode
    from rdaplan.subsolvers import conic

    rng = np.random.default_rng(0)
    square = make_polytope([[0, 0], [1, 0], [1, 1], [0, 1]])
    orth4 = ConeKind("orthant", 4)
    problems = []
    for _ in range(500):
        problems.append(conic.ConicLsqProblem(
            M=rng.normal(size=(3, 9)), r=rng.normal(size=3),
            n_lam=4, n_mu=4, lam_cone=orth4, mu_cone=orth4, D=square.D))

    t0 = time.perf_counter()
    for prob in problems:
        conic.solve_conic_lsq(prob)
    block_s = time.perf_counter() - t0

    import dataclasses
    scen = random_scenario(6, seed=5, field_bounds=(0.0, 20.0, -5.0, 5.0))
    scen = dataclasses.replace(scen, step_budget=10)
    t0 = time.perf_counter()
    result = run_episode(scen, PlannerConfig(horizon=15))
    episode_s = time.perf_counter() - t0

    return {"backend": conic.BACKEND,
            "blocks_500_s": round(block_s, 4),
            "episode_outcome": result.outcome,
            "episode_steps": len(result.steps),
            "episode_s": round(episode_s, 4)}


def main():
    here = os.path.abspath(__file__)
    rows = [run_workload()]
    env = dict(os.environ, RDAPLAN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, here, "--worker"], env=env,
                         capture_output=True, text=True, check=True)
    rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    print(f"{'backend':10s} {'500 blocks':>12s} {'episode':>10s} "
          f"{'steps':>6s} {'outcome':>10s}")
    for r in rows:
        print(f"{r['backend']:10s} {r['blocks_500_s']:11.3f}s "
              f"{r['episode_s']:9.3f}s {r['episode_steps']:6d} "
              f"{r['episode_outcome']:>10s}")
    if rows[0]["backend"] == rows[1]["backend"]:
        print("note: compiled extension unavailable; both runs used the "
              "python kernel")
    else:
        speedup = rows[1]["blocks_500_s"] / rows[0]["blocks_500_s"]
        print(f"block-solver speedup: {speedup:.1f}x")


if __name__ == "__main__":
    if "--worker" in sys.argv:
        print(json.dumps(run_workload()))
    else:
        main()
