"""Command-line interface.

Exit codes: 0 success, 2 scenario error, 3 solver error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import rda
from .benchmark import (benchmark_scaling, sweep_stopping, write_scaling_csv,
                        write_sweep_csv)
from .dubins import dubins_reference
from .dynamics import ControlInput
from .outputs import (emit_outputs, read_trajectory_csv, write_metrics_csv,
                      write_trajectory_svg)
from .planner import VARIANTS, Planner, PlannerConfig, WorldState
from .scenario import ScenarioError, load_scenario
from .sim import EpisodeResult, run_episode

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_SOLVER = 3


def _add_planner_flags(p):
    p.add_argument("--planner", default="rda", choices=VARIANTS)
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--eta", type=float, default=10.0)
    p.add_argument("--rho", type=float, default=10.0)
    p.add_argument("--eps-pri", type=float, default=0.5)
    p.add_argument("--eps-dual", type=float, default=0.5)
    p.add_argument("--d-min", type=float, default=0.1)
    p.add_argument("--d-max", type=float, default=1.0)
    p.add_argument("--d-safe", type=float, default=0.5)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--warm-start", choices=("on", "off"), default="on")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("RDAPLAN_THREADS", "1")))


def _config_from(args) -> PlannerConfig:
    return PlannerConfig(
        variant=args.planner, horizon=args.horizon, eta=args.eta,
        rho=args.rho, eps_pri=args.eps_pri, eps_dual=args.eps_dual,
        d_min=args.d_min, d_max=args.d_max, d_safe=args.d_safe,
        max_iters=args.max_iters, warm_start=args.warm_start == "on",
        threads=args.threads)


def _cmd_solve(args) -> int:
    scen = load_scenario(args.scenario)
    config = _config_from(args)
    path = dubins_reference(scen.waypoints, scen.turning_radius)
    planner = Planner(config, scen.footprint, scen.params, scen.bounds,
                      path, scen.goal, scen.v_ref)
    world = WorldState(pose=scen.start, u_prev=ControlInput(0.0, 0.0),
                       obstacles=scen.obstacles,
                       obstacle_velocities=scen.obstacle_velocities)
    u0, pred, diag, _carry = planner.mpc_step(world)
    if diag["error"] is not None:
        print("solver error:", diag["error"], file=sys.stderr)
        return EXIT_SOLVER
    print(f"u0 = ({u0.v:.4f} m/s, {u0.psi:.4f} rad)")
    print(f"iterations = {diag['iterations']}, converged = "
          f"{diag['converged']}")
    print(f"residuals: primal = {diag['pri']:.3e}, dual = "
          f"{diag['dual']:.3e}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        out = os.path.join(args.out_dir, "prediction.csv")
        np.savetxt(out, pred, delimiter=",", header="x,y,theta", comments="")
        print("wrote", out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scen = load_scenario(args.scenario)
    config = _config_from(args)
    result = run_episode(scen, config)
    print(f"outcome = {result.outcome}")
    print(f"steps = {len(result.steps)}, sim time = "
          f"{result.navigation_time:.1f} s")
    print(f"min clearance = {result.min_clearance:.4f} m")
    if result.rda_iterations:
        print(f"mean solver iterations = "
              f"{np.mean(result.rda_iterations):.2f}")
    if args.out_dir:
        for f in emit_outputs([result], [scen], args.out_dir):
            print("wrote", f)
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    rows = benchmark_scaling(M_list=tuple(args.obstacles),
                             trials=args.trials,
                             steps_per_trial=args.steps,
                             seed0=args.seed, threads=args.threads)
    for r in rows:
        print(f"{r.variant:10s} M={r.M:3d} mean={r.mean_ms:9.2f} ms "
              f"p95={r.p95_ms:9.2f} ms ({r.steps} steps)")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        out = os.path.join(args.out_dir, "scaling.csv")
        write_scaling_csv(rows, out)
        print("wrote", out)
    return EXIT_OK


def _cmd_sweep_stop(args) -> int:
    rows = sweep_stopping(eps_list=tuple(args.eps), trials=args.trials,
                          seed0=args.seed, threads=args.threads)
    for r in rows:
        print(f"eps={r.eps:6.2f} success={r.success_rate:5.2f} "
              f"mean={r.mean_ms:8.2f} ms mean_iters={r.mean_iters:6.2f}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        out = os.path.join(args.out_dir, "sweep_stop.csv")
        write_sweep_csv(rows, out)
        print("wrote", out)
    return EXIT_OK


def _cmd_plot(args) -> int:
    scen = load_scenario(args.scenario)
    records = read_trajectory_csv(args.trajectory)
    traj = np.array([[scen.start.x, scen.start.y, scen.start.theta]]
                    + [[r.x, r.y, r.theta] for r in records])
    flags = {1: "success", 2: "collision", 3: "stuck", 4: "budget-exhausted"}
    outcome = flags.get(records[-1].outcome_flag if records else 0,
                        "budget-exhausted")
    clear = min((r.min_clearance for r in records), default=float("inf"))
    result = EpisodeResult(
        outcome=outcome, navigation_time=records[-1].t_sim if records else 0.0,
        steps=records, trajectory=traj, min_clearance=clear,
        rda_iterations=[r.solver_iters for r in records],
        compute_times=[r.compute_ms / 1e3 for r in records],
        scenario_name=scen.name, variant=args.planner)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, scen.name + "_replot.svg")
    write_trajectory_svg(result, scen, out)
    print("wrote", out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rdaplan",
        description="Collision-free MPC planning benchmarks (dual-ADMM "
                    "planner plus baselines)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="one-shot horizon solve from a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", default=None)
    _add_planner_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="run one full episode")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", default=None)
    _add_planner_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("benchmark", help="obstacle-count scaling benchmark")
    p.add_argument("--obstacles", type=int, nargs="+", default=[2, 4, 8, 16])
    p.add_argument("--trials", type=int, default=2)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--seed", type=int, default=100)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("RDAPLAN_THREADS", "1")))
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("sweep-stop", help="stopping-threshold sweep")
    p.add_argument("--eps", type=float, nargs="+",
                   default=[0.01, 0.1, 1.0, 5.0])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=300)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("RDAPLAN_THREADS", "1")))
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_sweep_stop)

    p = sub.add_parser("plot", help="re-render an SVG from a trajectory CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--planner", default="rda")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=_cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print("scenario error:", exc, file=sys.stderr)
        return EXIT_SCENARIO
    except rda.RdaInfeasibleError as exc:
        print("solver error:", exc, file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
