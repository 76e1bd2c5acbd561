import textwrap

import numpy as np
import pytest

from rdaplan.cli import main
from rdaplan.outputs import (emit_outputs, read_trajectory_csv,
                             write_convergence_svg, write_metrics_csv,
                             write_trajectory_csv, write_trajectory_svg)
from rdaplan.planner import PlannerConfig
from rdaplan.scenario import load_scenario
from rdaplan.sim import run_episode

from test_scenario_sim import MINIMAL, write_scn

OBSTACLE_SCN = MINIMAL.replace("obstacles: []", textwrap.dedent("""\
    obstacles:
      - shape: circle
        center: [6.0, 1.8]
        radius: 0.8
      - shape: polygon
        vertices: [[4.0, -3.0], [5.5, -3.0], [5.5, -1.9], [4.0, -1.9]]
    """).rstrip())


@pytest.fixture(scope="module")
def episode(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("scn")
    scen = load_scenario(write_scn(tmp, OBSTACLE_SCN))
    result = run_episode(scen, PlannerConfig(horizon=15),
                         keep_predictions_every=5)
    assert result.outcome == "success"
    return scen, result


# ------------------------------------------------------------- csv


def test_trajectory_csv_round_trip(episode, tmp_path):
    scen, result = episode
    out = tmp_path / "traj.csv"
    write_trajectory_csv(result, out)
    header = out.read_text().splitlines()[0]
    assert header == ("step,t_sim,x,y,theta,v,psi,min_clearance,"
                      "solver_iters,compute_ms,outcome_flag")
    records = read_trajectory_csv(out)
    assert len(records) == len(result.steps)
    for a, b in zip(records, result.steps):
        # floats survive the text round trip bit-exactly
        assert a.x == b.x and a.y == b.y and a.theta == b.theta
        assert a.v == b.v and a.psi == b.psi
        assert a.min_clearance == b.min_clearance
        assert a.solver_iters == b.solver_iters
        assert a.outcome_flag == b.outcome_flag


def test_metrics_csv(episode, tmp_path):
    scen, result = episode
    out = tmp_path / "metrics.csv"
    write_metrics_csv([result], out)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("scenario,variant,outcome")
    assert len(lines) == 2
    assert lines[1].startswith("mini,")
    assert ",success," in lines[1]
    # empty result list still writes the header
    write_metrics_csv([], tmp_path / "empty.csv")
    assert (tmp_path / "empty.csv").read_text().splitlines()[0] == lines[0]


# ------------------------------------------------------------- svg


def test_trajectory_svg_content(episode, tmp_path):
    scen, result = episode
    out = tmp_path / "traj.svg"
    write_trajectory_svg(result, scen, out)
    svg = out.read_text()
    assert svg.startswith("<svg") or "<svg" in svg
    assert svg.count("<circle") >= 3  # obstacle disk + start/goal markers
    assert "<polygon" in svg  # polygon obstacle
    assert "<polyline" in svg  # executed / reference curves
    assert "mini" in svg


def test_convergence_svg_content(episode, tmp_path):
    scen, result = episode
    out = tmp_path / "conv.svg"
    write_convergence_svg(result, out)
    svg = out.read_text()
    assert "<svg" in svg and "<polyline" in svg


def test_emit_outputs_bundle(episode, tmp_path):
    scen, result = episode
    files = emit_outputs([result], [scen], tmp_path / "out")
    names = sorted(f.split("/")[-1] for f in map(str, files))
    assert any(n.endswith(".csv") for n in names)
    assert any(n.endswith(".svg") for n in names)
    for f in files:
        assert (tmp_path / "out").joinpath(str(f).split("/")[-1]).exists()


# ------------------------------------------------------------- cli


def test_cli_solve(tmp_path, capsys):
    scn = write_scn(tmp_path, OBSTACLE_SCN)
    rc = main(["solve", "--scenario", str(scn), "--out-dir",
               str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "u0 =" in out and "iterations" in out
    assert (tmp_path / "out" / "prediction.csv").exists()


def test_cli_simulate(tmp_path, capsys):
    scn = write_scn(tmp_path, MINIMAL)
    rc = main(["simulate", "--scenario", str(scn), "--horizon", "15",
               "--out-dir", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "outcome = success" in out
    written = list((tmp_path / "out").iterdir())
    assert any(p.suffix == ".csv" for p in written)
    assert any(p.suffix == ".svg" for p in written)


def test_cli_missing_scenario_exit_code(capsys):
    rc = main(["simulate", "--scenario", "/nonexistent.scn"])
    assert rc == 2
    assert "scenario error" in capsys.readouterr().err


def test_cli_bad_scenario_exit_code(tmp_path, capsys):
    scn = write_scn(tmp_path, MINIMAL.replace("  shape: rectangle\n", ""))
    rc = main(["solve", "--scenario", str(scn)])
    assert rc == 2


def test_cli_benchmark_tiny(tmp_path, capsys):
    rc = main(["benchmark", "--obstacles", "2", "--trials", "1",
               "--steps", "2", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "scaling.csv").exists()
    text = (tmp_path / "scaling.csv").read_text()
    assert text.startswith("variant,M,mean_ms")


def test_cli_plot_round_trip(tmp_path, episode):
    scen, result = episode
    scn = write_scn(tmp_path, OBSTACLE_SCN)
    traj = tmp_path / "traj.csv"
    write_trajectory_csv(result, traj)
    rc = main(["plot", "--scenario", str(scn), "--trajectory", str(traj),
               "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "mini_replot.svg").exists()


def test_cli_pure_python_backend_subprocess(tmp_path):
    import os
    import subprocess
    import sys

    scn = write_scn(tmp_path, MINIMAL.replace("step_budget: 120",
                                              "step_budget: 40"))
    env = dict(os.environ, RDAPLAN_PURE_PYTHON="1")
    code = ("import rdaplan.subsolvers.conic as c; "
            "from rdaplan.cli import main; import sys; "
            "assert c.BACKEND == 'python', c.BACKEND; "
            f"sys.exit(main(['solve', '--scenario', r'{scn}']))")
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "u0 =" in proc.stdout
