"""File outputs: trajectory/metrics CSV and hand-rolled SVG overlays.

Floats in the trajectory CSV are written with ``repr`` so a re-parse
recovers bit-identical values.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .dubins import dubins_reference
from .geometry import polytope_vertices
from .sim import EpisodeResult, StepRecord

__all__ = ["write_trajectory_csv", "read_trajectory_csv",
           "write_metrics_csv", "write_trajectory_svg",
           "write_convergence_svg", "emit_outputs"]

TRAJECTORY_COLUMNS = ["step", "t_sim", "x", "y", "theta", "v", "psi",
                      "min_clearance", "solver_iters", "compute_ms",
                      "outcome_flag"]

METRIC_COLUMNS = ["scenario", "variant", "outcome", "steps",
                  "navigation_time", "min_clearance", "mean_compute_ms",
                  "p95_compute_ms", "mean_solver_iters"]


def write_trajectory_csv(result: EpisodeResult, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRAJECTORY_COLUMNS)
        for rec in result.steps:
            # repr of a builtin float round-trips bit-exactly
            w.writerow([rec.step, repr(float(rec.t_sim)), repr(float(rec.x)),
                        repr(float(rec.y)), repr(float(rec.theta)),
                        repr(float(rec.v)), repr(float(rec.psi)),
                        repr(float(rec.min_clearance)), rec.solver_iters,
                        repr(float(rec.compute_ms)), rec.outcome_flag])


def read_trajectory_csv(path):
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != TRAJECTORY_COLUMNS:
            raise ValueError("unexpected trajectory CSV header")
        for row in reader:
            out.append(StepRecord(
                step=int(row["step"]), t_sim=float(row["t_sim"]),
                x=float(row["x"]), y=float(row["y"]),
                theta=float(row["theta"]), v=float(row["v"]),
                psi=float(row["psi"]),
                min_clearance=float(row["min_clearance"]),
                solver_iters=int(row["solver_iters"]),
                compute_ms=float(row["compute_ms"]),
                outcome_flag=int(row["outcome_flag"])))
    return out


def write_metrics_csv(results, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(METRIC_COLUMNS)
        for res in results:
            times = np.asarray(res.compute_times) * 1e3
            iters = np.asarray(res.rda_iterations, dtype=float)
            w.writerow([
                res.scenario_name, res.variant, res.outcome, len(res.steps),
                repr(res.navigation_time), repr(float(res.min_clearance)),
                repr(float(times.mean()) if times.size else 0.0),
                repr(float(np.percentile(times, 95)) if times.size else 0.0),
                repr(float(iters.mean()) if iters.size else 0.0),
            ])


# -- SVG ----------------------------------------------------------------------

_SVG_W = 900
_MARGIN = 2.0


def _world_to_svg(bbox, height):
    x_lo, x_hi, y_lo, y_hi = bbox
    scale = _SVG_W / (x_hi - x_lo)

    def conv(x, y):
        return ((x - x_lo) * scale, height - (y - y_lo) * scale)
    return conv, scale


def _polyline(points, conv, stroke, width, dash=None, fill="none"):
    pts = " ".join("%.2f,%.2f" % conv(x, y) for x, y in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{width}"{dash_attr}/>')


def _region_svg(region, conv, scale):
    if region.cone.is_orthant:
        verts = polytope_vertices(region)
        pts = " ".join("%.2f,%.2f" % conv(x, y) for x, y in verts)
        return (f'<polygon points="{pts}" fill="#b0b4bc" '
                f'stroke="#555" stroke-width="1"/>')
    cx, cy = conv(*region.center_hint)
    r = float(region.b[-1]) * scale
    return (f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
            f'fill="#b0b4bc" stroke="#555" stroke-width="1"/>')


def write_trajectory_svg(result: EpisodeResult, scenario, path):
    """Obstacles, reference path, executed path, sampled horizon predictions."""
    ref = dubins_reference(scenario.waypoints, scenario.turning_radius)
    xs = [p[0] for p in result.trajectory] + list(ref.samples[:, 0])
    ys = [p[1] for p in result.trajectory] + list(ref.samples[:, 1])
    for region in scenario.obstacles:
        if region.cone.is_orthant:
            verts = polytope_vertices(region)
            xs += list(verts[:, 0])
            ys += list(verts[:, 1])
        else:
            cx, cy = region.center_hint
            r = float(region.b[-1])
            xs += [cx - r, cx + r]
            ys += [cy - r, cy + r]
    bbox = (min(xs) - _MARGIN, max(xs) + _MARGIN,
            min(ys) - _MARGIN, max(ys) + _MARGIN)
    height = _SVG_W * (bbox[3] - bbox[2]) / (bbox[1] - bbox[0])
    conv, scale = _world_to_svg(bbox, height)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{_SVG_W}" height="{height:.0f}" '
             f'viewBox="0 0 {_SVG_W} {height:.0f}">',
             f'<rect width="{_SVG_W}" height="{height:.0f}" fill="white"/>']
    for region in scenario.obstacles:
        parts.append(_region_svg(region, conv, scale))
    parts.append(_polyline(ref.samples[:, :2], conv, "#888", 1.5, dash="6,4"))
    for step in sorted(result.predictions):
        parts.append(_polyline(result.predictions[step][:, :2], conv,
                               "#6baed6", 1.0))
    parts.append(_polyline(result.trajectory[:, :2], conv, "#d62728", 2.5))
    sx, sy = conv(scenario.start.x, scenario.start.y)
    gx, gy = conv(scenario.goal.x, scenario.goal.y)
    parts.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="5" fill="#2ca02c"/>')
    parts.append(f'<circle cx="{gx:.2f}" cy="{gy:.2f}" r="5" fill="#9467bd"/>')
    parts.append(f'<text x="8" y="16" font-size="13" fill="#333">'
                 f'{scenario.name} | {result.variant} | {result.outcome} | '
                 f'min clearance '
                 f'{result.min_clearance:.3f} m</text>')
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def write_convergence_svg(result: EpisodeResult, path):
    """Log-scale residual curves for the sampled MPC steps."""
    traces = {k: v for k, v in result.residual_traces.items() if v}
    w, h, pad = _SVG_W, 400, 40
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" '
             f'height="{h}" viewBox="0 0 {w} {h}">',
             f'<rect width="{w}" height="{h}" fill="white"/>']
    if traces:
        max_len = max(len(v) for v in traces.values())
        vals = [max(p, 1e-12) for v in traces.values() for pair in v
                for p in pair]
        lo, hi = math.log10(min(vals)), math.log10(max(max(vals), 1e-11))
        span = max(hi - lo, 1e-9)

        def conv(i, val):
            x = pad + (w - 2 * pad) * (i / max(max_len - 1, 1))
            y = h - pad - (h - 2 * pad) * \
                ((math.log10(max(val, 1e-12)) - lo) / span)
            return x, y
        colors = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b",
                  "#e377c2"]
        for ci, step in enumerate(sorted(traces)):
            hist = traces[step]
            col = colors[ci % len(colors)]
            parts.append(_polyline([conv(i, p) for i, (p, _)
                                    in enumerate(hist)],
                                   lambda x, y: (x, y), col, 1.5))
            parts.append(_polyline([conv(i, d) for i, (_, d)
                                    in enumerate(hist)],
                                   lambda x, y: (x, y), col, 1.5, dash="4,3"))
            parts.append(f'<text x="{w - pad - 90}" '
                         f'y="{pad + 14 * ci}" font-size="11" '
                         f'fill="{col}">step {step}</text>')
    parts.append(f'<text x="8" y="16" font-size="13" fill="#333">'
                 f'residuals per ADMM iteration '
                 f'(solid: primal, dashed: dual, log scale)</text>')
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def emit_outputs(results, scenarios, out_dir):
    """Write per-episode trajectory CSV/SVGs plus one combined metrics CSV."""
    os.makedirs(out_dir, exist_ok=True)
    results = list(results)
    scenarios = list(scenarios)
    written = []
    for res, scen in zip(results, scenarios):
        stem = f"{res.scenario_name}_{res.variant}"
        traj = os.path.join(out_dir, stem + "_trajectory.csv")
        write_trajectory_csv(res, traj)
        svg = os.path.join(out_dir, stem + ".svg")
        write_trajectory_svg(res, scen, svg)
        conv = os.path.join(out_dir, stem + "_convergence.svg")
        write_convergence_svg(res, conv)
        written += [traj, svg, conv]
    metrics = os.path.join(out_dir, "metrics.csv")
    write_metrics_csv(results, metrics)
    written.append(metrics)
    return written
