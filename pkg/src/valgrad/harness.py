"""Experiment grid runner with CSV and SVG emission.

Runs the four benchmark problems over a list of parameter dimensions,
records per-iteration errors of the primal iterates and of the four
gradient estimators against a verified ground truth, and writes the
results as sorted CSV plus one SVG error plot per grid cell.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimators import (
    analytic_estimator,
    automatic_estimator,
    dual_estimator,
    error_trace,
    fd_oracle,
    implicit_estimator,
    oracle_primal_solve,
    run_primal,
)
from .linalg import seeded_problem_data
from .problems import closed_form_f1, make_experiment_problem
from .solvers import SolverConfig

CSV_HEADER = ["problem", "P", "solver", "estimator", "iteration", "error", "wall_ns"]

INERTIAL_OF = {"gd": "heavy_ball", "ista": "ipiasco"}
INERTIAL_SOLVERS = frozenset(INERTIAL_OF.values())


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 50
    p_list: tuple = (10, 30, 50, 70, 90)
    problems: tuple = ("f1", "f2", "f3", "f4")
    lam: float = 2.0
    gamma: float = 0.1
    delta: float = 0.1
    iterations: int = 250
    seed: int = 0
    inertia: str = "both"  # both | on | off
    cond_ratio: float = 100.0
    output_dir: str = "out"
    oracle_iterations: int = 10_000
    cross_check_tol: float = 1e-4

    def __post_init__(self):
        if self.inertia not in ("both", "on", "off"):
            raise ValueError("inertia must be both, on or off")
        if self.n < 1 or self.iterations < 0:
            raise ValueError("invalid dimensions")
        bad = [q for q in self.problems if q not in ("f1", "f2", "f3", "f4")]
        if bad:
            raise ValueError(f"unknown problems {bad}")


@dataclass(frozen=True)
class ErrorRecord:
    problem: str
    p: int
    solver: str
    estimator: str
    iteration: int
    error: float
    wall_ns: int

    def __post_init__(self):
        if self.error < 0 or not np.isfinite(self.error):
            raise ValueError("error must be finite and nonnegative")


def _sort_key(r: ErrorRecord):
    return (r.problem, r.p, r.solver, r.estimator, r.iteration)


def _cell_seed(seed: int, which: int, p: int) -> int:
    return seed * 7919 + 101 * which + p


def _ground_truth(pr, u, which, cfg):
    """Reference gradient (and minimizer if one exists) for one cell.

    The fully quadratic problem has a closed form; the others use a
    high-budget dual solve cross-checked against the central-difference
    oracle.  Returns (gradient, xstar, diagnostic); gradient is None on a
    failed cross-check.
    """
    if which == 1:
        xstar, grad = closed_form_f1(pr.a, cfg.lam, u)
        return grad, xstar, ""
    # fista, not heavy ball: the momentum variants can cycle when the dual
    # gradient is only piecewise linear, while fista converges globally
    est = dual_estimator(
        pr, u, SolverConfig(method="fista", iterations=cfg.oracle_iterations,
                            record_trace=False)
    )
    fd = fd_oracle(pr, u)
    gap = float(np.max(np.abs(est.final - fd.final)))
    if gap > cfg.cross_check_tol:
        return None, None, f"ground-truth cross-check failed: {gap:.3e}"
    xstar, _, _ = oracle_primal_solve(pr, u, max_iterations=cfg.oracle_iterations)
    return est.final, xstar, ""


def _primal_methods(which: int, inertia: str):
    base = "gd" if which in (1, 2) else "ista"
    if inertia == "off":
        return [base]
    if inertia == "on":
        return [INERTIAL_OF[base]]
    return [base, INERTIAL_OF[base]]


def _dual_method(pr, u, primal_method: str) -> str:
    base = "gd" if pr.dual_objective(u).prox_part is None else "ista"
    return INERTIAL_OF[base] if primal_method in INERTIAL_SOLVERS else base


def _series(problem, p, solver, estimator, errors, wall_ns, start_iter=0):
    return [
        ErrorRecord(problem, p, solver, estimator, start_iter + i, e, wall_ns)
        for i, e in enumerate(errors)
    ]


def run_grid(cfg: ExperimentConfig, clock=None):
    """Run the full grid; returns (records, summary).

    ``clock`` is an ns counter, injectable so tests can produce
    byte-identical CSV output; the default is the monotonic wall clock.
    """
    clock = time.perf_counter_ns if clock is None else clock
    records: list[ErrorRecord] = []
    summary = {"cells": [], "aborted": [], "dg_beats_ang": []}
    for name in cfg.problems:
        which = int(name[1])
        for p in cfg.p_list:
            a, u = seeded_problem_data(
                cfg.n, p, _cell_seed(cfg.seed, which, p), cfg.cond_ratio
            )
            pr = make_experiment_problem(which, a, cfg.lam, cfg.gamma, cfg.delta)
            truth, xstar, diag = _ground_truth(pr, u, which, cfg)
            if truth is None:
                summary["aborted"].append((name, p, diag))
                continue
            cell = _run_cell(pr, u, truth, xstar, name, p, cfg, clock)
            records.extend(cell)
            finals = {
                (r.solver, r.estimator): r.error
                for r in cell
                if r.iteration == cfg.iterations
            }
            summary["cells"].append((name, p))
            for solver in _primal_methods(which, cfg.inertia):
                dg_solver = _dual_method(pr, u, solver)
                ang = finals.get((solver, "ang"))
                dg = finals.get((dg_solver, "dg"))
                if ang is not None and dg is not None and p < cfg.n:
                    summary["dg_beats_ang"].append((name, p, solver, dg < ang))
    records.sort(key=_sort_key)
    return records, summary


def _run_cell(pr, u, truth, xstar, name, p, cfg, clock):
    out = []
    for method in _primal_methods(int(name[1]), cfg.inertia):
        t0 = clock()
        run = run_primal(pr, u, method, iterations=cfg.iterations)
        ns_run = int(clock() - t0)
        if xstar is not None:
            prim = [float(np.linalg.norm(x - xstar)) for x in run.points]
            out += _series(name, p, method, "primal", prim, ns_run)

        t0 = clock()
        ang = analytic_estimator(pr, run.points, u)
        out += _series(name, p, method, "ang", error_trace(ang, truth), int(clock() - t0))

        t0 = clock()
        aug = automatic_estimator(pr, run, u)
        out += _series(name, p, method, "aug", error_trace(aug, truth), int(clock() - t0))

        t0 = clock()
        ig = implicit_estimator(pr, run.final, u)
        out += _series(
            name, p, method, "ig", error_trace(ig, truth), int(clock() - t0),
            start_iter=cfg.iterations,
        )

        dg_method = _dual_method(pr, u, method)
        t0 = clock()
        dg = dual_estimator(pr, u, SolverConfig(method=dg_method, iterations=cfg.iterations))
        out += _series(name, p, dg_method, "dg", error_trace(dg, truth), int(clock() - t0))
    # both-inertia cells run the dual solver once per primal method; drop the
    # duplicate series so (problem, P, solver, estimator, iteration) stays unique
    seen = set()
    unique = []
    for r in out:
        key = _sort_key(r)
        if key not in seen:
            seen.add(key)
            unique.append(r)
    return unique


# ---------------------------------------------------------------------------
# CSV


def emit_csv(records, path) -> Path:
    path = Path(path)
    rows = sorted(records, key=_sort_key)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(CSV_HEADER) + "\n")
            for r in rows:
                fh.write(
                    f"{r.problem},{r.p},{r.solver},{r.estimator},"
                    f"{r.iteration},{repr(float(r.error))},{r.wall_ns}\n"
                )
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    return path


def read_csv(path) -> list[ErrorRecord]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_HEADER:
                raise ValueError(f"unexpected header in {path}: {reader.fieldnames}")
            return [
                ErrorRecord(
                    row["problem"], int(row["P"]), row["solver"], row["estimator"],
                    int(row["iteration"]), float(row["error"]), int(row["wall_ns"]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise OSError(f"failed reading {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# SVG plots (hand-rolled for byte determinism)

PLOT_COLORS = {
    "primal": "#000000",
    "ang": "#e69f00",
    "aug": "#009e73",
    "ig": "#d55e00",
    "dg": "#0072b2",
}
LOG_FLOOR = 1e-16
_W, _H = 480, 320
_ML, _MR, _MT, _MB = 52, 120, 16, 34


def _svg_cell(cell_records, title):
    series = {}
    max_iter = 0
    for r in cell_records:
        series.setdefault((r.solver, r.estimator), []).append(r)
        max_iter = max(max_iter, r.iteration)
    lo, hi = 0.0, -16.0
    for pts in series.values():
        pts.sort(key=lambda r: r.iteration)
        for r in pts:
            v = np.log10(max(r.error, LOG_FLOOR))
            lo, hi = min(lo, v), max(hi, v)
    lo, hi = float(np.floor(lo)), float(np.ceil(hi))
    if hi <= lo:
        hi = lo + 1.0
    span_x = max(max_iter, 1)

    def sx(it):
        return _ML + (_W - _ML - _MR) * it / span_x

    def sy(v):
        return _MT + (_H - _MT - _MB) * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>',
        f'<text x="{_ML}" y="12" font-family="monospace" font-size="11">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        f'stroke="#000000" stroke-width="1"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        f'stroke="#000000" stroke-width="1"/>',
        f'<text x="{_ML}" y="{_H - 18}" font-family="monospace" font-size="10">0</text>',
        f'<text x="{_W - _MR - 20}" y="{_H - 18}" font-family="monospace" '
        f'font-size="10">{span_x}</text>',
        f'<text x="4" y="{_H - _MB}" font-family="monospace" font-size="10">{lo:g}</text>',
        f'<text x="4" y="{_MT + 10}" font-family="monospace" font-size="10">{hi:g}</text>',
        f'<text x="4" y="{_H - 4}" font-family="monospace" font-size="10">'
        f'log10 error vs iteration</text>',
    ]
    legend_y = _MT + 10
    for (solver, estimator) in sorted(series):
        pts = series[(solver, estimator)]
        color = PLOT_COLORS.get(estimator, "#888888")
        dash = ' stroke-dasharray="6,3"' if solver in INERTIAL_SOLVERS else ""
        coords = " ".join(
            f"{sx(r.iteration):.2f},{sy(np.log10(max(r.error, LOG_FLOOR))):.2f}"
            for r in pts
        )
        if len(pts) == 1:
            r = pts[0]
            out.append(
                f'<circle cx="{sx(r.iteration):.2f}" '
                f'cy="{sy(np.log10(max(r.error, LOG_FLOOR))):.2f}" r="3" '
                f'fill="{color}"/>'
            )
        else:
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash}/>'
            )
        lx = _W - _MR + 8
        out.append(
            f'<line x1="{lx}" y1="{legend_y - 4}" x2="{lx + 18}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        out.append(
            f'<text x="{lx + 22}" y="{legend_y}" font-family="monospace" '
            f'font-size="10">{estimator} {solver}</text>'
        )
        legend_y += 14
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plots(records, out_dir) -> list[Path]:
    """One SVG per (problem, P) cell; returns paths written, sorted."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = {}
    for r in records:
        cells.setdefault((r.problem, r.p), []).append(r)
    paths = []
    for (problem, p) in sorted(cells):
        cell = sorted(cells[(problem, p)], key=_sort_key)
        if not cell:
            continue
        path = out_dir / f"{problem}_P{p}.svg"
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_svg_cell(cell, f"{problem} P={p}"))
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        paths.append(path)
    return paths
