"""Command-line interface.

Subcommands: ``run`` (experiment grid with CSV and SVG output), ``verify``
(dual estimator against the finite-difference oracle), ``rates``
(convergence-factor table) and ``toy`` (the three scalar counterexamples).
A flat ``key = value`` config file can override any defaults.

Exit codes: 0 success, 1 verification failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .estimators import dual_estimator, fd_oracle, run_toy
from .harness import ExperimentConfig, emit_csv, emit_plots, run_grid
from .linalg import seeded_problem_data
from .problems import ToyProblem, make_experiment_problem
from .rates import RateUnavailable, rate_report
from .solvers import SolverConfig

_CONFIG_TYPES = {
    "n": int, "p": str, "problems": str, "seed": int, "iters": int,
    "lam": float, "gamma": float, "delta": float, "cond": float,
    "out": str, "inertia": str, "tol": float, "u": float, "problem": str,
    "identity": lambda s: s.lower() in ("1", "true", "yes"),
}


def parse_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _CONFIG_TYPES[key](val)
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="valgrad",
        description="Gradient estimation for value functions of parametric convex problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file overriding defaults")
        p.add_argument("--n", type=int, default=50)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--cond", type=float, default=100.0)
        p.add_argument("--lam", "--lambda", dest="lam", type=float, default=2.0)
        p.add_argument("--gamma", type=float, default=0.1)
        p.add_argument("--delta", type=float, default=0.1)

    run_p = sub.add_parser("run", help="run the experiment grid")
    common(run_p)
    run_p.add_argument("--p", default="10,30,50,70,90", help="comma-separated P values")
    run_p.add_argument("--problems", default="f1,f2,f3,f4")
    run_p.add_argument("--iters", type=int, default=250)
    run_p.add_argument("--inertia", choices=("both", "on", "off"), default="both")
    run_p.add_argument("--out", default="out")

    ver_p = sub.add_parser("verify", help="check the dual estimator against finite differences")
    common(ver_p)
    ver_p.add_argument("--problem", default="f2")
    ver_p.add_argument("--p", type=int, default=10)
    ver_p.add_argument("--iters", type=int, default=2000)
    ver_p.add_argument("--tol", type=float, default=1e-4)

    rates_p = sub.add_parser("rates", help="print the convergence-factor table")
    common(rates_p)
    rates_p.add_argument("--problem", default="f1")
    rates_p.add_argument("--p", type=int, default=30)
    rates_p.add_argument("--identity", action="store_true", help="use A = I (square)")

    toy_p = sub.add_parser("toy", help="run the scalar counterexamples")
    toy_p.add_argument("--config", help="key = value file overriding defaults")
    toy_p.add_argument("--u", type=float, default=0.5)
    toy_p.add_argument("--iters", type=int, default=200)
    return parser


def _make_problem(args, p=None):
    which = int(args.problem[1])
    p = args.p if p is None else p
    if getattr(args, "identity", False):
        a = np.eye(args.n)
        u = seeded_problem_data(args.n, args.n, args.seed, 1.0)[1]
    else:
        a, u = seeded_problem_data(args.n, p, args.seed, args.cond)
    return make_experiment_problem(which, a, args.lam, args.gamma, args.delta), u


def _cmd_run(args) -> int:
    cfg = ExperimentConfig(
        n=args.n,
        p_list=tuple(int(s) for s in args.p.split(",")),
        problems=tuple(args.problems.split(",")),
        lam=args.lam, gamma=args.gamma, delta=args.delta,
        iterations=args.iters, seed=args.seed, inertia=args.inertia,
        cond_ratio=args.cond, output_dir=args.out,
    )
    records, summary = run_grid(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = emit_csv(records, out / "results.csv")
    plots = emit_plots(records, out / "plots")
    print(f"cells completed: {len(summary['cells'])}")
    for name, p, diag in summary["aborted"]:
        print(f"aborted {name} P={p}: {diag}")
    wins = [flag for *_, flag in summary["dg_beats_ang"]]
    if wins:
        print(f"dual beats analytic (P < N): {sum(wins)}/{len(wins)} cells")
    print(f"wrote {csv_path} and {len(plots)} plots under {out / 'plots'}")
    return 1 if summary["aborted"] else 0


def _cmd_verify(args) -> int:
    pr, u = _make_problem(args)
    dg = dual_estimator(
        pr, u, SolverConfig(method="fista", iterations=args.iters, record_trace=False)
    )
    fd = fd_oracle(pr, u)
    disc = float(np.max(np.abs(dg.final - fd.final)))
    print(f"max-abs discrepancy dual vs finite differences: {disc:.6e}")
    if fd.flagged:
        print("warning: an inner oracle solve did not converge")
    return 0 if disc <= args.tol else 1


def _fmt_rate(r) -> str:
    if isinstance(r, RateUnavailable):
        return f"unavailable ({r.reason})"
    return f"{r:.10f}"


def _cmd_rates(args) -> int:
    pr, _ = _make_problem(args)
    rr = rate_report(pr)
    print(f"problem {args.problem}, N={pr.n}, P={pr.p}")
    print(f"omega_p     = {_fmt_rate(rr.omega_p)}")
    print(f"omega_d     = {_fmt_rate(rr.omega_d)}")
    print(f"omega_cg    = {_fmt_rate(rr.omega_cg)}")
    print(f"omega_ista  = {_fmt_rate(rr.omega_ista)}")
    print(f"omega_fista = {_fmt_rate(rr.omega_fista)}")
    pd = rr.omega_pdhg
    if pd.omega is None:
        print(f"omega_pdhg  = regime: {pd.regime}")
    else:
        print(f"omega_pdhg  = {pd.omega:.10f} (regime: {pd.regime})")
    return 0


def _cmd_toy(args) -> int:
    rows = []
    for kind in ToyProblem.KINDS:
        u = args.u if kind != "interval_quadratic" else min(args.u, 0.9)
        run = run_toy(ToyProblem(kind), u, iterations=args.iters)
        _, _, dp = run.truth
        rows.append(
            (kind, run.analytic[-1], run.automatic[-1], run.implicit[-1],
             run.dual[-1] if run.dual is not None else float("nan"), dp)
        )
    print(f"{'example':<22}{'analytic':>12}{'automatic':>12}{'implicit':>12}"
          f"{'dual':>12}{'truth':>12}")
    for kind, ang, aug, ig, dg, dp in rows:
        print(f"{kind:<22}{ang:>12.6f}{aug:>12.6f}{ig:>12.6f}{dg:>12.6f}{dp:>12.6f}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    # apply config-file values as defaults so explicit flags still win
    if "--config" in argv:
        try:
            cfg_path = argv[argv.index("--config") + 1]
        except IndexError:
            parser.error("--config needs a path")
        try:
            overrides = parse_config(cfg_path)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**{
                k: v for k, v in overrides.items()
                if any(a.dest == k for a in action._actions)
            })
    args = parser.parse_args(argv)
    handler = {
        "run": _cmd_run, "verify": _cmd_verify, "rates": _cmd_rates, "toy": _cmd_toy,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
