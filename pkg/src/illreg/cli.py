"""Command-line interface.

Six subcommands: problem, solve, mc, rules, verify, curve. Each writes a
delimited report (schema-stamped CSV, or JSON for problems) to --out and, by
default, renders a companion PNG next to it; --no-fig suppresses the figure.
Exit codes: 0 success, 2 input error, 3 a verify check failed its bound.

Problems are referenced either as generator shorthand "name:n" (shaw, baart,
heat) or as a path to a problem JSON file; loaded files are re-scaled, which
is a no-op for files this package wrote.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import figures, filters, mc, rules, theory
from .core import (CSV_STAMP, Problem, compute_svd, load_problem, save_problem,
                   scale_problem)
from .problems import GENERATORS, SpectrumDecay, SyntheticSource, gen_diag_synthetic


def _fig_path(out) -> Path:
    return Path(out).with_suffix(".png")


def _resolve_problem(token: str) -> Problem:
    if ":" in token:
        name, _, size = token.partition(":")
        if name not in GENERATORS:
            raise ValueError(f"unknown problem {name!r}; use shaw/baart/heat or a JSON path")
        return GENERATORS[name](int(size))
    prob = load_problem(token)
    rescaled = scale_problem(prob.name, prob.A, prob.x_true, prob.y_exact)
    return Problem(name=prob.name, A=rescaled.A, x_true=rescaled.x_true,
                   y_exact=rescaled.y_exact, scale=prob.scale * rescaled.scale)


def _parse_pair(text: str, what: str, kinds) -> tuple:
    kind, sep, value = text.partition(":")
    if not sep or kind not in kinds:
        raise ValueError(f"{what} must look like {'|'.join(kinds)}:<number>; got {text!r}")
    return kind, float(value)


def _write_csv(path, schema: str, header: str, rows) -> None:
    lines = [CSV_STAMP + schema, header]
    for row in rows:
        lines.append(",".join(repr(c) if isinstance(c, float) else str(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_problem(args) -> int:
    if args.name == "diag":
        decay = SpectrumDecay(*_parse_pair(args.decay, "--decay", ("exponential", "polynomial")))
        kind, index = _parse_pair(args.source, "--source", ("holder", "logarithmic"))
        problem = gen_diag_synthetic(args.n, decay,
                                     SyntheticSource(kind, index, rho=args.rho, seed=args.seed))
    else:
        problem = GENERATORS[args.name](args.n)
    save_problem(problem, args.out)
    if not args.no_fig:
        figures.save_problem_figure(problem, compute_svd(problem.A), _fig_path(args.out))
    print(f"{problem.name}: {problem.m}x{problem.n} -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    problem = _resolve_problem(args.problem)
    svd = compute_svd(problem.A)
    y_noisy, delta = mc.add_noise(problem.y_exact, mc.NoiseModel(args.noise, args.seed))
    if args.alpha <= 0.0:
        raise ValueError("--alpha must be positive")
    if args.method == "cg":
        k = max(1, round(1.0 / args.alpha))
        iterates, _ = filters.cgls_iterates(problem.A, y_noisy, k)
        x_hat = iterates[-1] if iterates.shape[0] else np.zeros(problem.n)
        label = f"cg k={k}"
    else:
        x_hat = filters.filter_solve(svd, y_noisy, args.method, args.alpha)
        label = f"{args.method} alpha={args.alpha:g}"
    rel_err = float(np.linalg.norm(x_hat - problem.x_true) / np.linalg.norm(problem.x_true))
    _write_csv(args.out, "solve", "index,x_true,x_hat",
               [(i + 1, float(problem.x_true[i]), float(x_hat[i])) for i in range(problem.n)])
    if not args.no_fig:
        figures.save_solve_figure(problem, x_hat, label, _fig_path(args.out))
    print(f"{problem.name} {label}: rel_error={rel_err:.6g} delta={delta:.6g}")
    return 0


def cmd_mc(args) -> int:
    problems = tuple(_resolve_problem(tok) for tok in args.problems.split(","))
    cfg = mc.McConfig(
        problems=problems,
        methods=tuple(args.methods.split(",")),
        rules=tuple(args.rules.split(",")),
        noise_levels=tuple(float(v) for v in args.noise_levels.split(",")),
        reps=args.reps, base_seed=args.base_seed,
        grid_min=args.grid_min, grid_max=args.grid_max, grid_count=args.grid_count,
        per_rep_log=args.per_rep_log)
    report = mc.run_monte_carlo(cfg)
    Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    if args.per_rep_log:
        out = Path(args.out)
        rep_path = out.with_name(out.stem + "-reps" + (out.suffix or ".csv"))
        rep_path.write_text(report.per_rep_csv(), encoding="utf-8")
        print(f"per-rep log -> {rep_path}")
    if not args.no_fig:
        figures.save_mc_figure(report, _fig_path(args.out))
    print(f"{len(report.rows)} cells -> {args.out}")
    return 0


def cmd_rules(args) -> int:
    problem = _resolve_problem(args.problem)
    svd = compute_svd(problem.A)
    y_noisy, delta = mc.add_noise(problem.y_exact, mc.NoiseModel(args.noise, args.seed))
    if args.rule == "morozov":
        outcome = rules.morozov_like(svd, y_noisy, delta, args.method)
    else:
        grid = mc.default_grid(args.method, svd)
        outcome = rules.heuristic_select(args.rule, svd, y_noisy,
                                         filters.METHODS[args.method], grid)
    _write_csv(args.out, "rules-trace", "param,objective",
               [(float(p), float(v)) for p, v in outcome.objective_trace])
    if not args.no_fig and outcome.objective_trace.shape[0]:
        figures.save_rules_figure(outcome, f"{args.rule} on {problem.name} ({args.method})",
                                  _fig_path(args.out))
    flags = ",".join(sorted(outcome.flags)) or "-"
    k_part = "" if outcome.k is None else f" k={outcome.k}"
    print(f"{args.rule}/{args.method}: param={outcome.param:.6g}{k_part} "
          f"objective={outcome.objective:.6g} flags={flags} delta={delta:.6g}")
    return 0


_VERIFY_CHECKS = ("prop2", "lemma1", "qualification", "lemma2", "rates")


def _build_verify_report(check: str) -> theory.CheckReport:
    if check == "prop2":
        return theory.verify_prop2()
    if check == "lemma1":
        return theory.verify_residual_bound()
    if check == "qualification":
        return theory.merge_reports(
            "qualification", [theory.verify_qualification(p) for p in (0.5, 1.0, 2.0)])
    if check == "lemma2":
        return theory.verify_lemma2()
    return theory.verify_rates()


def cmd_verify(args) -> int:
    report = _build_verify_report(args.check)
    Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    if not args.no_fig:
        figures.save_verify_figure(report, _fig_path(args.out))
    for row in report.rows:
        mark = "pass" if row.passed else "FAIL"
        print(f"{row.check} {row.parameter}: {row.worst_slack_or_band:.6g} {mark}")
    return 0 if report.passed else 3


def cmd_curve(args) -> int:
    problem = _resolve_problem(args.problem)
    svd = compute_svd(problem.A)
    y_noisy, _ = mc.add_noise(problem.y_exact, mc.NoiseModel(args.noise, args.seed))
    methods = args.methods.split(",")
    curves = {}
    rows = []
    for kind in methods:
        if kind == "cg":
            raise ValueError("cg has no conditioning curve")
        grid = mc.default_grid(kind, svd, args.grid_min, args.grid_max, args.grid_count)
        curve = mc.conditioning_error_curve(svd, problem.x_true, y_noisy, kind, grid)
        curves[kind] = curve
        rows.extend((kind, alpha, cond, err) for alpha, cond, err in curve)
    _write_csv(args.out, "curve", "method,alpha,cond,rel_error", rows)
    if not args.no_fig:
        figures.save_curve_figure(curves, _fig_path(args.out))
    print(f"{len(rows)} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="illreg",
        description="Spectral filter regularization toolbox: test problems, "
                    "solvers, parameter rules, benchmarks, and bound checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out", required=True, help="output file path")
        sp.add_argument("--no-fig", action="store_true",
                        help="skip the companion PNG figure")

    sp = sub.add_parser("problem", help="generate a test problem as JSON")
    sp.add_argument("--name", required=True, choices=("shaw", "baart", "heat", "diag"))
    sp.add_argument("--n", required=True, type=int)
    sp.add_argument("--seed", type=int, default=0, help="seed for diag sources")
    sp.add_argument("--decay", default="exponential:1.0",
                    help="diag only: exponential:<rate> or polynomial:<rate>")
    sp.add_argument("--source", default="logarithmic:1.0",
                    help="diag only: holder:<mu> or logarithmic:<p>")
    sp.add_argument("--rho", type=float, default=1.0, help="diag only: source norm")
    add_common(sp)
    sp.set_defaults(func=cmd_problem)

    sp = sub.add_parser("solve", help="one regularized solve on noisy data")
    sp.add_argument("--problem", required=True, help="name:n or problem JSON path")
    sp.add_argument("--method", required=True, choices=filters.KINDS)
    sp.add_argument("--alpha", required=True, type=float,
                    help="regularization parameter (cg iterates round(1/alpha) steps)")
    sp.add_argument("--noise", type=float, default=0.0, help="relative noise level")
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("mc", help="Monte-Carlo benchmark over methods and rules")
    sp.add_argument("--problems", required=True, help="comma list of name:n or JSON paths")
    sp.add_argument("--methods", default=",".join(filters.KINDS))
    sp.add_argument("--rules", default="oracle")
    sp.add_argument("--noise-levels", default="0.04")
    sp.add_argument("--reps", type=int, default=200)
    sp.add_argument("--base-seed", type=int, default=0)
    sp.add_argument("--grid-min", type=float, default=1e-12)
    sp.add_argument("--grid-max", type=float, default=1.0)
    sp.add_argument("--grid-count", type=int, default=200)
    sp.add_argument("--per-rep-log", action="store_true",
                    help="also write per-replication rows next to --out")
    add_common(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("rules", help="run one parameter rule and dump its trace")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--method", required=True, choices=filters.KINDS)
    sp.add_argument("--rule", required=True, choices=rules.HEURISTICS + ("morozov",))
    sp.add_argument("--noise", type=float, default=0.04)
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp)
    sp.set_defaults(func=cmd_rules)

    sp = sub.add_parser("verify", help="check an analytic bound numerically")
    sp.add_argument("--check", required=True, choices=_VERIFY_CHECKS)
    add_common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("curve", help="conditioning versus error trade-off curves")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--methods", default="nrm,tik")
    sp.add_argument("--noise", type=float, default=0.04)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid-min", type=float, default=1e-12)
    sp.add_argument("--grid-max", type=float, default=1.0)
    sp.add_argument("--grid-count", type=int, default=200)
    add_common(sp)
    sp.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
