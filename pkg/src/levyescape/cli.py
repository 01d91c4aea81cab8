"""Command-line front end: solve / asym / compare / mc.

Every subcommand reads a flat key = value problem file, writes CSV outputs in
a stable documented schema, and drops a JSON manifest next to each CSV with
everything needed to reproduce the run bit-for-bit with the same build.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace as dc_replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import regular_expansion, singular_expansion
from .errors import ConfigError, EscapeToolkitError
from .montecarlo import MCConfig, estimate_escape
from .problem import EscapeProblem, parse_problem_file
from .solver import solve_escape_probability


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyescape",
        description="Escape probabilities under small symmetric heavy-tailed noise: "
        "direct nonlocal solve, matched asymptotics, Monte Carlo.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", required=True, help="problem file (flat key = value)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p_solve = sub.add_parser("solve", help="direct numerical solution on a uniform grid")
    common(p_solve)
    p_solve.add_argument("--grid-n", type=int, default=401, help="interior grid nodes")

    p_asym = sub.add_parser("asym", help="asymptotic expansion sampled on a grid")
    common(p_asym)
    p_asym.add_argument("--grid-n", type=int, default=401)
    p_asym.add_argument("--corrected-p1-boundary", action="store_true",
                        help="pin the first correction to 0 at the target boundary")
    p_asym.add_argument("--span", type=float, default=50.0, help="layer solve span")

    p_cmp = sub.add_parser("compare", help="solver vs asymptotics sweep over alpha and epsilon")
    common(p_cmp)
    p_cmp.add_argument("--grid-n", type=int, default=401)
    p_cmp.add_argument("--eps", type=_float_list, default=None,
                       help="comma-separated epsilon values (default: problem file value)")
    p_cmp.add_argument("--alpha", type=_float_list, default=None,
                       help="comma-separated alpha values (default: problem file value)")
    p_cmp.add_argument("--corrected-p1-boundary", action="store_true")

    p_mc = sub.add_parser("mc", help="Monte Carlo escape estimates with confidence intervals")
    common(p_mc)
    p_mc.add_argument("--x0", type=_float_list, default=None,
                      help="comma-separated start points (default: domain midpoint)")
    p_mc.add_argument("--paths", type=int, default=10_000)
    p_mc.add_argument("--dt", type=float, default=1e-3)
    p_mc.add_argument("--tmax", type=float, default=None)
    return parser


def _write_manifest(path: Path, problem_file: str, command: str, params: dict, seed: int) -> None:
    digest = hashlib.sha256(Path(problem_file).read_bytes()).hexdigest()
    manifest = {
        "tool": "levyescape",
        "version": __version__,
        "subcommand": command,
        "problem_file": str(problem_file),
        "problem_sha256": digest,
        "parameters": params,
        "seed": seed,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _grid_with_exterior(problem: EscapeProblem, n: int) -> np.ndarray:
    h = (problem.b - problem.a) / (n + 1)
    return np.concatenate(([problem.a], problem.a + h * np.arange(1, n + 1), [problem.b]))


def _asym_curve(problem: EscapeProblem, args) -> tuple:
    """(callable, metadata dict); routes on the diffusion kind."""
    if problem.diffusion.is_zero:
        exp = singular_expansion(problem, span=args.span)
        return exp.evaluate, exp.metadata()
    exp = regular_expansion(problem, corrected_p1_boundary=args.corrected_p1_boundary)
    meta = {
        "case": "regular",
        "epsilon": problem.epsilon,
        "alpha": problem.alpha,
        "target": problem.target,
        "corrected_p1_boundary": args.corrected_p1_boundary,
    }
    return exp.evaluate, meta


def _cmd_solve(args) -> int:
    problem = parse_problem_file(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid, report = solve_escape_probability(problem, n=args.grid_n)
    grid.to_csv(out / "solve.csv")
    _write_manifest(out / "solve.manifest.json", args.problem, "solve",
                    {"grid_n": args.grid_n, "residual_inf_norm": report.residual_inf_norm,
                     "condition_estimate": report.condition_estimate,
                     "scheme": report.scheme},
                    args.seed)
    print(f"solve: n={args.grid_n} residual={report.residual_inf_norm:.3e} "
          f"scheme={report.scheme} -> {out / 'solve.csv'}")
    return 0


def _cmd_asym(args) -> int:
    problem = parse_problem_file(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curve, meta = _asym_curve(problem, args)
    xs = _grid_with_exterior(problem, args.grid_n)
    ps = np.asarray([float(curve(x)) for x in xs])
    with open(out / "asym.csv", "w") as fh:
        fh.write("x,p_asym\n")
        for x, p in zip(xs, ps):
            fh.write(f"{x:.17g},{p:.17g}\n")
    (out / "asym.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    _write_manifest(out / "asym.manifest.json", args.problem, "asym",
                    {"grid_n": args.grid_n, **meta}, args.seed)
    print(f"asym: case={meta['case']} -> {out / 'asym.csv'}")
    return 0


def _cmd_compare(args) -> int:
    problem = parse_problem_file(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    alphas = args.alpha or [problem.alpha]
    epsilons = args.eps or [problem.epsilon]
    rows: list[str] = []
    summary: list[tuple[float, float, float]] = []
    for alpha in alphas:
        base = problem.with_(alpha=alpha)
        reg_exp = None
        for eps in epsilons:
            prob = base.with_(epsilon=eps)
            grid, _ = solve_escape_probability(prob, n=args.grid_n)
            if prob.diffusion.is_zero:
                curve, _meta = _asym_curve(prob, args)
            else:
                # the expansion terms depend on alpha only; reuse across epsilon
                if reg_exp is None:
                    reg_exp = regular_expansion(
                        prob, corrected_p1_boundary=args.corrected_p1_boundary
                    )
                curve = dc_replace(reg_exp, epsilon=eps).evaluate
            xs = np.concatenate(([prob.a], grid.nodes, [prob.b]))
            p_num = np.concatenate(([grid.left_exterior], grid.values, [grid.right_exterior]))
            p_asym = np.asarray([float(curve(x)) for x in xs])
            diff = np.abs(p_num - p_asym)
            for x, pn, pa, d in zip(xs, p_num, p_asym, diff):
                rows.append(f"{alpha:.17g},{eps:.17g},{x:.17g},{pn:.17g},{pa:.17g},{d:.17g}")
            summary.append((alpha, eps, float(diff.max())))
    with open(out / "compare.csv", "w") as fh:
        fh.write("alpha,epsilon,x,p_num,p_asym,abs_diff\n")
        fh.write("\n".join(rows) + "\n")
    with open(out / "compare_summary.csv", "w") as fh:
        fh.write("alpha,epsilon,sup_diff\n")
        for alpha, eps, sup in summary:
            fh.write(f"{alpha:.17g},{eps:.17g},{sup:.17g}\n")
    _write_manifest(out / "compare.manifest.json", args.problem, "compare",
                    {"grid_n": args.grid_n, "alphas": alphas, "epsilons": epsilons,
                     "corrected_p1_boundary": args.corrected_p1_boundary},
                    args.seed)
    for alpha, eps, sup in summary:
        print(f"compare: alpha={alpha:g} eps={eps:g} sup|p_num - p_asym| = {sup:.6e}")
    return 0


def _cmd_mc(args) -> int:
    problem = parse_problem_file(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    x0s = args.x0 or [0.5 * (problem.a + problem.b)]
    cfg = MCConfig(n_paths=args.paths, dt=args.dt, t_max=args.tmax, seed=args.seed)
    with open(out / "mc.csv", "w") as fh:
        fh.write("x0,p_hat,std_err,n_censored\n")
        for x0 in x0s:
            est = estimate_escape(problem, x0, cfg)
            fh.write(f"{x0:.17g},{est.p_hat:.17g},{est.std_err:.17g},{est.n_censored}\n")
            print(f"mc: x0={x0:g} p_hat={est.p_hat:.5f} +/- {est.std_err:.5f} "
                  f"censored={est.n_censored}/{est.n_paths}")
    _write_manifest(out / "mc.manifest.json", args.problem, "mc",
                    {"x0": x0s, "paths": args.paths, "dt": args.dt, "tmax": args.tmax},
                    args.seed)
    return 0


_DISPATCH = {"solve": _cmd_solve, "asym": _cmd_asym, "compare": _cmd_compare, "mc": _cmd_mc}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code) if exc.code is not None else 2
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except EscapeToolkitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
