"""Command-line interface: gen, solve, bench, and microbench subcommands."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from ..anderson_accel import AndersonConfig
from ..driver import run
from ..krylov_accel import KrylovConfig, attempt_set
from ..qp_model import TerminationConfig, load_problem, save_problem
from .generators import KINDS, generate
from .microbench import micro_bench, random_sparse
from .runner import (
    BenchMatrix,
    default_solvers,
    default_suite,
    run_bench_matrix,
    write_profile_csv,
    write_results_csv,
)

_GEN_FLAGS = {
    "n": int,
    "m1": int,
    "m2": int,
    "density": float,
    "reg": float,
    "horizon": int,
    "dt": float,
    "vmax": float,
    "input_weight": float,
    "features": int,
    "samples": int,
    "lam": float,
    "threshold": float,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kryqp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a QP instance file")
    gen.add_argument("--kind", choices=KINDS, required=True)
    gen.add_argument("--seed", type=int, default=0)
    for flag, typ in _GEN_FLAGS.items():
        gen.add_argument(f"--{flag.replace('_', '-')}", type=typ, default=None)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("problem")
    solve.add_argument("--accel", choices=["none", "anderson", "krylov"], default="none")
    solve.add_argument("--mode", choices=["obv", "alt"], default="alt")
    solve.add_argument("--tries", type=int, default=1)
    solve.add_argument("--interval", type=int, default=1)
    solve.add_argument("--memory", type=int, default=15)
    solve.add_argument("--rho", type=float, default=0.1)
    solve.add_argument("--eps", type=float, default=1e-6)
    solve.add_argument("--max-iters", type=int, default=20000)
    solve.add_argument("--report", default=None, help="write the residual trace CSV here")

    bench = sub.add_parser("bench", help="run the solver/problem matrix")
    bench.add_argument("--suite", choices=["default"], default="default")
    bench.add_argument("--eps", default="1e-3,1e-6", help="comma-separated tolerances")
    bench.add_argument("--measure", choices=["iters", "tapps", "time"], default="tapps")
    bench.add_argument("--max-iters", type=int, default=20000)
    bench.add_argument("--out", required=True, help="output directory")

    micro = sub.add_parser("microbench", help="time paired vs single kernels")
    micro.add_argument("--nnz-min", type=int, default=100000)
    micro.add_argument("--reps", type=int, default=50)
    micro.add_argument("--count", type=int, default=5)
    micro.add_argument("--dim", type=int, default=2000)
    micro.add_argument("--out", required=True)
    return parser


def _cmd_gen(args) -> int:
    params = {
        flag: getattr(args, flag)
        for flag in _GEN_FLAGS
        if getattr(args, flag) is not None
    }
    prob = generate(args.kind, seed=args.seed, **params)
    save_problem(prob, args.out)
    print(f"wrote {args.kind} instance (n={prob.n}, m1={prob.m1}, m2={prob.m2}) to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    prob = load_problem(args.problem)
    if args.accel == "anderson":
        accel = AndersonConfig(memory=args.memory, interval=args.interval)
    elif args.accel == "krylov":
        accel = KrylovConfig(
            memory=args.memory,
            tries=attempt_set(args.memory, args.tries),
            mode=args.mode,
        )
    else:
        accel = None
    term = TerminationConfig(eps=args.eps, max_iters=args.max_iters)
    report = run(prob, accel=accel, rho=args.rho, term=term)
    res = report.residual_trace[-1][1]
    print(
        f"status={report.status} iterations={report.iterations} "
        f"t_applications={report.t_applications} accepted={report.accepted} "
        f"rejected={report.rejected}"
    )
    print(f"residuals: r_p={res.r_p:.3e} r_d={res.r_d:.3e} pd={res.pd:.3e}")
    if args.report:
        with open(args.report, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "r_p", "r_d", "pd"])
            for it, triple in report.residual_trace:
                writer.writerow([it, repr(triple.r_p), repr(triple.r_d), repr(triple.pd)])
        print(f"wrote residual trace to {args.report}")
    return 0 if report.status == "solved" else 1


def _cmd_bench(args) -> int:
    measure = {"iters": "iterations", "tapps": "t_applications", "time": "wall_time"}[
        args.measure
    ]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = BenchMatrix(
        problems=default_suite(), solvers=default_solvers(), measure=measure
    )
    for eps_str in args.eps.split(","):
        eps = float(eps_str)
        result = run_bench_matrix(matrix, eps=eps, max_iters=args.max_iters)
        tag = eps_str.strip()
        results_path = out_dir / f"results_eps{tag}.csv"
        write_results_csv(result, results_path)
        print(f"wrote {results_path}")
        if result.perf is not None:
            profile_path = out_dir / f"profile_eps{tag}.csv"
            write_profile_csv(result, profile_path)
            print(f"wrote {profile_path}")
        solved = sum(1 for c in result.cells if c.report.status == "solved")
        print(f"eps={eps}: solved {solved}/{len(result.cells)} cells")
    return 0


def _cmd_microbench(args) -> int:
    per_col = max(1, -(-args.nnz_min // args.dim))  # ceil division
    matrices = [
        random_sparse(args.dim, args.dim, per_col, seed=i) for i in range(args.count)
    ]
    rows = micro_bench(matrices, repetitions=args.reps)
    fields = list(rows[0].keys())
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(
            f"nnz={row['nnz']}: spmv ratio {row['spmv_ratio']:.2f}, "
            f"solve ratio {row['solve_ratio']:.2f}"
        )
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "gen": _cmd_gen,
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "microbench": _cmd_microbench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
