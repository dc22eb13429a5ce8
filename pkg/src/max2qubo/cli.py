"""Command line entry point: ``max2qubo {reduce,solve,bench,gen,verify}``.

Assignments are printed and read as space-separated 0/1 values in variable
order; variable k of the file (1-indexed in DIMACS) is position k-1.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import load_instances, run_benchmark, trials_csv_path
from .formula import DimacsError, count_satisfied, emit_dimacs, gen_random_2sat, parse_dimacs
from .qubo import QuboFormatError, emit_qubo, reduce_to_qubo
from .solvers import BRUTE_FORCE_LIMIT, SOLVERS, SolverConfig, SolverError


def _read_formula(path):
    return parse_dimacs(Path(path).read_text())


def cmd_reduce(args) -> int:
    f = _read_formula(args.input)
    q = reduce_to_qubo(f)
    Path(args.output).write_text(emit_qubo(q))
    print(f"N {f.num_vars}")
    print(f"C {f.num_clauses}")
    print(f"nonzeros {q.nnz}")
    print(f"offset {q.offset:g}")
    return 0


def _solver_config(args) -> SolverConfig:
    return SolverConfig(name=args.solver, sweeps=args.sweeps, restarts=args.restarts,
                        time_budget=args.budget, max_size=args.max_size)


def cmd_solve(args) -> int:
    f = _read_formula(args.input)
    q = reduce_to_qubo(f)
    out = _solver_config(args).run(q, args.seed).attach(f)
    ttfb = "-" if out.time_to_first_best is None else f"{out.time_to_first_best:.6g}"
    print(f"solver {args.solver}")
    print(f"satisfied {out.satisfied_weight} / {f.total_weight}")
    print(f"objective {out.best_objective:g}")
    print(f"time_to_first_best {ttfb}")
    print(f"wall_time {out.wall_time:.6g}")
    print("assignment " + " ".join(map(str, out.bits())))
    return 0


def cmd_bench(args) -> int:
    instances, errors = load_instances(args.instances)
    for name, msg in errors.items():
        print(f"warning: skipping {name}: {msg}", file=sys.stderr)
    if not instances:
        print(f"error: no parseable instances in {args.instances}", file=sys.stderr)
        return 1
    report = run_benchmark(instances, _solver_config(args), args.reps, args.out,
                           base_seed=args.seed, max_workers=args.workers,
                           oracle_max_size=args.max_size)
    for name, msg in report.skipped.items():
        print(f"warning: skipping {name}: {msg}", file=sys.stderr)
    print(report.table())
    print(f"report {args.out}")
    print(f"trials {trials_csv_path(args.out)}")
    return 0 if report.estimates else 1


def cmd_gen(args) -> int:
    f = gen_random_2sat(args.vars, args.clauses, args.seed)
    Path(args.out).write_text(emit_dimacs(f))
    print(f"p cnf {f.num_vars} {f.num_clauses} -> {args.out}")
    return 0


def cmd_verify(args) -> int:
    f = _read_formula(args.input)
    toks = Path(args.assignment).read_text().split()
    try:
        bits = [int(t) for t in toks]
    except ValueError:
        raise ValueError("assignment must contain only 0/1 values") from None
    sat = count_satisfied(f, bits)
    print(f"satisfied {sat} / {f.total_weight}")
    if args.expect is not None and sat != args.expect:
        print(f"error: expected {args.expect} satisfied, got {sat}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="max2qubo", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="write the QUBO form of a DIMACS instance")
    r.add_argument("--input", required=True)
    r.add_argument("--output", required=True)
    r.set_defaults(func=cmd_reduce)

    def solver_flags(sp, solver_required):
        sp.add_argument("--solver", choices=sorted(SOLVERS), required=solver_required,
                        default=None if solver_required else "anneal")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--sweeps", type=int, default=1000)
        sp.add_argument("--restarts", type=int, default=20)
        sp.add_argument("--budget", type=float, default=None, help="time budget in seconds")
        sp.add_argument("--max-size", type=int, default=BRUTE_FORCE_LIMIT,
                        help="largest N the brute-force oracle accepts")

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--input", required=True)
    solver_flags(s, True)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="time-to-optimal-solution over a directory of instances")
    b.add_argument("--instances", required=True)
    b.add_argument("--reps", type=int, required=True)
    b.add_argument("--out", required=True, help="report path (JSON); trials CSV goes alongside")
    b.add_argument("--workers", type=int, default=1)
    solver_flags(b, True)
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="random MAX-2-SAT instance")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--clauses", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="count clauses satisfied by an assignment file")
    v.add_argument("--input", required=True)
    v.add_argument("--assignment", required=True)
    v.add_argument("--expect", type=int, default=None)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DimacsError, QuboFormatError, SolverError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
