"""
``htopt`` command line.

    htopt run     --problem FILE --algorithm ht1|ht2|ht3|ht4|gd|nesterov [options]
    htopt compare --problem FILE --algorithms ht1,gd,nesterov [options]

Exit status: 0 when the stop rule fired, 2 when the iteration budget ran
out, 1 on any error (including gains outside the admissible range).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path


from .loss import PenaltyWeights
from .problemfile import ProblemFileError, load_problem_file
from .trace import emit_trace
from .tuner import (GainError, StopRule, run_alg1, run_alg2, run_alg3, run_alg4,
                    run_baseline, validate_gains)

ALGORITHMS = ("ht1", "ht2", "ht3", "ht4", "gd", "nesterov")
DEFAULT_BETA = 0.5
DEFAULT_GAMMA = 0.08

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


def _parser():
    parser = argparse.ArgumentParser(prog="htopt", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare"):
        p = sub.add_parser(name)
        p.add_argument("--problem", required=True, type=Path)
        if name == "run":
            p.add_argument("--algorithm", choices=ALGORITHMS)
        else:
            p.add_argument("--algorithms", "--algorithm", dest="algorithms",
                           default="ht1,gd,nesterov")
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--lambda-h", type=float)
        p.add_argument("--lambda-g", type=float)
        p.add_argument("--max-iters", type=int)
        p.add_argument("--grad-tol", type=float)
        p.add_argument("--trace", type=Path)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--record-time", action="store_true",
                       help="add wall time to trace metadata (breaks byte-identical reruns)")
    return parser


def _settings(pf, args):
    gains = pf.gains
    beta = args.beta if args.beta is not None else gains.get("beta", DEFAULT_BETA)
    gamma = args.gamma if args.gamma is not None else gains.get("gamma", DEFAULT_GAMMA)
    alpha = args.alpha if args.alpha is not None else gains.get("alpha", 0.0)
    weights = PenaltyWeights(
        args.lambda_h if args.lambda_h is not None else pf.weights.lambda_h,
        args.lambda_g if args.lambda_g is not None else pf.weights.lambda_g)
    stop = StopRule(
        args.max_iters if args.max_iters is not None else pf.stop.max_iters,
        args.grad_tol if args.grad_tol is not None else pf.stop.grad_tol,
        pf.stop.loss_tol, pf.stop.loss_ref)
    return validate_gains(beta, gamma, alpha), weights, stop


def solve(pf, algorithm, gains, weights, stop, seed=0):
    """Run one algorithm on a loaded problem file; returns the trace."""
    rl = pf.reduced_loss(seed=seed, weights=weights)
    theta0 = pf.start()
    if algorithm == "ht1":
        _, trace = run_alg1(rl, theta0, None, gains, stop)
    elif algorithm == "ht2":
        _, trace = run_alg2(rl, theta0, None, gains, stop)
    elif algorithm == "ht3":
        _, trace = run_alg3(rl, theta0, None, gains, stop, pf.region)
    elif algorithm == "ht4":
        _, trace = run_alg4(rl, theta0, None, gains, stop, pf.region)
    elif algorithm in ("gd", "nesterov"):
        _, trace = run_baseline(rl, theta0, stop, algorithm)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return trace


def _summary(algorithm, trace):
    f = trace.final
    eq = max(trace.column("eq_residual_inf"))
    ineq = max(trace.column("ineq_violation_inf"))
    return (f"{algorithm}: status={trace.status} iterations={f.k} final_l={f.l:.17g} "
            f"max_eq_residual={eq:.3e} max_ineq_violation={ineq:.3e}")


def _exit_code(status):
    return {"converged": EXIT_OK, "max_iters": EXIT_BUDGET}.get(status, EXIT_ERROR)


def _write(trace, path, args):
    if args.record_time:
        trace.metadata["wall_time_s"] = f"{trace.wall_time:.6f}"
    emit_trace(trace, path)


def _run(args, pf):
    algorithm = args.algorithm or pf.algorithm or "ht1"
    gains, weights, stop = _settings(pf, args)
    trace = solve(pf, algorithm, gains, weights, stop, args.seed)
    if args.trace is not None:
        _write(trace, args.trace, args)
    print(_summary(algorithm, trace))
    if trace.message:
        print(trace.message, file=sys.stderr)
    return _exit_code(trace.status)


def _compare(args, pf):
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms {unknown}; choose from {', '.join(ALGORITHMS)}")
    gains, weights, stop = _settings(pf, args)
    rows = []
    for algorithm in algorithms:
        trace = solve(pf, algorithm, gains, weights, stop, args.seed)
        if args.trace is not None:
            path = args.trace.with_name(f"{args.trace.stem}.{algorithm}{args.trace.suffix or '.csv'}")
            _write(trace, path, args)
        rows.append((algorithm, trace))
    print("method,status,iterations,final_l,grad_norm")
    for algorithm, trace in rows:
        f = trace.final
        print(f"{algorithm},{trace.status},{f.k},{f.l:.17g},{f.grad_norm:.6e}")
    codes = {_exit_code(t.status) for _, t in rows}
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return EXIT_BUDGET if EXIT_BUDGET in codes else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        pf = load_problem_file(args.problem)
        if args.command == "run":
            return _run(args, pf)
        return _compare(args, pf)
    except GainError as exc:
        print(f"error: invalid gains: {exc}", file=sys.stderr)
    except (ProblemFileError, OSError) as exc:
        print(f"error: {args.problem}: {exc}", file=sys.stderr)
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
