"""Command-line interface.

Subcommands: ``measure`` evaluates one of the four measures on a JSON
state file, ``sweep`` reproduces the two-parameter-family comparison of
the two relative-entropy measures as CSV, ``hypothesis`` emits the
finite-copy error-decay table, and ``selftest`` runs the seeded property
suites. Exit codes: 0 success, 2 input validation, 3 solver failure,
4 property violation.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import hypotest, linalg, measures, selftest, states
from .sdp import SolverError
from .states import StateValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_VIOLATION = 4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cmd_measure(args) -> int:
    sigma = states.read_state_json(args.state)
    fn = measures.MEASURES[args.measure]
    kwargs = {}
    if args.measure == "ET":
        kwargs = {"gap_tol": args.gap_tol, "feas_tol": args.feas_tol}
    res = fn(sigma, **kwargs)
    if math.isinf(res.value):
        print(
            f"+inf (support obstruction, certificate {res.support_certificate:.6g} "
            f">= {measures.SUPPORT_THRESHOLD:g})"
        )
    else:
        print(f"{res.value:.6f} {res.units} (gap <= {res.gap:.3g}), iterations {res.iterations}")
    if args.optimizer:
        if res.optimizer is None:
            print("no optimizer to write (value is infinite)", file=sys.stderr)
        else:
            states.write_state_json(args.optimizer, res.optimizer)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not (0.0 <= args.p_min <= args.p_max <= 1.0):
        raise StateValidationError("need 0 <= p-min <= p-max <= 1")
    if args.steps < 2:
        raise StateValidationError("need at least 2 steps")
    grid = np.linspace(args.p_min, args.p_max, args.steps)
    lines = ["p,e_r,e_m,diff,gap_r,gap_m,ppt"]
    for p in grid:
        sigma = states.example4_state(float(p))
        rr = measures.rel_entropy_of_entanglement(sigma)
        rm = measures.rel_entropy_measure(sigma)
        ppt = "true" if states.is_ppt(sigma) else "false"
        lines.append(
            ",".join(
                [
                    _fmt(p),
                    _fmt(rr.value),
                    _fmt(rm.value),
                    _fmt(rm.value - rr.value),
                    _fmt(rr.gap),
                    _fmt(rm.gap),
                    ppt,
                ]
            )
        )
    with open(args.out, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(grid)} rows to {args.out}")
    return EXIT_OK


def cmd_hypothesis(args) -> int:
    omega = states.read_state_json(args.omega)
    xi = states.read_state_json(args.xi)
    if not 0.0 < args.epsilon < 1.0:
        raise StateValidationError("epsilon must lie strictly between 0 and 1")
    if omega.dim ** args.n_max > hypotest.MAX_POWER_DIM:
        raise StateValidationError(
            f"n-max {args.n_max} exceeds the tensor-power dimension guard"
        )
    table = hypotest.stein_table(omega, xi, args.epsilon, args.n_max)
    if math.isinf(table.target_bits):
        print(
            "support violation: the asymptotic target is -inf; with a pure "
            "alternative the type-II error hits zero at finite n "
            "(see the pure-state divergence construction)",
            file=sys.stderr,
        )
    lines = ["n,beta_star,rate_bits,target_bits"]
    for row in table.rows:
        lines.append(
            ",".join([str(row.n), _fmt(row.beta_star), _fmt(row.rate_bits), _fmt(table.target_bits)])
        )
    with open(args.out, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest.run_selftest(
        seed=args.seed, sizes=args.sizes, gap_tol=args.gap_tol, feas_tol=args.feas_tol
    )
    if any(not r.passed for r in results):
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entdist", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_tols(p):
        p.add_argument("--gap-tol", type=float, default=1e-8, help="SDP duality-gap tolerance")
        p.add_argument("--feas-tol", type=float, default=1e-9, help="SDP feasibility tolerance")

    p = sub.add_parser("measure", help="evaluate a measure on a JSON state file")
    p.add_argument("state", help="input state file")
    p.add_argument(
        "--measure", required=True, choices=sorted(measures.MEASURES), help="which measure"
    )
    p.add_argument("--optimizer", help="write the closest feasible state here")
    add_tols(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", help="two relative-entropy measures across the mixing family")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--out", required=True, help="output CSV path")
    add_tols(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hypothesis", help="finite-copy error-decay table for a state pair")
    p.add_argument("omega", help="null-hypothesis state file")
    p.add_argument("xi", help="alternative state file")
    p.add_argument("--epsilon", type=float, required=True, help="type-I error level")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--out", required=True, help="output CSV path")
    add_tols(p)
    p.set_defaults(func=cmd_hypothesis)

    p = sub.add_parser("selftest", help="run the seeded property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", type=int, default=20, help="base sample count per suite")
    add_tols(p)
    p.set_defaults(func=cmd_selftest)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StateValidationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, measures.MeasureError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
