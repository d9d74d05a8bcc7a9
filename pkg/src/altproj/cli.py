"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 invalid spec.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import formats, verify
from .exceptions import AltProjError, SpecValidationError
from .instances import PottsInstance, potts_instance, random_instance
from .measures import dirac, uniform

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_SPEC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_edges(tokens):
    edges = []
    for tok in tokens or []:
        for part in tok.split(","):
            if not part:
                continue
            try:
                a, b = part.split("-")
                edges.append((int(a), int(b)))
            except ValueError:
                raise UsageError(f"bad edge {part!r}, expected a-b") from None
    return edges


def parse_start(text, chain):
    """``dirac:x,y``, ``dirac`` (first support pair) or ``uniform``."""
    if text is None or text == "dirac":
        return dirac(chain.support, *chain.support.pairs()[0])
    if text == "uniform":
        return uniform(chain.support)
    if text.startswith("dirac:"):
        try:
            x, y = (int(v) for v in text[len("dirac:"):].split(","))
        except ValueError:
            raise UsageError(f"bad start {text!r}") from None
        if not (0 <= x < chain.nx and 0 <= y < chain.ny) or not chain.support.mask[x, y]:
            raise UsageError(f"start ({x}, {y}) is not a support pair")
        return dirac(chain.support, x, y)
    raise UsageError(f"unknown start {text!r}; use dirac:x,y or uniform")


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen(args):
    if args.random is not None:
        if args.edges:
            raise UsageError("--edges only applies to --potts")
        nx, ny, density, seed = args.random
        try:
            chain = random_instance(int(nx), int(ny), float(density), int(seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        v, q, beta = args.potts
        try:
            inst = PottsInstance(int(v), tuple(parse_edges(args.edges)), int(q), float(beta))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        chain = potts_instance(inst)
    _write(formats.dumps(formats.chain_to_json(chain)), args.output)
    return EXIT_OK


def cmd_run(args):
    chain = formats.load_chain(args.spec)
    trace = verify.emit_trace(chain, parse_start(args.start, chain), args.steps)
    _write(trace.to_csv(), args.output)
    return EXIT_OK


def cmd_trace(args):
    chain = formats.load_chain(args.spec)
    trace, states = verify.trace_run(chain, parse_start(args.start, chain), args.steps)
    res = verify.pythagorean_residuals(trace, states, chain.es)
    slacks = verify.duality_slacks(trace)
    n = len(trace.rows)
    extra = {
        "post_burn_in": [t >= chain.burn_in for t in range(n)],
        "pythagorean_residual": [res[t][0] if t in res else None for t in range(n)],
        "bregman_residual": [res[t][1] if t in res else None for t in range(n)],
        "duality_min_slack": [min(slacks[t]) if t in slacks else None for t in range(n)],
    }
    _write(trace.to_csv(extra), args.output)
    return EXIT_OK


def cmd_verify(args):
    chain = formats.load_chain(args.spec)
    pi0 = parse_start(args.start, chain)
    rep = verify.verify_projection_theorem(chain, trials=args.trials, seed=args.seed, oracle_tol=args.oracle_tol)
    rep.extend(verify.verify_pythagorean(chain, pi0, args.steps, rtol=args.pyth_rtol))
    rep.extend(verify.verify_duality_chain(chain, pi0, args.steps, slack_tol=args.slack_tol))
    for line in rep.lines():
        print(line)
    print("PASS" if rep.passed else "FAIL")
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(json.dumps(rep.to_dict(), indent=2) + "\n")
    return EXIT_OK if rep.passed else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="altproj", description="Alternating Markov chains as reverse-KL projections")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a chain specification (JSON)")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--random", nargs=4, metavar=("NX", "NY", "DENSITY", "SEED"))
    src.add_argument("--potts", nargs=3, metavar=("V", "Q", "BETA"))
    g.add_argument("--edges", nargs="*", default=[], help="edges as a-b tokens")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    def spec_args(p, steps_default):
        p.add_argument("--spec", required=True, help="chain specification JSON")
        p.add_argument("--start", help="dirac:x,y or uniform (default: first support pair)")
        p.add_argument("--steps", type=int, default=steps_default)

    r = sub.add_parser("run", help="evolve the chain and write the divergence trace (CSV)")
    spec_args(r, 100)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("trace", help="run plus per-step identity residuals (CSV)")
    spec_args(t, 100)
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_trace)

    v = sub.add_parser("verify", help="run all verification checks")
    spec_args(v, 100)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--oracle-tol", type=float, default=verify.ORACLE_AGREEMENT_TOL)
    v.add_argument("--pyth-rtol", type=float, default=verify.PYTHAGOREAN_RTOL)
    v.add_argument("--slack-tol", type=float, default=verify.SLACK_TOL)
    v.add_argument("--report", help="also write the report as JSON")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 0) < 0:
        parser.error("--steps must be nonnegative")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except SpecValidationError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except AltProjError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
