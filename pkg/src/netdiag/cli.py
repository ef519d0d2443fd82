"""Command line runner: ``netdiag demo <scenario>`` and ``netdiag oracle``.

Every run prints (or writes, with ``--out``) a JSON report and exits with 0 when the
verdict is ``pass`` or ``expected-failure``, 2 on ``fail`` and 3 on an extraction error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .oracle import mutated_join, run_oracle
from .report import EXIT_ERROR, EXIT_FAIL, EXIT_OK, SCHEMA, to_json
from .scenarios import run_scenario


def _default_seed() -> int:
    raw = os.environ.get("NETDIAG_SEED", "")
    try:
        return int(raw) if raw.strip() else 0
    except ValueError:
        raise SystemExit(f"netdiag: NETDIAG_SEED must be an integer, got {raw!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (default: $NETDIAG_SEED, else 0)")
    p.add_argument("--out", metavar="PATH", help="write the JSON report to PATH")
    p.add_argument("--quiet", action="store_true", help="do not print the report")
    p.add_argument("--timing", action="store_true",
                   help="record wall time (the report is then no longer byte-stable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netdiag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netdiag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", help="run a scenario")
    scen = demo.add_subparsers(dest="scenario", required=True)

    p = scen.add_parser("product-compactness", help="an oscillating net in [0,1]^N")
    p.add_argument("--coords", type=int, default=4, help="number of coordinates K")
    p.add_argument("--depth", type=int, default=10, dest="m_max", help="bisection depth m_max")
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--samples", type=int, default=1000, help="tail samples per coordinate")
    p.add_argument("--constant", action="store_true", help="use a constant net")
    p.add_argument("--negative-control", action="store_true", help="mutate the deepest stage map")
    _common(p)

    p = scen.add_parser("metric-compactness", help="a dense orbit in the unit square")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--length", type=int, default=200, help="terms of the diagonal subsequence")
    p.add_argument("--constant", action="store_true", help="use a constant sequence")
    p.add_argument("--negative-control", action="store_true", help="check the plain sequence")
    _common(p)

    p = scen.add_parser("alaoglu", help="functionals of the unit ball on R^d")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--dense", type=int, default=6, help="number of dense points")
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--constant", action="store_true", help="use a constant functional")
    p.add_argument("--negative-control", action="store_true", help="functionals of norm 2")
    _common(p)

    p = scen.add_parser("un-closedness", help="limits of operators T_n = T + 2^-n S")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--ops", type=int, default=6, help="number of operators N")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--lattice-pairs", type=int, default=10_000)
    p.add_argument("--zero-s", action="store_true", help="take S = 0")
    p.add_argument("--negative-control", action="store_true", help="use T_n = T + (-1)^n S")
    _common(p)

    p = scen.add_parser("counterexample-remark", help="subsequences do not suffice")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--length", type=int, default=12)
    p.add_argument("--tested", type=int, default=20, help="random subsequences to test")
    _common(p)

    p = sub.add_parser("oracle", help="exhaustive check on all small finite chains")
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--labelled", action="store_true",
                   help="enumerate labelled stages instead of one per isomorphism class")
    p.add_argument("--mutate", action="store_true",
                   help="use a join that skips the witness step (should be caught)")
    _common(p)
    return parser


_OWN = {"command", "scenario", "seed", "out", "quiet", "timing"}


def _run_demo(args) -> tuple[dict, int]:
    kwargs = {k: v for k, v in vars(args).items() if k not in _OWN}
    t0 = time.perf_counter()
    rep = run_scenario(args.scenario, seed=args.seed, **kwargs)
    if args.timing:
        rep.wall_time = time.perf_counter() - t0
    return rep.to_dict(), rep.exit_code


def _run_oracle(args) -> tuple[dict, int]:
    t0 = time.perf_counter()
    join = mutated_join if args.mutate else None
    kw = {"join": join} if join else {}
    res = run_oracle(args.max_size, args.max_depth, labelled=args.labelled,
                     stop_after=1 if args.mutate else None, **kw)
    verdict = "pass" if res.passed else "fail"
    out = {"schema": SCHEMA, "netdiag_version": __version__, "command": "oracle",
           "seed": args.seed, **res.to_dict(), "verdict": verdict,
           "wall_time": time.perf_counter() - t0 if args.timing else None}
    return out, EXIT_OK if res.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        report, code = _run_demo(args) if args.command == "demo" else _run_oracle(args)
    except Exception as exc:  # an unexpected failure still produces a report
        report = {"schema": SCHEMA, "netdiag_version": __version__, "command": args.command,
                  "seed": args.seed, "verdict": "error", "error": f"{type(exc).__name__}: {exc}"}
        code = EXIT_ERROR
    text = to_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if not args.quiet:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
