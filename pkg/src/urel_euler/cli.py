"""Command line entry point ``urel-euler``.

Exit codes: 0 success, 1 solver error, 2 acceptance failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench
from .errors import UrelError

log = logging.getLogger("urel_euler")

DEFAULT_N = {"radsym": 5000, "ode": 2000, "euler2d": 256}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urel-euler", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark case and write CSV output")
    run.add_argument("--config", help="flat key=value file; command-line flags override it")
    run.add_argument("--case", type=int, choices=range(1, 6))
    run.add_argument("--solver", choices=bench.SOLVERS)
    run.add_argument("--n", type=int, help="N (radsym), sample count (ode) or cells per side (euler2d)")
    run.add_argument("--d", type=int, choices=(2, 3))
    run.add_argument("--out")
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--record-stride", type=int, dest="record_stride")
    run.add_argument("--h", type=float, help="RK4 step for the ode solver")
    run.add_argument("--order", type=int, choices=(1, 2), help="euler2d scheme order")
    run.add_argument("--cfl", type=float)
    run.add_argument("--nbins", type=int)

    cmp_ = sub.add_parser("compare", help="distances between two profile CSV files")
    cmp_.add_argument("--a", required=True)
    cmp_.add_argument("--b", required=True)

    acc = sub.add_parser("accept", help="run the acceptance suite")
    acc.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    return parser


def _cmd_run(args) -> int:
    opts = bench.parse_config(args.config) if args.config else {}
    for key in ("case", "solver", "n", "d", "out", "t_end", "record_stride", "h", "order", "cfl", "nbins"):
        value = getattr(args, key)
        if value is not None:
            opts[key] = value
    missing = [k for k in ("case", "solver") if k not in opts]
    if missing:
        print(f"error: missing {', '.join(missing)}", file=sys.stderr)
        return 1
    solver = opts["solver"]
    case = bench.get_case(opts["case"], opts.get("d", 2))
    kwargs = {k: opts[k] for k in ("t_end", "record_stride", "h", "order", "cfl", "nbins") if k in opts}
    try:
        art = bench.run_case(case, solver, opts.get("n", DEFAULT_N[solver]), opts.get("out", "."), **kwargs)
    except (UrelError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    for path in art.paths:
        print(path)
    if art.reference is not None and art.reference.shock is not None:
        s = art.reference.shock
        print(f"shock: s={s.s_tilde:.6f} p-={s.p_minus:.6f} p+={s.p_plus:.6f} v+={s.v_plus:.6f}")
    if art.state2d is not None:
        log.info("euler2d: %d steps, %d floor events", art.state2d.steps, art.state2d.floor_events)
    return 0


def _cmd_compare(args) -> int:
    try:
        a = bench.read_profile_csv(args.a)
        b = bench.read_profile_csv(args.b)
        rep = bench.compare(a, b)
    except (UrelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"L1(p)={rep.l1_p:.6e} L1(v)={rep.l1_v:.6e} Linf(p)={rep.linf_p:.6e} Linf(v)={rep.linf_v:.6e}")
    print("shocks a: " + " ".join(f"{x:.6f}" for x in np.atleast_1d(rep.shocks_a)))
    print("shocks b: " + " ".join(f"{x:.6f}" for x in np.atleast_1d(rep.shocks_b)))
    return 0


def _cmd_accept(args) -> int:
    from .acceptance import format_result, run_all

    failed = 0
    try:
        for result in run_all(args.only):
            print(format_result(result), flush=True)
            failed += not result.passed
    except UrelError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    print(f"{failed} criteria failed" if failed else "all criteria passed")
    return 2 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"run": _cmd_run, "compare": _cmd_compare, "accept": _cmd_accept}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
