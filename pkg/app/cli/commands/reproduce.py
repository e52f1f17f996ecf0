"""
reproduce: built-in cases against their closed forms
"""
import argparse

from app.cli.common import add_common_flags, run_config, write
from app.core.errors import ReproductionMismatch
from app.services.reproduce_service import CASES, diff_table, run_case


def register(subparsers) -> None:
    p = subparsers.add_parser("reproduce", help="Re-derive closed-form results for a built-in kernel")
    p.add_argument("--case", required=True, choices=CASES)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--b-tilde", dest="b_tilde", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--dim", type=int, default=None)
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args, "reproduce", None, case=args.case)
    params = {"a": args.a, "b": args.b, "b_tilde": args.b_tilde, "epsilon": args.epsilon, "dim": args.dim}
    case = run_case(cfg.case, params, grid_nr=cfg.grid_nr, grid_ndir=cfg.grid_ndir)
    write(case, cfg)
    if not case.passed:
        raise ReproductionMismatch(f"{case.name} does not reproduce:\n{diff_table(case)}")
    return 0
