"""
trace: sampled branches of R_j = 0 near the origin
"""
import argparse

from app.cli.common import add_common_flags, model_and_grid, parse_config, run_config, write
from app.core.config import TRACE_N, TRACE_T_MAX, TRACE_T_MIN
from app.services.dispersion_service import trace_gamma


def register(subparsers) -> None:
    p = subparsers.add_parser("trace", help="Trace gamma+/- on the (xi_1, xi_j) slice")
    p.add_argument("--config", required=True, help="Potential JSON document")
    p.add_argument("--c", type=float, required=True, help="Speed c > 0")
    p.add_argument("--axis", type=int, required=True, help="Slice axis j in 2..N")
    p.add_argument("--t-min", type=float, default=TRACE_T_MIN)
    p.add_argument("--t-max", type=float, default=TRACE_T_MAX)
    p.add_argument("--n", type=int, default=TRACE_N, help="Number of t samples")
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args, "trace", parse_config(args.config), c=args.c, axis=args.axis)
    model, _ = model_and_grid(cfg)
    trace = trace_gamma(model, cfg.axis, cfg.c, t_min=args.t_min, t_max=args.t_max, n=args.n)
    write(trace, cfg)
    return 0
