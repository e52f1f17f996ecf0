"""
sweep: verdicts over an equispaced speed grid
"""
import argparse

from app.cli.commands.analyze import require_hypotheses
from app.cli.common import add_common_flags, model_and_grid, parse_config, run_config, write
from app.core.config import SWEEP_WORKERS
from app.core.logging import logger
from app.schemas.certificate import CertifyOptions
from app.services.certifier_service import radial_inf_ratio, sweep
from app.services.potential_service import check_hypotheses


def register(subparsers) -> None:
    p = subparsers.add_parser("sweep", help="Certify over c_min..c_max")
    p.add_argument("--config", required=True, help="Potential JSON document")
    p.add_argument("--c-min", type=float, required=True)
    p.add_argument("--c-max", type=float, required=True)
    p.add_argument("--c-steps", type=int, required=True)
    p.add_argument("--workers", type=int, default=SWEEP_WORKERS, help="Threads for per-speed work")
    p.add_argument("--allow-h4-failure", action="store_true",
                   help="Continue when sampled W-hat takes negative values")
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args, "sweep", parse_config(args.config),
                     c_range=(args.c_min, args.c_max, args.c_steps),
                     allow_h4_failure=args.allow_h4_failure)
    model, grid = model_and_grid(cfg)
    hypotheses = check_hypotheses(model, grid)
    require_hypotheses(hypotheses, cfg.allow_h4_failure)

    opts = CertifyOptions(grid=grid, hypotheses=hypotheses, allow_h4_failure=cfg.allow_h4_failure,
                          workers=max(1, args.workers))
    report = sweep(model, cfg.c_grid(), opts)
    if model.radial:
        report.model["radial_inf_ratio"] = radial_inf_ratio(model, grid)
    logger.info(f"[CLI] sweep {model.name}: certified intervals {report.certified_intervals}")
    write(report, cfg)
    return 0
