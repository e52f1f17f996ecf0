"""
analyze: certify or reject nonexistence at one speed
"""
import argparse

from app.cli.common import add_common_flags, model_and_grid, parse_config, run_config, write
from app.core.errors import HypothesisFailure
from app.core.logging import logger
from app.schemas.certificate import CertifyOptions
from app.schemas.potential import HypothesisReport
from app.services.certifier_service import certify_speed
from app.services.potential_service import check_hypotheses


def register(subparsers) -> None:
    p = subparsers.add_parser("analyze", help="Decide nonexistence at a single speed c")
    p.add_argument("--config", required=True, help="Potential JSON document")
    p.add_argument("--c", type=float, required=True, help="Speed c >= 0")
    p.add_argument("--allow-h4-failure", action="store_true",
                   help="Continue when sampled W-hat takes negative values")
    add_common_flags(p)
    p.set_defaults(handler=run)


def require_hypotheses(report: HypothesisReport, allow_h4_failure: bool) -> None:
    """Exit 3 when H1-H3 (or H4 without the override) fail on the grid"""
    failed = [chk for chk in report.checks()[:4] if chk.status == "fail"]
    if allow_h4_failure:
        failed = [chk for chk in failed if chk.name != "H4"]
    if failed:
        details = "; ".join(f"{chk.name} at {chk.witness}: {chk.note}" for chk in failed)
        raise HypothesisFailure(f"sampled hypotheses fail: {details}",
                                witness={chk.name: chk.witness for chk in failed})


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args, "analyze", parse_config(args.config), c=args.c,
                     allow_h4_failure=args.allow_h4_failure)
    model, grid = model_and_grid(cfg)
    hypotheses = check_hypotheses(model, grid)
    require_hypotheses(hypotheses, cfg.allow_h4_failure)

    opts = CertifyOptions(grid=grid, hypotheses=hypotheses, allow_h4_failure=cfg.allow_h4_failure)
    verdict = certify_speed(model, cfg.c, opts)
    logger.info(f"[CLI] analyze {model.name} c={cfg.c:g}: {verdict.status} ({verdict.route})")
    write(verdict, cfg)
    return 0
