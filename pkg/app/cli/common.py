"""
Shared CLI plumbing: config ingestion, run validation and report output
"""
import argparse
import json
import sys
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from app.core.errors import ConfigError, InvalidParameterError, UnknownKernelError
from app.core.helpers import dump_json
from app.core.logging import logger
from app.schemas.potential import GridSpec, PotentialSpec
from app.schemas.run import OutputSpec, RunConfig
from app.services.potential_service import KNOWN_PARAMS, PotentialModel, build_potential
from app.services.report_service import Result, emit_report, to_json


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Report directory (default: JSON on stdout)")
    parser.add_argument("--format", default="json",
                        help="Comma-separated report formats: json, md, csv")
    parser.add_argument("--grid-nr", type=int, default=None, help="Radii on the sampling grid")
    parser.add_argument("--grid-ndir", type=int, default=None, help="Directions on the sampling grid")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")


def parse_config(path: str) -> PotentialSpec:
    """Read a potential document, bare or wrapped as {"potential": {...}}"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc: Dict[str, Any] = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    if "potential" in doc:
        doc = doc["potential"]
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if not isinstance(kind, str) or kind not in KNOWN_PARAMS:
        raise UnknownKernelError(f"unknown kernel kind {kind!r}; choose from {sorted(KNOWN_PARAMS)}")
    try:
        return PotentialSpec(**doc)
    except ValidationError as e:
        raise InvalidParameterError(f"invalid potential config: {e}") from e


def parse_formats(raw: str) -> List[str]:
    formats = [f.strip().lower() for f in raw.split(",") if f.strip()]
    unknown = [f for f in formats if f not in ("json", "md", "csv")]
    if unknown or not formats:
        raise InvalidParameterError(f"unknown report format(s) {unknown or raw!r}")
    return formats


def run_config(args: argparse.Namespace, command: str, potential: Optional[PotentialSpec], **fields) -> RunConfig:
    try:
        return RunConfig(
            potential=potential,
            command=command,
            grid_nr=args.grid_nr,
            grid_ndir=args.grid_ndir,
            output=OutputSpec(path=args.out, formats=parse_formats(args.format)),
            **fields,
        )
    except ValidationError as e:
        raise InvalidParameterError(f"invalid {command} run: {e}") from e


def model_and_grid(cfg: RunConfig) -> Tuple[PotentialModel, GridSpec]:
    model = build_potential(cfg.potential)
    try:
        grid = GridSpec.default_for(model.smooth_at_origin, n_r=cfg.grid_nr, n_dir=cfg.grid_ndir)
    except ValidationError as e:
        raise InvalidParameterError(f"invalid grid: {e}") from e
    return model, grid


def write(results: Result, cfg: RunConfig) -> None:
    if cfg.output.path is None:
        sys.stdout.write(dump_json(to_json(results)))
        return
    emit_report(results, cfg.output.formats, cfg.output.path)
    logger.debug(f"[CLI] {cfg.command} report written to {cfg.output.path}")
