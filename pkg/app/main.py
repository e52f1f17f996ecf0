"""
Entry point: `python -m app.main <command> ...`
"""
import sys
from typing import List, Optional

from app.cli.router import build_parser
from app.core.errors import CertifyError
from app.core.logging import logger, set_level


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.log_level:
        set_level(args.log_level)

    try:
        return args.handler(args)
    except CertifyError as e:
        logger.error(f"[CLI] {type(e).__name__}: {e.detail}")
        sys.stderr.write(f"error: {e.detail}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
