"""
Command Router
Collects the subcommands into one argparse parser
"""
import argparse

from app.cli.commands import analyze, reproduce, sweep, trace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ngp-certify",
        description="Numerical nonexistence certificates for traveling waves of the nonlocal GP equation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (analyze, sweep, trace, reproduce):
        command.register(subparsers)
    return parser
