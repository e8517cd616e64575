"""
Command-line entry point for the delayed flocking simulator.

    python -m delayflock run <config> --out <path> [--stride k] [--h-divisor m]
    python -m delayflock certify|sweep <config> --out <path> [--h-divisor m]
"""
import argparse
import sys
from typing import Optional, Sequence

from delayflock.cli.command_certify import cmd_certify
from delayflock.cli.command_run import cmd_run
from delayflock.cli.command_sweep import cmd_sweep
from delayflock.utils.logging import logger


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser.

    Returns:
        Parser with run, certify and sweep subcommands
    """
    parser = argparse.ArgumentParser(
        prog="delayflock",
        description="Simulate and certify delayed Cucker-Smale flocking.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "simulate and write the d_X/d_V series CSV"),
        ("certify", "certify, simulate and write the JSON verdict report"),
        ("sweep", "run one simulation per beta and write the sweep CSV"),
    ):
        command = commands.add_parser(name, help=help_text)
        command.add_argument("config", help="run config JSON file")
        command.add_argument("--out", required=True, help="output file")
        command.add_argument("--h-divisor", type=int, default=None, help="steps per delay, m in tau = m h")
        # only the series CSV has rows to thin
        if name == "run":
            command.add_argument("--stride", type=int, default=None, help="integration steps between CSV rows")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and dispatch.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        Exit status
    """
    args = build_parser().parse_args(argv)

    try:
        if args.command == "run":
            return int(cmd_run(args.config, args.out, stride=args.stride, h_divisor=args.h_divisor))
        if args.command == "certify":
            return int(cmd_certify(args.config, args.out, h_divisor=args.h_divisor))
        return int(cmd_sweep(args.config, args.out, h_divisor=args.h_divisor))
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    sys.exit(main())
