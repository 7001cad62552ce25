"""Entry point of the `sdforest` command: builds one sub-command per registered handler."""
import argparse
import sys
from typing import Optional, Sequence

from sdforest import __version__
from sdforest.cli import commands, experiments  # noqa: F401  pylint: disable=unused-import
from sdforest.cli.arguments import add_common_arguments
from sdforest.com.logging_utils import ProjectLogger
from sdforest.command_registry import get_commands_by_tag


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdforest", description="Spectrally deconfounded regression trees and random forests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for tag in ("model", "experiment"):
        for name, info in sorted(get_commands_by_tag(tag).items()):
            subparser = subparsers.add_parser(name, help=info["help"], description=info["help"])
            add_common_arguments(subparser)
            if info["arguments"] is not None:
                info["arguments"](subparser)
            subparser.set_defaults(handler=info["handler"])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run the selected command and return its exit code."""
    args = build_parser().parse_args(argv)
    if args.log_level:
        ProjectLogger.set_level(args.log_level)
    return args.handler(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
