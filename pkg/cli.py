"""Command-line entry point: ``python cli.py run configs/E1.cfg --override mesh_h=0.1``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from models.experiment_config import EXPERIMENT_IDS
from services.experiments import EXPERIMENTS
from services.pipeline import EXIT_PASS, run_path

LOG_LEVEL_ENV_VAR = "ELECTROHEAT_LOG"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="electroheat", description="Run electro-thermal numerical experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment named in a config file")
    run.add_argument("config", help="path to a key = value config file")
    run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )

    commands.add_parser("list-experiments", help="print the known experiment ids")

    freeze = commands.add_parser("freeze-baselines", help="run a config and store its regression values")
    freeze.add_argument("config")
    freeze.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else os.getenv(LOG_LEVEL_ENV_VAR, "INFO").upper()
    logging.basicConfig(level=level, format="[%(levelname)s] %(name)s: %(message)s")

    if args.command == "list-experiments":
        for key in EXPERIMENT_IDS:
            print(f"{key}  {EXPERIMENTS[key].title}")
        return EXIT_PASS
    return run_path(args.config, args.override, freeze=args.command == "freeze-baselines")


if __name__ == "__main__":
    sys.exit(main())
