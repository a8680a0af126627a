"""Command-line entry point: `rough-clt <experiment> [--config FILE] [--seed N] [--out DIR]`.

Exit codes:
    0  every cell passed its band
    1  a numeric failure or a failed band (the cell is named on stderr)
    2  configuration error (the offending field path is printed)
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from backend.config import settings
from backend.schemas.experiment_schemas import EXPERIMENT_ALIASES, EXPERIMENTS, ExperimentConfig
from backend.services.experiment_service import ExperimentService

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.tool_name,
        description="Rough-path CLT and moderate-deviation experiments for SPDEs",
    )
    parser.add_argument("--version", action="version", version=settings.tool_version)
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS + tuple(EXPERIMENT_ALIASES):
        target = EXPERIMENT_ALIASES.get(name, name)
        sub = commands.add_parser(name, help=f"Run the {target} experiment")
        sub.add_argument("--config", type=Path, help="JSON config; defaults fill missing fields")
        sub.add_argument("--seed", type=int, help="Master seed (overrides the config)")
        sub.add_argument("--out", type=Path, help="Output root (overrides OUTPUT_DIR)")
        sub.add_argument(
            "--threads", type=int, default=settings.threads, help="Worker processes for cells"
        )
    return parser


def format_validation_error(error: ValidationError) -> List[str]:
    """One `field.path: message` line per validation error."""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return lines


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file with the subcommand and CLI overrides, then validate."""
    payload = {}
    if args.config is not None:
        with open(args.config) as f:
            payload = json.load(f)
    payload["experiment"] = EXPERIMENT_ALIASES.get(args.experiment, args.experiment)
    if args.seed is not None:
        payload["seed"] = args.seed
    return ExperimentConfig.model_validate(payload)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        config = load_config(args)
    except ValidationError as e:
        for line in format_validation_error(e):
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {args.config}: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG

    output_dir = args.out or (Path(config.output_dir) if config.output_dir else None)
    service = ExperimentService(output_dir=output_dir, workers=args.threads)
    base_dir = args.config.parent if args.config is not None else None
    record = service.run(config, base_dir=base_dir)

    for failure in record.failures:
        print(f"failure: {failure}", file=sys.stderr)
    for cell in record.cells:
        if cell.passed is False:
            print(f"failed cell: {cell.cell}", file=sys.stderr)
    status = "PASS" if record.passed else "FAIL"
    print(f"{status} {config.experiment} {record.config_hash[:12]}")
    return EXIT_PASS if record.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
