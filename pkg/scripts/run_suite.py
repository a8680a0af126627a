"""Run every example config and print a pass/fail summary.

This script runs the acceptance workflow:
1. Validate each config in data/examples (the invalid one must be rejected)
2. Run each experiment into a fresh output directory
3. Re-run the CLT example and compare CSV bytes (determinism)

No installation required. Outputs to console and to the output directory.
"""

import argparse
import filecmp
import logging
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from pydantic import ValidationError

from backend.config import settings
from backend.schemas.experiment_schemas import ExperimentConfig
from backend.services.experiment_service import ExperimentService

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

INVALID_EXAMPLES = {"invalid_schedule.json"}
SKIPPED_BY_DEFAULT = {
    "suite.json",
    "mdp_coarse.json",
    "clt_llg_richardson.json",
    "clt_heat_commuting_full.json",
    "clt_llg_richardson_full.json",
}


def load(path: Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(path.read_text())


def main() -> int:
    """Run the example suite."""
    parser = argparse.ArgumentParser(description="Run the example configs")
    parser.add_argument("--out", type=Path, default=Path("runs/suite"))
    parser.add_argument("--all", action="store_true", help="Include the slow examples")
    parser.add_argument("--threads", type=int, default=settings.threads)
    args = parser.parse_args()

    print("=" * 60)
    print(f"{settings.tool_name} {settings.tool_version}: example suite")
    print("=" * 60)

    examples = sorted(settings.examples_dir.glob("*.json"))
    if not examples:
        print(f"❌ No configs found in {settings.examples_dir}")
        return 1

    print("\nStep 1: Validating configs")
    print("-" * 60)
    configs = {}
    for path in examples:
        try:
            config = load(path)
        except ValidationError as e:
            if path.name in INVALID_EXAMPLES:
                print(f"✓ {path.name} rejected ({e.error_count()} error(s))")
                continue
            print(f"❌ {path.name}: {str(e)}")
            return 1
        if path.name in INVALID_EXAMPLES:
            print(f"❌ {path.name} should have been rejected")
            return 1
        configs[path.name] = config
        print(f"✓ {path.name} ({config.experiment})")

    print("\nStep 2: Running experiments")
    print("-" * 60)
    service = ExperimentService(output_dir=args.out, workers=args.threads)
    summary = []
    clt_record = None
    for name, config in configs.items():
        if name in SKIPPED_BY_DEFAULT and not args.all:
            print(f"- {name} skipped (use --all)")
            continue
        record = service.run(config, base_dir=settings.examples_dir)
        summary.append((name, record))
        if name == "clt_heat_commuting.json":
            clt_record = record
        print(f"{'✓' if record.passed else '❌'} {name}: {record.wall_clock_seconds:.1f}s")

    print("\nStep 3: Determinism")
    print("-" * 60)
    identical = True
    if clt_record is not None:
        rerun = ExperimentService(output_dir=args.out / "rerun").run(
            configs["clt_heat_commuting.json"]
        )
        first = Path(clt_record.artifacts[0]).parent
        second = Path(rerun.artifacts[0]).parent
        for csv in sorted(first.glob("*.csv")):
            same = filecmp.cmp(csv, second / csv.name, shallow=False)
            identical &= same
            print(f"{'✓' if same else '❌'} {csv.name}")

    print("\n" + "=" * 60)
    failed = [name for name, record in summary if not record.passed]
    for name in failed:
        print(f"❌ {name}")
    if failed or not identical:
        print("Suite FAILED")
        return 1
    print(f"✓ Suite passed ({len(summary)} runs)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
