"""Test for artifact integrity and consistency."""

import json
import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from backend.config import settings
from backend.pipelines.artifacts import config_hash
from backend.schemas.experiment_schemas import ExperimentConfig
from backend.services.experiment_service import ExperimentService
from engine.rough_paths.serialization import read_table
from engine.spde import load_field


@pytest.fixture
def solve_config():
    return ExperimentConfig.model_validate(
        {
            "experiment": "solve",
            "grid": {"n_points": 16, "dt": 0.001, "horizon": 0.01},
            "lift": {"seed": 3, "refinement": 4},
        }
    )


def test_artifact_integrity(tmp_path, solve_config):
    """Test that all artifacts are present, versioned, and carry the config hash."""
    record = ExperimentService(output_dir=tmp_path).run(solve_config)
    run_dir = Path(record.artifacts[0]).parent

    # Check artifacts exist
    for artifact in record.artifacts:
        assert Path(artifact).exists(), f"{artifact} should exist"
    names = {Path(a).name for a in record.artifacts}
    assert {"config.json", "norms.json", "norm_profiles.csv", "solution.h5"} <= names
    assert "run_record.json" in names

    # Validate run record
    with open(run_dir / "run_record.json", "r") as f:
        stored = json.load(f)
    assert stored["config_hash"] == record.config_hash
    assert stored["tool_version"] == settings.tool_version
    assert stored["wall_clock_seconds"] >= 0
    assert stored["passed"] is True
    assert config_hash(stored["config"]) == record.config_hash
    assert run_dir.name == f"solve-{record.config_hash[:12]}"

    # Validate tables and documents
    frame, header = read_table(run_dir / "norm_profiles.csv")
    assert header["config_hash"] == record.config_hash
    assert header["tool_version"] == settings.tool_version
    assert len(frame) == 11
    with open(run_dir / "norms.json", "r") as f:
        norms = json.load(f)
    assert norms["config_hash"] == record.config_hash

    # Validate the stored solution
    solution = load_field(run_dir / "solution.h5")
    assert solution.times.n == 10

    print("✓ Artifact integrity test passed")


def test_llg_solve_checks_the_sphere(tmp_path):
    config = ExperimentConfig.model_validate(
        {
            "experiment": "solve",
            "equation": "llg",
            "grid": {"n_points": 16, "dt": 0.0001, "horizon": 0.002},
            "lift": {"seed": 3, "refinement": 4},
        }
    )
    record = ExperimentService(output_dir=tmp_path).run(config)
    (cell,) = record.cells
    assert cell.passed is True
    assert cell.values["max_sphere_deviation"] <= 1e-10


def test_suite_runs_listed_configs(tmp_path):
    """Suite entries resolve against the suite file's directory."""
    (tmp_path / "member.json").write_text(
        json.dumps(
            {
                "experiment": "lift-check",
                "grid": {"n_points": 16, "dt": 0.001, "horizon": 0.02},
                "lift": {"refinement": 4},
            }
        )
    )
    suite = ExperimentConfig(experiment="suite", suite=["member.json"])
    record = ExperimentService(output_dir=tmp_path / "out").run(suite, base_dir=tmp_path)
    assert record.passed
    (cell,) = record.cells
    assert cell.cell == "member=member.json"
    frame, header = read_table(tmp_path / "out" / f"suite-{record.config_hash[:12]}" / "suite.csv")
    assert frame["passed"].tolist() == [True]
    assert header["config_hash"] == record.config_hash
