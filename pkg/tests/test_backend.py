"""Tests for experiment schemas, config builders and the command-line entry point."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add project root to path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from backend.config import Settings
from backend.main import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main
from backend.pipelines.builders import (
    DIRECTION_STREAM,
    LIFT_CHECK_STREAM,
    build_base,
    build_direction_lift,
    build_initial,
    build_tangent_config,
)
from backend.schemas.experiment_schemas import ExperimentConfig, GridSpec, LiftSpec
from engine.drivers import ScalarDriver, SphericalDriver

EXAMPLES = project_root / "data" / "examples"


def write_config(tmp_path: Path, payload: dict) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


def test_config_defaults():
    config = ExperimentConfig()
    assert config.experiment == "clt"
    assert config.lift_seed == config.seed
    assert len(config.schedule.epsilons) == 9
    assert ExperimentConfig(lift={"seed": 3}).lift_seed == 3


def test_settings_read_only_the_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("THREADS", "8")
    monkeypatch.setenv("TOOL_VERSION", "9.9.9")
    loaded = Settings()
    assert loaded.output_dir == tmp_path / "out"
    assert loaded.threads == 1
    assert loaded.tool_version == "0.1.0"
    assert "random_seed" not in Settings.model_fields


def test_experiment_aliases():
    assert ExperimentConfig(experiment="wz").experiment == "wong-zakai"
    assert ExperimentConfig(experiment="itovs").experiment == "ito-vs-strat"
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="ldp")


def test_config_rejects_unknown_fields():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"experiment": "clt", "epsilon": 0.1})


def test_grid_and_lift_validation():
    with pytest.raises(ValidationError):
        GridSpec(dt=0.003, horizon=0.01)
    with pytest.raises(ValidationError):
        LiftSpec(refinement=12)
    with pytest.raises(ValidationError):
        LiftSpec(p=3.0)
    assert GridSpec(dt=0.001, horizon=0.05).horizon == 0.05


def test_schedule_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig(schedule={"epsilons": [0.1, 0.05, 0.01]})
    with pytest.raises(ValidationError):
        ExperimentConfig(schedule={"epsilons": [0.1, 0.2, 0.05, 0.01]})
    with pytest.raises(ValidationError):
        ExperimentConfig(schedule={"n_samples": 10})


def test_invalid_example_names_the_field():
    with pytest.raises(ValidationError) as info:
        ExperimentConfig.model_validate_json((EXAMPLES / "invalid_schedule.json").read_text())
    locations = [".".join(str(p) for p in e["loc"]) for e in info.value.errors()]
    assert "schedule.epsilons" in locations


def test_examples_validate():
    for path in EXAMPLES.glob("*.json"):
        if path.name == "invalid_schedule.json":
            continue
        ExperimentConfig.model_validate_json(path.read_text())


def small_config(**overrides) -> ExperimentConfig:
    payload = {
        "grid": {"n_points": 16, "dt": 0.001, "horizon": 0.01},
        "lift": {"seed": 5, "refinement": 4},
        "schedule": {"epsilons": [0.0625, 0.03125, 0.015625, 0.0078125]},
    }
    payload.update(overrides)
    return ExperimentConfig.model_validate(payload)


def test_direction_streams_are_independent():
    config = small_config()
    first = build_direction_lift(config)
    again = build_direction_lift(config, DIRECTION_STREAM)
    other = build_direction_lift(config, LIFT_CHECK_STREAM)
    np.testing.assert_array_equal(first.level1, again.level1)
    assert not np.allclose(first.level1, other.level1)


def test_linear_lift_kind():
    config = small_config(lift={"kind": "linear", "channels": 2})
    lift = build_direction_lift(config)
    np.testing.assert_allclose(lift.level1[:, 1], lift.grid.points)


def test_llg_initial_is_unit():
    config = small_config(equation="llg")
    u0 = build_initial(config)
    np.testing.assert_allclose(np.linalg.norm(u0, axis=-1), 1.0)
    assert isinstance(build_base(config), SphericalDriver)


def test_smooth_base_gets_crossed_maps():
    zero = build_tangent_config(small_config())
    assert isinstance(zero.base, ScalarDriver)
    assert zero.base_is_zero
    smooth = build_tangent_config(small_config(driver={"base": "smooth"}))
    assert not smooth.base_is_zero
    assert smooth.base_direction is not None and smooth.direction_base is not None


def test_cli_pass(tmp_path, capsys):
    config = EXAMPLES / "lift_check.json"
    code = main(["lift-check", "--config", str(config), "--out", str(tmp_path)])
    assert code == EXIT_PASS
    assert capsys.readouterr().out.startswith("PASS lift-check ")
    (run_dir,) = tmp_path.iterdir()
    assert (run_dir / "lift_check.csv").exists()
    assert (run_dir / "lift.csv").exists()


def test_cli_alias_and_seed_override(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {"grid": {"n_points": 16, "dt": 0.001, "horizon": 0.016}, "refinements": [4, 16]},
    )
    code = main(["wz", "--config", str(config), "--seed", "9", "--out", str(tmp_path / "out")])
    assert code == EXIT_PASS
    (run_dir,) = (tmp_path / "out").iterdir()
    record = json.loads((run_dir / "run_record.json").read_text())
    assert record["config"]["experiment"] == "wong-zakai"
    assert record["config"]["seed"] == 9


def test_cli_numeric_failure(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {"grid": {"n_points": 16, "dt": 0.001, "horizon": 0.016}, "refinements": [3]},
    )
    code = main(["wong-zakai", "--config", str(config), "--out", str(tmp_path / "out")])
    captured = capsys.readouterr()
    assert code == EXIT_FAIL
    assert "failure: wong-zakai" in captured.err
    assert captured.out.startswith("FAIL wong-zakai ")


def test_cli_config_error(tmp_path, capsys):
    config = EXAMPLES / "invalid_schedule.json"
    code = main(["clt", "--config", str(config), "--out", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "schedule.epsilons" in capsys.readouterr().err
    assert not any(tmp_path.iterdir())


def test_cli_missing_config_file(tmp_path, capsys):
    code = main(["clt", "--config", str(tmp_path / "missing.json")])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_unknown_experiment():
    with pytest.raises(SystemExit):
        main(["ldp"])
