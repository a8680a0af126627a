"""Smoke tests for the package layout."""

import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))


def test_imports():
    """Test that all modules can be imported."""
    try:
        from backend.config import settings
        from backend.main import main
        from backend.services.experiment_service import ExperimentService
        from engine.deviations import exp_equivalence_mc
        from engine.drivers import make_scalar_driver
        from engine.rough_paths import brownian_lift
        from engine.spde import SplittingSolver
        from engine.tangent import clt_experiment
        from frontend.visualizations import convergence_figure

        assert settings.tool_name == "rough-clt"
        assert main is not None
        assert ExperimentService is not None
        assert exp_equivalence_mc is not None
        assert make_scalar_driver is not None
        assert brownian_lift is not None
        assert SplittingSolver is not None
        assert clt_experiment is not None
        assert convergence_figure is not None

        print("✓ All modules import successfully")
    except ImportError as e:
        pytest.fail(f"Import failed: {e}")


def test_suite_script_exists():
    """Test that the example-suite script exists."""
    script = project_root / "scripts" / "run_suite.py"
    assert script.exists(), "Suite script should exist"
    assert script.is_file(), "Suite script should be a file"
    print("✓ Suite script exists")
