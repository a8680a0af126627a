"""Experiment dispatch: config → engine operations → artifacts and a run record.

Each `run_<experiment>` method returns an `ExperimentOutcome`. Numeric
failures of individual cells are collected with the cell identifier rather
than raised, so a run always ends with a persisted record.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from backend.config import settings
from backend.pipelines.artifacts import ArtifactWriter, config_hash
from backend.pipelines.builders import (
    CONTINUITY_STREAM,
    LIFT_CHECK_STREAM,
    WONG_ZAKAI_STREAM,
    build_direction_lift,
    build_driver,
    build_initial,
    build_monte_carlo_config,
    build_profile,
    build_solver_config,
    build_space,
    build_tangent_config,
)
from backend.schemas.experiment_schemas import EXPERIMENTS, CellResult, ExperimentConfig, RunRecord
from engine.deviations import (
    PRESETS,
    CameronMartinPath,
    LambdaSchedule,
    exp_equivalence_mc,
    rate_point,
)
from engine.drivers import ScalarDriver, SphericalDriver
from engine.rough_paths import (
    brownian_lift,
    chen_defect,
    derive_seed,
    geometricity_defect,
    homogeneous_norm,
    joint_lift_young,
    save_lift,
)
from engine.spde import (
    BlowUpError,
    continuity_sweep,
    discrete_norms,
    energy_report,
    norm_profiles,
    save_field,
    smooth_direction_lifts,
    solve,
    wong_zakai_sweep,
)
from engine.tangent import clt_experiment, ito_vs_strat_experiment
from frontend.visualizations import convergence_figure, table_figure

logger = logging.getLogger(__name__)

ALGEBRA_TOLERANCE = 1e-10
SPHERE_TOLERANCE = 1e-10
LIFT_CHECK_SEEDS = 5


@dataclass
class ExperimentOutcome:
    """Cells, failures and the pass/fail summary of one experiment."""

    cells: List[CellResult] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and all(c.passed is not False for c in self.cells)


class ExperimentService:
    """Runs one experiment config end to end."""

    def __init__(self, output_dir: Optional[Path] = None, workers: int = 1):
        """
        Initialize service.

        Args:
            output_dir: Root of run directories, or None for the settings value
            workers: Process count for independent cells
        """
        self.output_dir = Path(output_dir) if output_dir else settings.output_dir
        self.workers = max(1, workers)
        self.runners: Dict[str, Callable[[ExperimentConfig, ArtifactWriter], ExperimentOutcome]]
        self.runners = {
            "lift-check": self.run_lift_check,
            "solve": self.run_solve,
            "clt": self.run_clt,
            "ito-vs-strat": self.run_ito_vs_strat,
            "wong-zakai": self.run_wong_zakai,
            "mdp": self.run_mdp,
            "continuity": self.run_continuity,
        }

    def run(self, config: ExperimentConfig, base_dir: Optional[Path] = None) -> RunRecord:
        """
        Run an experiment and persist its artifacts and run record.

        Args:
            config: Resolved experiment configuration
            base_dir: Directory that relative suite entries resolve against

        Returns:
            RunRecord (also written to run_record.json)
        """
        resolved = config.model_dump(mode="json")
        digest = config_hash(resolved)
        run_dir = self.output_dir / f"{config.experiment}-{digest[:12]}"
        writer = ArtifactWriter(run_dir, digest, settings.tool_version)
        logger.info(f"Starting {config.experiment} run {digest[:12]} in {run_dir}")

        started = time.perf_counter()
        writer.json("config", {"config": resolved})
        if config.experiment == "suite":
            outcome = self.run_suite(config, writer, base_dir)
        else:
            outcome = self._guarded(config, writer)

        record = RunRecord(
            config=resolved,
            config_hash=digest,
            tool_version=settings.tool_version,
            wall_clock_seconds=time.perf_counter() - started,
            cells=outcome.cells,
            failures=outcome.failures,
            passed=outcome.passed,
        )
        record.artifacts = [str(p) for p in writer.written] + [str(run_dir / "run_record.json")]
        with open(run_dir / "run_record.json", "w") as f:
            json.dump(record.model_dump(mode="json"), f, indent=2, sort_keys=True)
        logger.info(
            f"Run {digest[:12]} finished in {record.wall_clock_seconds:.1f}s: "
            f"{'PASS' if record.passed else 'FAIL'} ({len(record.cells)} cells, "
            f"{len(record.failures)} failures)"
        )
        return record

    def _guarded(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        try:
            return self.runners[config.experiment](config, writer)
        except (BlowUpError, ValueError, FloatingPointError) as e:
            logger.error(f"Experiment {config.experiment} failed: {str(e)}")
            return ExperimentOutcome(failures=[f"{config.experiment}: {str(e)}"])

    def run_lift_check(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        """Chen and geometricity defects of Brownian lifts and their Young joint lifts."""
        grid = build_solver_config(config).time_grid()
        channels = 3 if config.equation == "llg" else config.lift.channels
        smooth = np.sin(2.0 * np.pi * grid.points / grid.horizon)
        outcome = ExperimentOutcome()
        rows = []
        for index in range(LIFT_CHECK_SEEDS):
            seed = derive_seed(config.lift_seed, LIFT_CHECK_STREAM + index)
            lift = brownian_lift(seed, grid, config.lift.refinement, d=channels, p=config.lift.p)
            joint = joint_lift_young(lift, smooth, q=1.0)
            row = {
                "seed": seed,
                "chen_defect": chen_defect(lift),
                "geometricity_defect": geometricity_defect(lift),
                "joint_chen_defect": chen_defect(joint),
                "homogeneous_norm": homogeneous_norm(lift),
            }
            passed = max(
                row["chen_defect"], row["geometricity_defect"], row["joint_chen_defect"]
            ) <= ALGEBRA_TOLERANCE
            rows.append(row)
            outcome.cells.append(CellResult(cell=f"seed={seed}", values=row, passed=passed))
            if index == 0:
                save_lift(lift, writer.run_dir / "lift.csv", {"config_hash": writer.digest})
                writer.written.append(writer.run_dir / "lift.csv")
        writer.table("lift_check", pd.DataFrame(rows), {"experiment": "lift-check"})
        return outcome

    def run_solve(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        """Single solve with norm and energy reports."""
        driver = build_driver(config, build_direction_lift(config))
        solution = solve(
            config.equation, build_initial(config), driver, build_solver_config(config)
        )
        norms = discrete_norms(solution, p=config.lift.p)
        energy = energy_report(solution, driver=driver)
        save_field(solution, writer.run_dir / "solution.h5", {"config_hash": writer.digest})
        writer.written.append(writer.run_dir / "solution.h5")
        profiles = norm_profiles(solution)
        writer.table(
            "norm_profiles",
            pd.DataFrame(
                {
                    "t": solution.times.points,
                    "l2_squared": profiles[:, 0],
                    "h1_squared": profiles[:, 1],
                    "h2_squared": profiles[:, 2],
                }
            ),
        )
        values = {"norms": norms.to_dict(), "energy": energy.to_dict(), **solution.diagnostics}
        writer.json("norms", values)
        passed = None
        if config.equation == "llg":
            passed = solution.diagnostics["max_sphere_deviation"] <= SPHERE_TOLERANCE
        return ExperimentOutcome(cells=[CellResult(cell="solve", values=values, passed=passed)])

    def _convergence_outcome(self, name: str, report, writer: ArtifactWriter) -> ExperimentOutcome:
        writer.table(name, report.to_frame(), {"metric": report.metric})
        writer.table(f"{name}_loglog", report.plot_frame())
        writer.json(f"{name}_report", report.to_dict())
        writer.plot(name, convergence_figure(report, title=name))
        outcome = ExperimentOutcome()
        for eps, err, included in zip(report.epsilons, report.errors, report.included):
            outcome.cells.append(
                CellResult(cell=f"eps={eps:.6g}", values={"error": err, "included": included})
            )
        outcome.failures.extend(f for f in report.failures if f is not None)
        outcome.cells.append(
            CellResult(
                cell="fit",
                values={"slope": report.slope, "residual": report.residual},
                passed=report.passed,
            )
        )
        return outcome

    def run_clt(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        report = clt_experiment(build_tangent_config(config), workers=self.workers)
        return self._convergence_outcome("clt", report, writer)

    def run_ito_vs_strat(
        self, config: ExperimentConfig, writer: ArtifactWriter
    ) -> ExperimentOutcome:
        report = ito_vs_strat_experiment(build_tangent_config(config))
        return self._convergence_outcome("ito_vs_strat", report, writer)

    def run_wong_zakai(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        space = build_space(config)
        report = wong_zakai_sweep(
            build_initial(config, space),
            build_profile(space, config.driver.profile),
            space,
            derive_seed(config.lift_seed, WONG_ZAKAI_STREAM),
            config.refinements,
            build_solver_config(config),
            config.equation,
        )
        frame = report.to_frame()
        writer.table("wong_zakai", frame)
        writer.json("wong_zakai_report", report.to_dict())
        writer.plot(
            "wong_zakai",
            table_figure(frame.dropna(), "refinement", "gap_to_next", "Wong-Zakai gaps"),
        )
        cell = CellResult(cell="wong-zakai", values=report.to_dict(), passed=report.decreasing)
        return ExperimentOutcome(cells=[cell])

    def run_continuity(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        base = build_driver(config, build_direction_lift(config))
        if not isinstance(base, ScalarDriver):
            raise ValueError("Continuity sweep runs on scalar equations")
        directions = smooth_direction_lifts(
            base.grid,
            config.directions,
            derive_seed(config.seed, CONTINUITY_STREAM),
            channels=base.channels,
        )
        report = continuity_sweep(
            build_initial(config),
            base,
            directions,
            build_solver_config(config),
            config.equation,
            config.continuity_delta,
        )
        writer.table("continuity", report.to_frame())
        writer.json("continuity_report", report.to_dict())
        cell = CellResult(
            cell="continuity",
            values={"max_ratio": report.max_ratio, "halving_ratios": report.halving_ratios},
            passed=report.passed,
        )
        return ExperimentOutcome(cells=[cell])

    def run_mdp(self, config: ExperimentConfig, writer: ArtifactWriter) -> ExperimentOutcome:
        """Schedule validation, one rate point and the exponential-equivalence table."""
        outcome = ExperimentOutcome()
        epsilons = config.schedule.epsilons
        schedule_rows = []
        for name in PRESETS:
            check = LambdaSchedule.from_preset(name).check(epsilons)
            schedule_rows.append({"preset": name, "valid": check.valid})
        writer.table("schedules", pd.DataFrame(schedule_rows))
        selected = LambdaSchedule.from_preset(config.schedule.lambda_preset)
        valid = selected.check(epsilons).valid
        outcome.cells.append(
            CellResult(cell=f"schedule={selected.name}", values={"valid": valid}, passed=valid)
        )
        if not valid:
            outcome.failures.append(f"schedule={selected.name}: not a moderate-deviation speed")
            return outcome

        space = build_space(config)
        solver_config = build_solver_config(config)
        grid = solver_config.time_grid()
        if config.equation == "llg":
            zero = SphericalDriver.zero(grid, space)
            h = CameronMartinPath(grid, np.ones((grid.n + 1, 3)))
        else:
            zero = ScalarDriver.zero(grid, space)
            h = CameronMartinPath(grid, np.ones(grid.n + 1))
        base = solve(config.equation, build_initial(config, space), zero, solver_config)
        point = rate_point(h, base, config.equation, cfg=solver_config)
        skeleton_norms = discrete_norms(point.solution, time_variation=False)
        outcome.cells.append(
            CellResult(
                cell="rate-point",
                values={"energy": point.energy, "skeleton": skeleton_norms.to_dict()},
            )
        )

        if config.equation != "llg":
            report = exp_equivalence_mc(build_monte_carlo_config(config), workers=self.workers)
            writer.table("exp_equivalence", report.table, {"delta": config.schedule.delta})
            writer.json(
                "exp_equivalence_report",
                {k: v for k, v in report.to_dict().items() if k != "table"},
            )
            outcome.cells.append(
                CellResult(
                    cell="exp-equivalence",
                    values={"exponential_moment": report.exponential_moment},
                    passed=report.trend_passed,
                )
            )
        return outcome

    def run_suite(
        self, config: ExperimentConfig, writer: ArtifactWriter, base_dir: Optional[Path] = None
    ) -> ExperimentOutcome:
        """Run the listed config files, or every experiment on this config."""
        if config.suite:
            root = base_dir or Path(".")
            members = []
            for entry in config.suite:
                path = Path(entry) if Path(entry).is_absolute() else root / entry
                members.append((entry, ExperimentConfig.model_validate_json(path.read_text())))
        else:
            members = [
                (tag, config.model_copy(update={"experiment": tag}))
                for tag in EXPERIMENTS
                if tag != "suite"
            ]
        outcome = ExperimentOutcome()
        rows = []
        for label, member in members:
            logger.info(f"Suite member: {label}")
            record = self.run(member)
            rows.append(
                {"member": label, "config_hash": record.config_hash, "passed": record.passed}
            )
            outcome.cells.append(
                CellResult(
                    cell=f"member={label}",
                    values={"config_hash": record.config_hash},
                    passed=record.passed,
                )
            )
            outcome.failures.extend(f"{label}: {f}" for f in record.failures)
        writer.table("suite", pd.DataFrame(rows))
        return outcome
