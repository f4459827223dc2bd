"""High-level orchestration for running configured experiments."""

from __future__ import annotations

import logging
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import scipy

from electroheat.errors import ConfigError, ElectroheatError, ParameterError
from models.experiment_config import ExperimentConfig, ExperimentReport, load_config
from services.baselines import BaselineError, BaselineStore
from services.experiments import EXPERIMENTS, ExperimentOutcome
from services.reports import ReportWriter

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "ELECTROHEAT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "output"

EXIT_PASS = 0
EXIT_CONFIG = 2
EXIT_FAILED = 3


@dataclass(frozen=True)
class RunResult:
    """Report of one run together with where its artifacts went."""

    config: ExperimentConfig
    report: ExperimentReport
    directory: Path
    report_path: Path


class ExperimentRunner:
    """Coordinate config -> experiment body -> baseline comparison -> report.json."""

    def __init__(self, baselines: Optional[BaselineStore] = None) -> None:
        self._baselines = baselines or BaselineStore()

    def output_directory(self, config: ExperimentConfig) -> Path:
        if config.output_dir:
            return Path(config.output_dir)
        return Path(os.getenv(OUTPUT_ENV_VAR, DEFAULT_OUTPUT_DIR)) / config.experiment

    def run(self, config: ExperimentConfig, *, freeze: bool = False) -> RunResult:
        """Run one experiment; numerical failures end up in ``report.error``, never raised.

        Raises:
            BaselineError: In freeze mode, if the run did not pass.
        """

        experiment = EXPERIMENTS[config.experiment]
        directory = self.output_directory(config)
        writer = ReportWriter(directory)
        report = ExperimentReport(experiment=config.experiment, metadata={"title": experiment.title})

        logger.info("Running %s (%s) into %s", config.experiment, experiment.title, directory)
        started = time.perf_counter()
        outcome = ExperimentOutcome()
        try:
            outcome = experiment.body(config, writer)
        except ElectroheatError as e:
            logger.error("%s failed: %s", config.experiment, e)
            report.error = f"{type(e).__name__}: {e}"
        report.wall_time = time.perf_counter() - started

        for check in outcome.checks:
            report.add(check)
        report.metadata.update(outcome.metadata)
        report.metadata["regression"] = dict(sorted(outcome.regression.items()))
        report.metadata["config"] = config.to_dict()
        report.metadata["environment"] = _environment()

        if freeze:
            if not report.passed:
                raise BaselineError(f"refusing to freeze baselines of a failing {config.experiment} run")
            self._baselines.freeze(config.experiment, outcome.regression, config.to_dict())
        elif not report.error:
            for check in self._baselines.compare(config.experiment, outcome.regression):
                report.add(check)

        failed = [check.name for check in report.checks if not check.passed]
        if failed:
            logger.warning("%s: %d check(s) failed: %s", config.experiment, len(failed), ", ".join(failed))
        report_path = writer.write_report(report)
        return RunResult(config=config, report=report, directory=directory, report_path=report_path)

    def run_many(self, configs: Sequence[ExperimentConfig], max_workers: int = 1) -> List[RunResult]:
        """Independent runs, optionally in parallel; results keep the order of ``configs``."""

        if max_workers <= 1 or len(configs) <= 1:
            return [self.run(config) for config in configs]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(self.run, configs))


def _environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def exit_code(report: ExperimentReport) -> int:
    return EXIT_PASS if report.passed else EXIT_FAILED


def run_path(
    path: str,
    overrides: Iterable[str] = (),
    *,
    freeze: bool = False,
    runner: Optional[ExperimentRunner] = None,
) -> int:
    """Load, run and report one config file; returns the process exit code."""

    try:
        config = load_config(path, overrides)
    except (ConfigError, ParameterError) as e:
        logger.error("Invalid configuration %s: %s", path, e)
        return EXIT_CONFIG
    runner = runner or ExperimentRunner()
    try:
        result = runner.run(config, freeze=freeze)
    except BaselineError as e:
        logger.error("%s", e)
        return EXIT_FAILED
    return exit_code(result.report)


__all__ = [
    "EXIT_CONFIG",
    "EXIT_FAILED",
    "EXIT_PASS",
    "ExperimentRunner",
    "RunResult",
    "exit_code",
    "run_path",
]
