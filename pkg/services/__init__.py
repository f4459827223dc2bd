"""Service-layer utilities for the electroheat experiment harness."""

from .baselines import BaselineError, BaselineStore, get_baselines
from .experiments import EXPERIMENTS, Experiment, ExperimentOutcome
from .pipeline import ExperimentRunner, RunResult, exit_code, run_path
from .reports import ReportWriter

__all__ = [
    "BaselineError",
    "BaselineStore",
    "get_baselines",
    "EXPERIMENTS",
    "Experiment",
    "ExperimentOutcome",
    "ExperimentRunner",
    "RunResult",
    "exit_code",
    "run_path",
    "ReportWriter",
]
