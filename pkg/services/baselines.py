"""Versioned regression values frozen from earlier experiment runs."""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from models.experiment_config import CheckResult

logger = logging.getLogger(__name__)

BASELINE_ENV_VAR = "ELECTROHEAT_BASELINE_DIR"
DEFAULT_BASELINE_DIR = "baselines"

# Absolute tolerance when reproducing a frozen value
REPRODUCE_TOL = 1e-6


class BaselineError(Exception):
    """Base exception for baseline storage errors."""
    pass


class BaselineStore:
    """JSON file per experiment under the baseline directory, keys sorted for stable diffs."""

    def __init__(self, directory: Optional[Union[str, Path]] = None):
        self.directory = Path(directory or os.getenv(BASELINE_ENV_VAR, DEFAULT_BASELINE_DIR))
        self._lock = threading.Lock()

    def _path(self, experiment: str) -> Path:
        return self.directory / f"{experiment}.json"

    def load(self, experiment: str) -> Dict[str, float]:
        """Frozen values of ``experiment``; empty when nothing was frozen yet.

        Raises:
            BaselineError: If the file exists but cannot be parsed.
        """
        path = self._path(experiment)
        if not path.exists():
            return {}
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise BaselineError(f"Failed to read baseline {path}: {e}") from e
        values = data.get("values", {})
        if not isinstance(values, dict):
            raise BaselineError(f"Baseline {path} has no 'values' table")
        return {str(key): float(value) for key, value in values.items()}

    def freeze(self, experiment: str, values: Mapping[str, float], config: Optional[Mapping] = None) -> Path:
        """Write ``values`` as the new baseline of ``experiment``."""

        path = self._path(experiment)
        payload = {
            "experiment": experiment,
            "values": {key: float(value) for key, value in sorted(values.items())},
            "config": dict(config or {}),
        }
        try:
            with self._lock:
                self.directory.mkdir(parents=True, exist_ok=True)
                path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise BaselineError(f"Failed to write baseline {path}: {e}") from e
        logger.info("Froze %d baseline value(s) for %s", len(values), experiment)
        return path

    def compare(self, experiment: str, measured: Mapping[str, float], tol: float = REPRODUCE_TOL) -> list[CheckResult]:
        """One ``baseline:<name>`` check per frozen value that was measured again."""

        frozen = self.load(experiment)
        if not frozen:
            logger.warning("No baseline frozen for %s; regression checks skipped", experiment)
            return []
        checks = []
        for name, expected in sorted(frozen.items()):
            if name not in measured:
                logger.warning("Baseline value '%s' of %s was not measured in this run", name, experiment)
                continue
            gap = abs(float(measured[name]) - expected)
            checks.append(CheckResult.at_most(f"baseline:{name}", gap, tol, invariant="frozen regression value"))
        return checks


def get_baselines(directory: Optional[Union[str, Path]] = None) -> BaselineStore:
    """Get a BaselineStore instance (convenience factory function)."""
    return BaselineStore(directory)


__all__ = ["BaselineStore", "BaselineError", "get_baselines"]
