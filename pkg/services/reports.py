"""Report and CSV artifact writing for experiment runs."""

from __future__ import annotations

import csv
import json
import logging
import threading
from pathlib import Path
from typing import Dict, Iterable, Sequence, Union

from models.experiment_config import ExperimentReport

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"

_DIRECTORY_LOCKS: Dict[Path, threading.Lock] = {}
_REGISTRY_LOCK = threading.Lock()


def _lock_for(directory: Path) -> threading.Lock:
    key = directory.resolve()
    with _REGISTRY_LOCK:
        return _DIRECTORY_LOCKS.setdefault(key, threading.Lock())


def _format(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.12e}"
    return str(value)


class ReportWriter:
    """Writes CSV artifacts and ``report.json`` into one output directory.

    Writers sharing a directory serialize on a per-directory lock.
    """

    def __init__(self, directory: Union[str, Path]) -> None:
        self.directory = Path(directory)
        self._lock = _lock_for(self.directory)
        self.written: list[str] = []

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        """Deterministic CSV: floats in ``%.12e``, header joined by ``", "``."""

        path = self.directory / name
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            with path.open("w", newline="", encoding="utf-8") as handle:
                handle.write(", ".join(header) + "\n")
                writer = csv.writer(handle, lineterminator="\n")
                for row in rows:
                    writer.writerow([_format(value) for value in row])
        self.record(path)
        return path

    def record(self, path: Union[str, Path]) -> None:
        """Register an artifact written by a module-level CSV writer."""

        name = Path(path).name
        if name not in self.written:
            self.written.append(name)

    def write_report(self, report: ExperimentReport) -> Path:
        path = self.directory / REPORT_NAME
        report.artifacts = sorted(set(report.artifacts) | set(self.written))
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info("Wrote %s (%s)", path, "pass" if report.passed else "FAIL")
        return path


__all__ = ["REPORT_NAME", "ReportWriter"]
