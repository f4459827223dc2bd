"""Experiment configuration and report records for the batch harness."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from electroheat.catalog import CATALOG
from electroheat.errors import ConfigError
from electroheat.mesh import H_MAX, H_MIN

try:
    from rapidfuzz import process
except ImportError:
    process = None

EXPERIMENT_IDS = ("E1", "E2", "E3", "E4", "E5", "E6")

# Suggestion cutoff for misspelled keys (0-100)
SUGGESTION_THRESHOLD = 60


def suggest(word: str, choices: Iterable[str]) -> Optional[str]:
    """Closest known name to ``word``, if rapidfuzz is installed and the match is good."""

    if process is None:
        return None
    match = process.extractOne(word, list(choices), score_cutoff=SUGGESTION_THRESHOLD)
    return match[0] if match else None


def _did_you_mean(word: str, choices: Iterable[str]) -> str:
    guess = suggest(word, choices)
    return f" (did you mean '{guess}'?)" if guess else ""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.replace(";", ",").split(",") if part.strip())


def _parse_params(text: str) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected name=value, got '{part.strip()}'")
        params[key.strip()] = float(value)
    return params


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    Text form: one ``key = value`` per line, ``#`` starts a comment. Sequences are
    comma-separated; ``catalog_params`` is ``name=value, name=value``.
    """

    experiment: str
    seed: int = 0
    mesh_h: float = 0.05
    refined_h: float = 0.0
    grid_n: int = 512
    grid_l: float = 2.0
    catalog: str = "constant"
    catalog_params: Dict[str, float] = field(default_factory=dict)
    kappa_scale: float = 1.0
    diffeo_count: int = 3
    diffeo_amplitude: float = 0.2
    identity_diffeo: bool = False
    excitations: int = 5
    k_sweep: Tuple[float, ...] = (10.0, 15.0, 20.0, 30.0, 40.0, 60.0, 80.0)
    order: int = 3
    t_final: float = 0.5
    dt: float = 0.01
    n_modes: int = 64
    theta: float = 0.5
    max_trace_order: int = 8
    recovery_tol: float = 1e-6
    gauge_tol: float = 0.05
    energy_tol: float = 0.02
    spectrum_tol: float = 0.01
    crossval_tol: float = 1e-3
    residual_tol: float = 1e-4
    cauchy_tol: float = 2e-3
    inverse_tol: float = 1e-6
    output_dir: str = ""

    def __post_init__(self) -> None:
        self.validate()

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(item.name for item in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "ExperimentConfig":
        """Build a config from raw string values, coercing each to its field type."""

        known = {item.name: item for item in dataclasses.fields(cls)}
        values: Dict[str, Any] = {}
        for key, raw in mapping.items():
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'{_did_you_mean(key, known)}")
            values[key] = _coerce(known[key], raw)
        if "experiment" not in values:
            raise ConfigError("config must name an experiment")
        return cls(**values)

    def validate(self) -> None:
        """Raise ConfigError for ids or parameters outside the documented ranges."""

        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment '{self.experiment}'{_did_you_mean(self.experiment, EXPERIMENT_IDS)}")
        if self.catalog not in CATALOG:
            raise ConfigError(f"unknown catalog family '{self.catalog}'{_did_you_mean(self.catalog, CATALOG)}")
        checks = [
            (H_MIN <= self.mesh_h <= H_MAX, f"mesh_h must lie in [{H_MIN}, {H_MAX}]"),
            (
                self.refined_h == 0.0 or H_MIN <= self.refined_h < self.mesh_h,
                f"refined_h must be 0 or lie in [{H_MIN}, mesh_h)",
            ),
            (self.grid_n >= 128 and not self.grid_n & (self.grid_n - 1), "grid_n must be a power of two >= 128"),
            (self.grid_l >= 2.0, "grid_l must be at least 2"),
            (self.kappa_scale > 0.0, "kappa_scale must be positive"),
            (self.diffeo_count >= 0, "diffeo_count must be non-negative"),
            (0.0 < self.diffeo_amplitude <= 0.3, "diffeo_amplitude must lie in (0, 0.3]"),
            (self.excitations >= 1, "excitations must be positive"),
            (len(self.k_sweep) >= 1 and min(self.k_sweep) > 0.0, "k_sweep needs positive wavenumbers"),
            (1 <= self.order <= 5, "order must lie in [1, 5]"),
            (self.t_final > 0.0 and self.dt > 0.0, "t_final and dt must be positive"),
            (self.n_modes >= 1, "n_modes must be positive"),
            (0.5 <= self.theta <= 1.0, "theta must lie in [0.5, 1]"),
            (0 <= self.max_trace_order <= 24, "max_trace_order must lie in [0, 24]"),
            (self.recovery_tol > 0.0, "recovery_tol must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    def with_overrides(self, overrides: Iterable[str]) -> "ExperimentConfig":
        mapping = self.to_text_mapping()
        mapping.update(parse_overrides(overrides))
        return ExperimentConfig.from_mapping(mapping)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["k_sweep"] = list(self.k_sweep)
        return data

    def to_text_mapping(self) -> Dict[str, str]:
        """String form of every field, readable back by :meth:`from_mapping`."""

        text: Dict[str, str] = {}
        for name, value in self.to_dict().items():
            if isinstance(value, dict):
                text[name] = ", ".join(f"{k}={v!r}" for k, v in sorted(value.items()))
            elif isinstance(value, list):
                text[name] = ", ".join(repr(float(v)) for v in value)
            else:
                text[name] = str(value)
        return text


def _coerce(item: dataclasses.Field, raw: str) -> Any:
    kind = item.type if isinstance(item.type, str) else getattr(item.type, "__name__", str(item.type))
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            return _parse_bool(raw)
        if kind.startswith("Tuple[float"):
            return _parse_floats(raw)
        if kind.startswith("Dict[str, float]"):
            return _parse_params(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for '{item.name}': {exc}") from exc


def parse_config_text(text: str) -> Dict[str, str]:
    """``key = value`` lines into a mapping; later keys win."""

    mapping: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {number}: expected 'key = value', got '{line.strip()}'")
        mapping[key.strip()] = value.strip()
    return mapping


def parse_overrides(overrides: Iterable[str]) -> Dict[str, str]:
    mapping: Dict[str, str] = {}
    for override in overrides:
        key, sep, value = override.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must be key=value, got '{override}'")
        mapping[key.strip()] = value.strip()
    return mapping


def load_config(path: Union[str, Path], overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Read a config file and apply ``--override`` pairs."""

    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {source}: {exc}") from exc
    mapping = parse_config_text(text)
    mapping.update(parse_overrides(overrides))
    return ExperimentConfig.from_mapping(mapping)


@dataclass(frozen=True)
class CheckResult:
    """One named check: ``value`` compared against ``threshold``."""

    name: str
    value: float
    threshold: float
    passed: bool
    comparison: str = "<="
    invariant: str = ""

    @classmethod
    def at_most(cls, name: str, value: float, threshold: float, invariant: str = "") -> "CheckResult":
        return cls(name, float(value), float(threshold), bool(value <= threshold), "<=", invariant)

    @classmethod
    def at_least(cls, name: str, value: float, threshold: float, invariant: str = "") -> "CheckResult":
        return cls(name, float(value), float(threshold), bool(value >= threshold), ">=", invariant)

    @classmethod
    def within(cls, name: str, value: float, target: float, rel_tol: float, invariant: str = "") -> "CheckResult":
        """Relative closeness of ``value`` to ``target``; ``threshold`` holds the tolerance."""

        error = abs(value - target) / abs(target) if target else abs(value)
        return cls(name, float(value), float(rel_tol), bool(error <= rel_tol), f"~{target:.6g}", invariant)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class ExperimentReport:
    """Checks, artifacts and metadata of one run; passes iff every check passes."""

    experiment: str
    checks: List[CheckResult] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and all(check.passed for check in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def check(self, name: str) -> CheckResult:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "metadata": self.metadata,
            "artifacts": list(self.artifacts),
            "wall_time": self.wall_time,
            "error": self.error,
        }


__all__ = [
    "EXPERIMENT_IDS",
    "suggest",
    "ExperimentConfig",
    "parse_config_text",
    "parse_overrides",
    "load_config",
    "CheckResult",
    "ExperimentReport",
]
