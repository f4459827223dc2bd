import json

import pytest

from electroheat.errors import ConfigError
from models.experiment_config import (
    CheckResult,
    ExperimentConfig,
    ExperimentReport,
    load_config,
    parse_config_text,
    parse_overrides,
    suggest,
)
from services.pipeline import EXIT_CONFIG, run_path

SAMPLE = """
# comment line
experiment = E4
grid_n = 256          # trailing comment
catalog = gaussian
catalog_params = amplitude=0.01, width=0.5
k_sweep = 10, 20, 40
identity_diffeo = yes
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "E4.cfg"
    path.write_text(SAMPLE, encoding="utf-8")
    return path


def test_parse_and_coerce(config_file):
    config = load_config(config_file)
    assert config.experiment == "E4"
    assert config.grid_n == 256
    assert config.catalog_params == {"amplitude": 0.01, "width": 0.5}
    assert config.k_sweep == (10.0, 20.0, 40.0)
    assert config.identity_diffeo is True
    assert config.mesh_h == 0.05


def test_overrides_win(config_file):
    config = load_config(config_file, ["grid_n=128", "order = 2"])
    assert config.grid_n == 128
    assert config.order == 2
    assert config.with_overrides(["order=4"]).order == 4


def test_text_mapping_reads_back(config_file):
    config = load_config(config_file)
    assert ExperimentConfig.from_mapping(config.to_text_mapping()) == config


def test_misspelled_key_gets_a_suggestion():
    pytest.importorskip("rapidfuzz")
    assert suggest("mesh_hh", ExperimentConfig.field_names()) == "mesh_h"
    with pytest.raises(ConfigError, match="did you mean 'mesh_h'"):
        ExperimentConfig.from_mapping({"experiment": "E1", "mesh_hh": "0.1"})


@pytest.mark.parametrize(
    "mapping",
    [
        {"mesh_h": "0.1"},
        {"experiment": "E9"},
        {"experiment": "E1", "mesh_h": "0.7"},
        {"experiment": "E1", "grid_n": "300"},
        {"experiment": "E1", "theta": "0.2"},
        {"experiment": "E1", "order": "7"},
        {"experiment": "E1", "mesh_h": "0.001"},
        {"experiment": "E1", "mesh_h": "0.05", "refined_h": "0.001"},
        {"experiment": "E1", "refined_h": "0.1", "mesh_h": "0.05"},
        {"experiment": "E1", "catalog": "gausian"},
        {"experiment": "E1", "seed": "three"},
        {"experiment": "E1", "identity_diffeo": "maybe"},
        {"experiment": "E1", "catalog_params": "amplitude"},
    ],
)
def test_invalid_configs(mapping):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(mapping)


def test_malformed_lines():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("experiment = E1\njust words\n")
    with pytest.raises(ConfigError):
        parse_overrides(["mesh_h"])


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_check_results():
    assert CheckResult.at_most("a", 0.5, 1.0).passed
    assert not CheckResult.at_least("b", 0.5, 1.0).passed
    close = CheckResult.within("c", 3.15, 3.14159, 0.01)
    assert close.passed
    assert close.comparison.startswith("~")
    assert not CheckResult.within("d", 0.1, 0.0, 0.01).passed


def test_report_passes_only_without_failures_or_error():
    report = ExperimentReport(experiment="E6")
    report.add(CheckResult.at_most("ok", 0.0, 1.0))
    assert report.passed
    report.error = "SolverError: singular"
    assert not report.passed
    payload = json.loads(json.dumps(report.to_dict()))
    assert payload["checks"][0]["name"] == "ok"
    assert report.check("ok").threshold == 1.0
    with pytest.raises(KeyError):
        report.check("missing")


def test_mesh_below_the_mesher_floor_is_a_config_error(tmp_path):
    path = tmp_path / "E2.cfg"
    path.write_text(f"experiment = E2\nmesh_h = 0.001\noutput_dir = {tmp_path}\n", encoding="utf-8")
    assert run_path(str(path)) == EXIT_CONFIG
