"""Streamlit dashboard for running experiments and browsing their reports."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List

import streamlit as st
from dotenv import load_dotenv

from electroheat.errors import ConfigError
from models.experiment_config import EXPERIMENT_IDS, ExperimentConfig, ExperimentReport, load_config
from services import EXPERIMENTS, ExperimentRunner, RunResult
from services.reports import REPORT_NAME

CONFIG_DIR = Path("configs")

load_dotenv()

logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

RUNNER = ExperimentRunner()


def _init_session_state() -> None:
    defaults = {
        "results": {},
        "overrides": "",
        "selected_experiment": EXPERIMENT_IDS[0],
    }
    for key, value in defaults.items():
        if key not in st.session_state:
            st.session_state[key] = value


def _load_selected(experiment: str, overrides: List[str]) -> ExperimentConfig:
    """Config file for ``experiment`` if one exists, else the defaults, plus overrides."""

    path = CONFIG_DIR / f"{experiment}.cfg"
    if path.exists():
        return load_config(path, overrides)
    return ExperimentConfig(experiment=experiment).with_overrides(overrides)


def _read_saved_report(config: ExperimentConfig) -> Dict | None:
    path = RUNNER.output_directory(config) / REPORT_NAME
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def _render_checks(report: ExperimentReport) -> None:
    rows = [
        {
            "check": check.name,
            "value": f"{check.value:.4e}",
            "comparison": check.comparison,
            "threshold": f"{check.threshold:.4e}",
            "status": "pass" if check.passed else "FAIL",
            "invariant": check.invariant,
        }
        for check in report.checks
    ]
    st.dataframe(rows, use_container_width=True)


def _render_artifacts(result: RunResult) -> None:
    for name in result.report.artifacts:
        path = result.directory / name
        if not path.exists():
            continue
        st.download_button(
            label=f"Download {name}",
            data=path.read_bytes(),
            file_name=name,
            mime="text/csv" if name.endswith(".csv") else "application/json",
            key=f"download-{result.config.experiment}-{name}",
        )


def _render_result(result: RunResult) -> None:
    report = result.report
    passed = sum(check.passed for check in report.checks)
    col1, col2, col3 = st.columns(3)
    col1.metric("Checks passed", f"{passed}/{len(report.checks)}")
    col2.metric("Wall time", f"{report.wall_time:.1f} s")
    col3.metric("Status", "pass" if report.passed else "FAIL")
    if report.error:
        st.error(report.error)
    _render_checks(report)
    with st.expander("Regression values"):
        st.json(report.metadata.get("regression", {}))
    with st.expander("Configuration"):
        st.json(result.config.to_dict())
    _render_artifacts(result)


def main() -> None:
    st.set_page_config(page_title="Electroheat Lab", layout="wide")
    _init_session_state()

    with st.sidebar:
        st.header("Experiment")
        experiment = st.selectbox(
            "Experiment",
            options=list(EXPERIMENT_IDS),
            index=EXPERIMENT_IDS.index(st.session_state.selected_experiment),
            format_func=lambda key: f"{key}: {EXPERIMENTS[key].title}",
        )
        st.session_state.selected_experiment = experiment
        st.session_state.overrides = st.text_area(
            "Overrides (one key=value per line)",
            value=st.session_state.overrides,
            help="Applied on top of configs/<id>.cfg, e.g. mesh_h=0.1",
        )
        run_clicked = st.button("Run", type="primary")

    st.title("Electroheat Lab")
    st.caption(EXPERIMENTS[experiment].title)

    overrides = [line.strip() for line in st.session_state.overrides.splitlines() if line.strip()]
    try:
        config = _load_selected(experiment, overrides)
    except ConfigError as e:
        st.error(f"Invalid configuration: {e}")
        return

    if run_clicked:
        with st.spinner(f"Running {experiment}..."):
            st.session_state.results[experiment] = RUNNER.run(config)

    result = st.session_state.results.get(experiment)
    if result is not None:
        _render_result(result)
        return

    saved = _read_saved_report(config)
    if saved:
        st.info("Showing the last saved report; press Run to refresh it.")
        st.json(saved)
    else:
        st.info("No report yet for this experiment.")


if __name__ == "__main__":
    main()
