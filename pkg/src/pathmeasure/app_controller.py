from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

from pathmeasure.core.model import ExperimentConfig, ResultTable
from pathmeasure.core.serialization import load_config, parse_config
from pathmeasure.runner.artifacts import write_artifacts
from pathmeasure.runner.experiments import run_experiment


@dataclass
class ExperimentState:
    current_config: Optional[ExperimentConfig] = None
    current_config_path: Optional[Path] = None
    last_table: Optional[ResultTable] = None


class ExperimentController:
    """
    Experiment controller:
    - loads and validates a config;
    - keeps the current config and its last result in memory;
    - runs the experiment and writes its artifacts.
    """

    def __init__(self) -> None:
        self._state = ExperimentState()

    # ---- state ----

    @property
    def config(self) -> Optional[ExperimentConfig]:
        return self._state.current_config

    @property
    def config_path(self) -> Optional[Path]:
        return self._state.current_config_path

    @property
    def last_table(self) -> Optional[ResultTable]:
        return self._state.last_table

    # ---- config ----

    def open_config(self, path: Path, command: Optional[str] = None) -> ExperimentConfig:
        config = load_config(path, command)
        self._state = ExperimentState(config, path)
        return config

    def use_config_text(self, text: str, command: Optional[str] = None) -> ExperimentConfig:
        config = parse_config(text, command)
        self._state = ExperimentState(config, None)
        return config

    # ---- running ----

    def run(self) -> ResultTable:
        if self._state.current_config is None:
            raise ValueError("no config loaded")
        table = run_experiment(self._state.current_config)
        self._state.last_table = table
        return table

    def export(self, out_dir: Path) -> Dict[str, Path]:
        """Write result.csv, summary.txt and summary.json for the last run."""
        if self._state.last_table is None:
            raise ValueError("nothing has been run yet")
        return write_artifacts(self._state.last_table, out_dir, self._state.current_config)
