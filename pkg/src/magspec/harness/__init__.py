"""Experiment orchestration: configuration, sweep runner, records, plots and CLI."""

from .config import ConfigError, ExperimentConfig, load_config
from .records import RunRecord, read_records, write_records
from .runner import run, run_point

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "RunRecord", "read_records",
           "write_records", "run", "run_point"]
