"""Experiment runner and command-line tools."""
from .config import ConfigError, ExperimentConfig, config_from_mapping, load_config, parse_key_values
from .records import (CSV_FIELDS, PLOT_METRICS, RunRecord, emit_csv, emit_plot_data, load_records,
                      parse_csv, parse_jsonl)
from .runner import ExperimentOutcome, run_experiment

__all__ = [
    "CSV_FIELDS", "ConfigError", "ExperimentConfig", "ExperimentOutcome", "PLOT_METRICS", "RunRecord",
    "config_from_mapping", "emit_csv", "emit_plot_data", "load_config", "load_records",
    "parse_csv", "parse_jsonl", "parse_key_values", "run_experiment",
]
