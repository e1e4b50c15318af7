"""Experiment configuration, persistence, benchmarks and the CLI."""

from .bench import afo_bench, afo_cell, kernel_bench
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .results import ResultTable, parse_table, read_table
from .runner import run_experiment, summarize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "afo_bench",
    "afo_cell",
    "kernel_bench",
    "load_config",
    "parse_config",
    "parse_table",
    "read_table",
    "run_experiment",
    "summarize",
]
