"""Experiment harness: config parsing, cell execution, outputs, and diagnostics."""

from .cli import main
from .config import ConfigError, RunConfig, load_config, parse_config
from .runner import COLUMNS, execute, run_cell

__all__ = ["COLUMNS", "ConfigError", "RunConfig", "execute", "load_config", "main",
           "parse_config", "run_cell"]
