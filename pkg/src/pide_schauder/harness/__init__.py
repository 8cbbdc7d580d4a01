"""Experiment configuration, orchestration and command line."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import (EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS, RunResult,
                     run_config_file, run_experiment)
from .suites import SUITES, run_suite

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "RunResult",
           "run_experiment", "run_config_file", "run_suite", "SUITES", "EXIT_PASS",
           "EXIT_FAIL", "EXIT_CONFIG", "EXIT_NUMERICAL"]
