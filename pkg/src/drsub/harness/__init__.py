"""Experiment configuration, orchestration, reporting and the command line."""

from .config import ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from .runner import instance_seed, run, run_project_bench, run_verify

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "dump_config",
    "load_config",
    "parse_config",
    "instance_seed",
    "run",
    "run_project_bench",
    "run_verify",
]
