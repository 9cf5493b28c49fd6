"""Experiment configs, ensemble runs, acceptance suite and CLI."""
from .config import ConfigError, ExperimentConfig, Functional, config_from_dict, load_config
from .runner import ResultRecord, run_experiment
