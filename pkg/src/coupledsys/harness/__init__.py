"""Rate fitting, named experiments, configuration and the CLI."""

from .config import ExperimentConfig, build_config, parse_initial, read_config_file
from .rates import (
    RateFit,
    derivative_rate,
    difference_rate,
    operator_rate_continuous,
    operator_rate_discrete,
    rate_fit,
    state_error_rate,
)
from .scenarios import SCENARIOS, run_experiment, scenario_run

__all__ = [
    "ExperimentConfig",
    "RateFit",
    "SCENARIOS",
    "build_config",
    "derivative_rate",
    "difference_rate",
    "operator_rate_continuous",
    "operator_rate_discrete",
    "parse_initial",
    "rate_fit",
    "read_config_file",
    "run_experiment",
    "scenario_run",
    "state_error_rate",
]
