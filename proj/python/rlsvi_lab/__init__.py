"""Randomized least-squares value iteration experiments."""

from ._core import (
    ConfigError,
    __version__,
    beta_cdf,
    beta_projection,
    chain_optimal_value,
    chain_regret_lower_bound,
    default_config,
    gaussian_tail_crossover,
    normal_hazard,
    ridge_posterior,
    run_optimism_suite,
    run_study,
    seed_schedule,
    single_crossing_count,
)

__all__ = [
    "ConfigError",
    "__version__",
    "beta_cdf",
    "beta_projection",
    "chain_optimal_value",
    "chain_regret_lower_bound",
    "default_config",
    "gaussian_tail_crossover",
    "normal_hazard",
    "ridge_posterior",
    "run_optimism_suite",
    "run_study",
    "seed_schedule",
    "single_crossing_count",
]
