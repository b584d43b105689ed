"""Service selection in IRS-assisted networks via (delayed) replicator dynamics."""

from ._core import (
    Config,
    ConfigError,
    Error,
    NonConvergenceError,
    NumericError,
    UnsupportedSettingError,
    equilibrium,
    link_snrs,
    net_values,
    path_loss_linear,
    presets,
    run_experiment,
    simulate,
    stability_bound,
)

__all__ = [
    "Config",
    "ConfigError",
    "Error",
    "NonConvergenceError",
    "NumericError",
    "UnsupportedSettingError",
    "equilibrium",
    "link_snrs",
    "net_values",
    "path_loss_linear",
    "presets",
    "run_experiment",
    "simulate",
    "stability_bound",
]
