"""
quarton - compatibility shim.

Re-exports the public names of `quartonsim` so that `from quarton import simulate`
works as documented.
"""

from quartonsim import (
    ReadoutSimulator,
    simulate,
    CircuitParams,
    capacitance_transform,
    RunConfig,
    ReadoutConfig,
    EnvironmentParams,
    EchoSettings,
    parse_config,
    read_config,
    write_config,
    QuartonSimError,
    ConfigError,
    LabelingError,
    MetricsError,
    BasisError,
    ConvergenceError,
    __version__,
)

__all__ = [
    "ReadoutSimulator",
    "simulate",
    "CircuitParams",
    "capacitance_transform",
    "RunConfig",
    "ReadoutConfig",
    "EnvironmentParams",
    "EchoSettings",
    "parse_config",
    "read_config",
    "write_config",
    "QuartonSimError",
    "ConfigError",
    "LabelingError",
    "MetricsError",
    "BasisError",
    "ConvergenceError",
]
