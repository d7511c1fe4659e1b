"""
Per-component loggers for the readout simulator.

Components are named after pipeline stages (basis, spectrum, dissipation,
dynamics, decoherence, sweep) and log under the quartonsim.<stage> namespace.
INFO marks stage boundaries such as a finished tilt search or a started
integration; DEBUG reports per-mode and per-bath results; TRACE is reserved for
per-trial output of the tilt scan and integrator steps.
"""

import logging
import sys
from typing import Any, Sequence
from enum import IntEnum


class LogLevel(IntEnum):
    """Standard logging levels plus TRACE below DEBUG for per-trial solver output."""
    CRITICAL = 50
    ERROR = 40
    WARNING = 30
    INFO = 20
    DEBUG = 10
    TRACE = 5


class SimulationLogger:
    """
    Thin wrapper over a stdlib logger for one pipeline stage.

    Records go to stderr, apart from the summaries the CLI prints to stdout.
    """

    def __init__(self, name: str = "quartonsim", level: int = LogLevel.INFO):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)

        # one stderr handler per named logger, even when a stage is re-instantiated
        if not self.logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            )
            handler.setFormatter(formatter)
            self.logger.addHandler(handler)

    def set_level(self, level: int) -> None:
        self.logger.setLevel(level)

    def critical(self, msg: str, **kwargs) -> None:
        self.logger.critical(msg, **kwargs)

    def error(self, msg: str, **kwargs) -> None:
        self.logger.error(msg, **kwargs)

    def warning(self, msg: str, **kwargs) -> None:
        self.logger.warning(msg, **kwargs)

    def info(self, msg: str, **kwargs) -> None:
        self.logger.info(msg, **kwargs)

    def debug(self, msg: str, **kwargs) -> None:
        self.logger.debug(msg, **kwargs)

    def trace(self, msg: str, **kwargs) -> None:
        """Per-trial output; skipped unless the stage is set to TRACE."""
        if self.logger.level <= LogLevel.TRACE:
            self.logger.log(LogLevel.TRACE, msg, **kwargs)


_loggers = {}


def get_logger(component: str = "quartonsim") -> SimulationLogger:
    """
    Logger for a pipeline stage, created on first use.

    Args:
        component: Stage name, e.g. 'basis', 'dissipation' or 'sweep'

    Returns:
        The shared SimulationLogger for quartonsim.<component>
    """
    if component not in _loggers:
        _loggers[component] = SimulationLogger(f"quartonsim.{component}")
    return _loggers[component]


def set_global_level(level: int) -> None:
    """Apply one level to every stage created so far (the CLI --log-level flag)."""
    for logger in _loggers.values():
        logger.set_level(level)


def parse_level(name: str) -> int:
    """Map a level name such as 'debug' or 'TRACE' to its numeric value."""
    try:
        return int(LogLevel[name.strip().upper()])
    except KeyError:
        raise ValueError(f"Unknown log level: {name}")


def log_eigensolve(dim: int, component: str = "spectrum") -> None:
    """Log a dense eigensolve."""
    get_logger(component).debug(f"Diagonalizing Hamiltonian of dimension {dim}")


def log_basis_step(mode: str, zpf: float, score: float, component: str = "basis") -> None:
    """Log a finished zpf optimization for one mode."""
    get_logger(component).debug(f"Mode {mode}: zpf={zpf:.6f} overlap={score:.4f}")


def log_tilt_trial(tilt: float, residual: float, component: str = "basis") -> None:
    """Log one tilt evaluation."""
    get_logger(component).trace(f"Tilt {tilt:.5f}: |g|^2={residual:.3e}")


def log_bath(index: int, frequency: float, rate: float, members: int,
             component: str = "dissipation") -> None:
    """Log a clustered bath."""
    get_logger(component).debug(
        f"Bath {index}: {frequency:.4f} GHz, rate {rate:.3e} GHz, {members} transitions"
    )


def log_integration(kind: str, t_end: float, component: str = "dynamics") -> None:
    """Log an integration run."""
    get_logger(component).info(f"Integrating {kind} to t={t_end:.3f} ns")


def log_trajectory_chunk(chunk: int, size: int, component: str = "dynamics") -> None:
    """Log a completed trajectory chunk."""
    get_logger(component).debug(f"Finished trajectory chunk {chunk} ({size} trajectories)")


def log_sweep_point(index: int, status: str, values: Sequence[Any] = (),
                    component: str = "sweep") -> None:
    """Log a finished sweep point."""
    get_logger(component).info(f"Point {index} {tuple(values)}: {status}")
