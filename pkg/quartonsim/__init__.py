"""
quartonsim - readout simulation for quarton-coupled superconducting qubits.

Builds the two-mode circuit Hamiltonian in an optimized Fock basis, labels its
spectrum, estimates readout non-QND-ness, integrates master-equation and
heterodyne-trajectory readout, and tallies the qubit decoherence budget.
"""

__version__ = '0.1.0'
__author__ = 'quartonsim developers'
__license__ = 'MIT'

from quartonsim.api import ReadoutSimulator, simulate
from quartonsim.circuit import CircuitParams, capacitance_transform
from quartonsim.config import RunConfig, parse_config, read_config, write_config
from quartonsim.decoherence import EchoSettings, EnvironmentParams
from quartonsim.dynamics import ReadoutConfig
from quartonsim.validation import (
    QuartonSimError,
    ConfigError,
    LabelingError,
    MetricsError,
    BasisError,
    ConvergenceError,
)

__all__ = [
    'ReadoutSimulator',
    'simulate',
    'CircuitParams',
    'capacitance_transform',
    'RunConfig',
    'ReadoutConfig',
    'EnvironmentParams',
    'EchoSettings',
    'parse_config',
    'read_config',
    'write_config',
    'QuartonSimError',
    'ConfigError',
    'LabelingError',
    'MetricsError',
    'BasisError',
    'ConvergenceError',
]
