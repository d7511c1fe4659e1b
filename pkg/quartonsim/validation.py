"""
Error hierarchy, numeric limits and argument checks for quartonsim.
"""

from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np


class QuartonSimError(Exception):
    """Base exception for simulation errors."""
    pass


class ConfigError(QuartonSimError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class HermiticityError(QuartonSimError):
    """Raised when an operator that must be Hermitian is not."""
    pass


class OrderingOverflowError(QuartonSimError):
    """Raised when normal-ordered coefficients overflow; Taylor order too high for the zpf."""
    pass


class BasisError(QuartonSimError):
    """Raised when a basis or tilt search cannot bracket its optimum."""
    pass


class LabelingError(QuartonSimError):
    """Raised when required eigenstates cannot be labeled by bare-state overlap."""

    def __init__(self, message: str, labels: Sequence[Tuple[int, int]] = ()):
        self.labels = list(labels)
        super().__init__(message)


class MetricsError(QuartonSimError):
    """Raised when labels needed for a metric are missing."""

    def __init__(self, message: str, missing: Sequence[Tuple[int, int]] = ()):
        self.missing = list(missing)
        super().__init__(message)


class DissipationError(QuartonSimError):
    """Raised for invalid dissipator construction requests."""
    pass


class IntegrationError(QuartonSimError):
    """Raised when the master-equation integrator loses trace or fails."""
    pass


class SubstepError(IntegrationError):
    """Raised when a stochastic trajectory drifts in norm; more substeps are needed."""
    pass


class ConvergenceError(QuartonSimError):
    """Raised when an iterative calibration does not converge."""
    pass


# Errors that mean "this parameter point is physically infeasible" rather than a bug
PHYSICS_ERRORS = (LabelingError, MetricsError, BasisError, ConvergenceError)


class Limits:
    """Numeric tolerances and thresholds shared across modules."""

    # Operators
    HERMITIAN_RTOL = 1e-10
    MAX_COEFFICIENT = 1e150
    MIN_FOCK_DIM = 2
    MAX_FOCK_DIM = 200
    TAYLOR_ORDERS = (4, 6, 8, 10)

    # Labeling
    LABEL_WARN_OVERLAP = 0.5
    LABEL_FAIL_OVERLAP = 0.25

    # QND estimate
    COHERENT_TAIL = 1e-6

    # Dynamics
    TRACE_TOL = 1e-6
    NORM_DRIFT_TOL = 0.05
    CALIBRATION_RTOL = 0.05
    CALIBRATION_MAX_ITER = 10

    # Toy models
    MAX_SQUEEZING_RATIO = 0.05

    # Statistics
    MIN_BLOB_SEPARATION = 0.1


def validate_positive(name: str, value: float) -> float:
    """
    Validate that a scalar is finite and strictly positive.

    Raises:
        ValueError: If value is not positive
    """
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def validate_non_negative(name: str, value: float) -> float:
    """Validate that a scalar is >= 0 (infinity allowed)."""
    if np.isnan(value) or value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    return value


def validate_mode(mode: str) -> int:
    """
    Validate a mode name and return its tensor position.

    Args:
        mode: 'a' (resonator) or 'b' (qubit)

    Returns:
        0 for mode a, 1 for mode b
    """
    if mode not in ("a", "b"):
        raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")
    return 0 if mode == "a" else 1


def validate_even_order(order: int) -> int:
    """Validate a Taylor order."""
    if order % 2 != 0:
        raise ValueError(f"Taylor order must be even, got {order}")
    if order not in Limits.TAYLOR_ORDERS:
        raise ValueError(f"Taylor order must be one of {Limits.TAYLOR_ORDERS}, got {order}")
    return order


def validate_fock_dim(dim: int) -> int:
    """Validate a per-mode Fock truncation."""
    if dim < Limits.MIN_FOCK_DIM or dim > Limits.MAX_FOCK_DIM:
        raise ValueError(
            f"Fock dimension must be in [{Limits.MIN_FOCK_DIM}, {Limits.MAX_FOCK_DIM}], got {dim}"
        )
    return dim


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Relative Frobenius norm of the anti-Hermitian part."""
    norm = np.linalg.norm(matrix)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(matrix - matrix.conj().T) / norm)


def check_hermitian(matrix: np.ndarray, name: str = "operator",
                    rtol: float = Limits.HERMITIAN_RTOL) -> None:
    """
    Check that a matrix is Hermitian to within a relative Frobenius tolerance.

    Raises:
        HermiticityError: If the defect exceeds rtol
    """
    defect = hermiticity_defect(matrix)
    if defect > rtol:
        raise HermiticityError(f"{name} is not Hermitian (relative defect {defect:.3e})")


def check_trace(rho: np.ndarray, t: float, tol: float = Limits.TRACE_TOL) -> None:
    """
    Check trace preservation of a density matrix.

    Raises:
        IntegrationError: If |tr rho - 1| > tol
    """
    deviation = abs(np.trace(rho) - 1.0)
    if deviation > tol:
        raise IntegrationError(
            f"Trace deviation {deviation:.3e} at t={t:.4f} ns exceeds {tol:.1e}; "
            f"tighten the integrator tolerances"
        )


def error_record(exc: BaseException) -> Dict[str, Any]:
    """
    Build a machine-readable error record.

    Args:
        exc: The exception to describe

    Returns:
        Dict with type, message and structured details
    """
    details: Dict[str, Any] = {}
    if isinstance(exc, ConfigError):
        details = {"key": exc.key, "line": exc.line}
    elif isinstance(exc, LabelingError):
        details = {"labels": [list(label) for label in exc.labels]}
    elif isinstance(exc, MetricsError):
        details = {"missing": [list(label) for label in exc.missing]}
    return {
        "type": type(exc).__name__,
        "message": str(exc),
        "physics": isinstance(exc, PHYSICS_ERRORS),
        "details": details,
    }


def format_labels(labels: Iterable[Tuple[int, int]]) -> str:
    """Render labels as '|n_a,n_b>' text."""
    return ", ".join(f"|{na},{nb}>" for na, nb in labels)
