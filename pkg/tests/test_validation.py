"""
Tests for quartonsim/validation.py
"""

import numpy as np
import pytest

from quartonsim.validation import (
    QuartonSimError, ConfigError, HermiticityError, LabelingError, MetricsError,
    BasisError, ConvergenceError, IntegrationError, SubstepError, DissipationError,
    PHYSICS_ERRORS, Limits,
    validate_positive, validate_non_negative, validate_mode, validate_even_order,
    validate_fock_dim, hermiticity_defect, check_hermitian, check_trace,
    error_record, format_labels,
)


class TestErrorHierarchy:
    """Every error derives from the package base class."""

    def test_subclasses(self):
        for cls in (ConfigError, HermiticityError, LabelingError, MetricsError, BasisError,
                    ConvergenceError, IntegrationError, DissipationError):
            assert issubclass(cls, QuartonSimError)
        assert issubclass(SubstepError, IntegrationError)

    def test_config_error_location(self):
        err = ConfigError("bad unit", key="circuit.E_Q", line=4)
        assert err.key == "circuit.E_Q"
        assert err.line == 4
        assert str(err) == "line 4, key 'circuit.E_Q': bad unit"

    def test_config_error_without_location(self):
        assert str(ConfigError("empty")) == "empty"

    def test_labeling_error_carries_labels(self):
        err = LabelingError("lost", [(1, 0), (0, 1)])
        assert err.labels == [(1, 0), (0, 1)]

    def test_physics_errors(self):
        assert LabelingError in PHYSICS_ERRORS
        assert ConfigError not in PHYSICS_ERRORS
        assert IntegrationError not in PHYSICS_ERRORS


class TestScalarValidation:
    """Test validate_* helpers."""

    def test_positive(self):
        assert validate_positive("x", 2.0) == 2.0
        for bad in (0.0, -1.0, float("inf"), float("nan")):
            with pytest.raises(ValueError):
                validate_positive("x", bad)

    def test_non_negative(self):
        assert validate_non_negative("x", 0.0) == 0.0
        assert validate_non_negative("x", float("inf")) == float("inf")
        with pytest.raises(ValueError):
            validate_non_negative("x", -1e-12)

    def test_mode(self):
        assert validate_mode("a") == 0
        assert validate_mode("b") == 1
        with pytest.raises(ValueError):
            validate_mode("c")

    def test_even_order(self):
        for order in Limits.TAYLOR_ORDERS:
            assert validate_even_order(order) == order
        with pytest.raises(ValueError):
            validate_even_order(7)
        with pytest.raises(ValueError):
            validate_even_order(12)

    def test_fock_dim(self):
        assert validate_fock_dim(25) == 25
        with pytest.raises(ValueError):
            validate_fock_dim(1)
        with pytest.raises(ValueError):
            validate_fock_dim(Limits.MAX_FOCK_DIM + 1)


class TestMatrixChecks:
    """Test Hermiticity and trace checks."""

    def test_hermitian_passes(self):
        m = np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]])
        assert hermiticity_defect(m) == 0.0
        check_hermitian(m)

    def test_zero_matrix(self):
        assert hermiticity_defect(np.zeros((3, 3))) == 0.0

    def test_non_hermitian_raises(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(HermiticityError):
            check_hermitian(m, "H")

    def test_trace(self):
        rho = np.diag([0.5, 0.5]).astype(complex)
        check_trace(rho, 0.0)
        with pytest.raises(IntegrationError):
            check_trace(rho * 1.01, 1.0)


class TestErrorRecord:
    """Test the machine-readable error record."""

    def test_config_record(self):
        record = error_record(ConfigError("bad", key="readout.eta", line=3))
        assert record["type"] == "ConfigError"
        assert record["physics"] is False
        assert record["details"] == {"key": "readout.eta", "line": 3}

    def test_labeling_record(self):
        record = error_record(LabelingError("lost", [(2, 1)]))
        assert record["physics"] is True
        assert record["details"] == {"labels": [[2, 1]]}

    def test_metrics_record(self):
        record = error_record(MetricsError("missing", [(7, 0)]))
        assert record["details"] == {"missing": [[7, 0]]}

    def test_generic_record(self):
        record = error_record(RuntimeError("boom"))
        assert record == {"type": "RuntimeError", "message": "boom", "physics": False,
                          "details": {}}

    def test_format_labels(self):
        assert format_labels([(0, 1), (1, 0)]) == "|0,1>, |1,0>"
