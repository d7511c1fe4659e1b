"""
Tests for quartonsim/basis.py
"""

import pytest

from quartonsim.basis import (
    BasisChoice, heuristic_objective, minimize_mode_zpf, optimize_basis, optimize_tilt,
    optimize_zpf,
)
from quartonsim.circuit import CircuitParams, harmonic_guess, harmonic_polynomial
from quartonsim.util import harmonic_zpf
from quartonsim.validation import BasisError


E_C, E_J = 0.119, 269.0


def _harmonic_family(z):
    return harmonic_polynomial(E_C, E_J, z, "a")


class TestBasisChoice:
    """Test the zpf container."""

    def test_charge_zpf(self):
        basis = BasisChoice(0.25, 0.5)
        assert basis.n_zpf_a == pytest.approx(2.0)
        assert basis.n_zpf_b == pytest.approx(1.0)
        assert basis.zpf("b") == 0.5

    def test_scaled(self):
        basis = BasisChoice(0.2, 0.4, (0.9, 0.8)).scaled(2.0)
        assert (basis.zpf_a, basis.zpf_b) == pytest.approx((0.4, 0.4))
        assert basis.overlap_scores == (0.9, 0.8)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BasisChoice(0.0, 0.4)
        with pytest.raises(ValueError):
            BasisChoice(0.2, 0.4, (1.5, 0.5))

    def test_to_dict(self):
        assert BasisChoice(0.2, 0.4).to_dict()["heuristic"] == "min_adag_a"

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            BasisChoice(0.2, 0.4).zpf("c")


class TestHarmonicOptimum:
    """The optimum for a harmonic mode is the analytic zero-point amplitude."""

    @pytest.mark.parametrize("heuristic", ["min_adag_a", "min_adag_adag"])
    def test_coefficient_heuristics(self, heuristic):
        exact = harmonic_zpf(E_C, E_J)
        result = minimize_mode_zpf(_harmonic_family, "a", 1.3 * exact, heuristic, 5, 15)
        assert result.zpf == pytest.approx(exact, rel=1e-3)
        assert result.score == pytest.approx(1.0, abs=1e-6)

    def test_overlap_heuristic(self):
        exact = harmonic_zpf(E_C, E_J)
        result = minimize_mode_zpf(_harmonic_family, "a", 0.8 * exact, "max_overlap", 5, 15)
        assert result.zpf == pytest.approx(exact, rel=1e-2)

    def test_no_bracket(self):
        exact = harmonic_zpf(E_C, E_J)
        with pytest.raises(BasisError):
            minimize_mode_zpf(_harmonic_family, "a", 100.0 * exact, "min_adag_a", 5, 15)

    def test_unknown_heuristic(self):
        with pytest.raises(ValueError):
            heuristic_objective("min_energy", "a", 10, 3)

    def test_n_levels_bounded_by_dim(self):
        with pytest.raises(ValueError):
            minimize_mode_zpf(_harmonic_family, "a", 0.2, "min_adag_a", 20, 15)


class TestCircuitBasis:
    """Test zpf optimization on the quarton circuit."""

    def test_truncation_margin(self):
        with pytest.raises(ValueError):
            optimize_zpf(CircuitParams(), "a", n_levels=20, order=8, dim=25)

    def test_design_point_near_harmonic_guess(self):
        params = CircuitParams()
        guess_a, guess_b = harmonic_guess(params)
        basis = optimize_basis(params, n_levels=10, order=8, dim=25)
        assert basis.zpf_a == pytest.approx(guess_a, rel=0.05)
        assert basis.zpf_b == pytest.approx(guess_b, rel=0.25)
        assert all(0.0 <= s <= 1.0 for s in basis.overlap_scores)


class TestTilt:
    """Test the tilt search."""

    @pytest.fixture
    def fixed_basis(self):
        return BasisChoice(*harmonic_guess(CircuitParams()))

    def test_invalid_range(self, fixed_basis):
        with pytest.raises(ValueError):
            optimize_tilt(CircuitParams(), fixed_basis, (1.2, 1.1), reoptimize=False)

    def test_fixed_basis_required(self):
        with pytest.raises(ValueError):
            optimize_tilt(CircuitParams(), None, reoptimize=False)

    def test_boundary_flagged(self, fixed_basis):
        result = optimize_tilt(CircuitParams(), fixed_basis, (1.25, 1.3), dims=(12, 10),
                               reoptimize=False, scan_points=3)
        assert result.at_boundary
        assert result.tilt == pytest.approx(1.25)

    def test_fixed_basis_search(self, fixed_basis):
        result = optimize_tilt(CircuitParams(), fixed_basis, (0.8, 1.3), dims=(12, 10),
                               reoptimize=False)
        assert 0.8 <= result.tilt <= 1.3
        assert result.residual <= result.residual_untilted
        assert result.params.tilt == pytest.approx(result.tilt)
        assert result.basis is fixed_basis
        assert [t for t, _ in result.trials] == sorted(t for t, _ in result.trials)
