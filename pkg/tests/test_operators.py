"""
Tests for quartonsim/operators.py
"""

import numpy as np
import pytest

from quartonsim.operators import (
    FockSpace, FockOperator, LadderMonomial, LadderPolynomial,
    annihilation_matrix, build_annihilation, normal_order, combine_modes,
    quadrature_power, vacuum_moment, phase_power, cosine_expansion, taylor_potential,
    hermitian_function, matrix_cosine, matrix_sine, phase_matrix, charge_matrix,
)
from quartonsim.validation import HermiticityError, OrderingOverflowError


def _interior(space, margin):
    return [space.index(na, nb) for na in range(space.n_a - margin)
            for nb in range(space.n_b - margin)]


class TestFockSpace:
    """Test the two-mode truncated space."""

    def test_ordering(self):
        space = FockSpace((4, 3))
        assert space.dim == 12
        assert space.index(2, 1) == 7
        assert space.label(7) == (2, 1)

    def test_basis_vector(self):
        space = FockSpace((3, 3))
        vec = space.basis_vector(1, 2)
        assert vec[5] == 1.0
        assert np.sum(np.abs(vec)) == 1.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            FockSpace((3, 3)).index(3, 0)

    def test_invalid_dims(self):
        with pytest.raises(ValueError):
            FockSpace((1, 5))
        with pytest.raises(ValueError):
            FockSpace((3, 3, 3))

    def test_operator_shape_checked(self):
        with pytest.raises(ValueError):
            FockOperator(FockSpace((3, 3)), np.eye(8))


class TestAnnihilation:
    """Test ladder-operator matrices."""

    def test_single_mode(self):
        a = annihilation_matrix(4)
        assert a[0, 1] == pytest.approx(1.0)
        assert a[2, 3] == pytest.approx(np.sqrt(3))
        assert np.count_nonzero(a) == 3

    def test_commutator_interior(self):
        space = FockSpace((8, 4))
        for mode in ("a", "b"):
            a = build_annihilation(space, mode)
            comm = a.commutator(a.dagger()).matrix
            keep = _interior(space, 1)
            assert np.allclose(comm[np.ix_(keep, keep)], np.eye(len(keep)))

    def test_modes_commute(self):
        space = FockSpace((5, 5))
        a = build_annihilation(space, "a")
        b = build_annihilation(space, "b")
        assert np.allclose(a.commutator(b).matrix, 0.0)
        assert np.allclose(a.commutator(b.dagger()).matrix, 0.0)

    def test_phase_charge_commutator(self):
        dim, zpf = 12, 0.37
        phi = phase_matrix(dim, zpf)
        n = charge_matrix(dim, zpf)
        comm = phi @ n - n @ phi
        assert np.allclose(comm[:dim - 1, :dim - 1], 1j * np.eye(dim - 1))


class TestNormalOrdering:
    """Test the symbolic ladder-polynomial engine."""

    def test_canonical_commutator(self):
        a = LadderPolynomial.ladder("a")
        ad = LadderPolynomial.ladder("a", dagger=True)
        product = a * ad
        assert product.coefficient((1, 1, 0, 0)) == pytest.approx(1.0)
        assert product.coefficient((0, 0, 0, 0)) == pytest.approx(1.0)
        assert (a * ad - ad * a) == LadderPolynomial.constant(1.0)

    def test_quadrature_square(self):
        x2 = quadrature_power("a", 2)
        assert x2.coefficient((2, 0, 0, 0)) == pytest.approx(1.0)
        assert x2.coefficient((1, 1, 0, 0)) == pytest.approx(2.0)
        assert x2.coefficient((0, 2, 0, 0)) == pytest.approx(1.0)
        assert x2.coefficient((0, 0, 0, 0)) == pytest.approx(1.0)

    def test_quadrature_fourth(self):
        x4 = quadrature_power("b", 4)
        assert x4.coefficient((0, 0, 2, 2)) == pytest.approx(6.0)
        assert x4.coefficient((0, 0, 1, 1)) == pytest.approx(12.0)
        assert x4.coefficient((0, 0, 0, 0)) == pytest.approx(3.0)

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 6, 8])
    def test_vacuum_moment(self, k):
        assert quadrature_power("a", k).coefficient((0, 0, 0, 0)).real == \
            pytest.approx(vacuum_moment(k))

    def test_monomial_factors(self):
        left = LadderMonomial(2.0, (0, 1, 0, 0))
        right = LadderMonomial(1.0, (1, 0, 0, 1))
        result = normal_order(left, right)
        assert result.coefficient((1, 1, 0, 1)) == pytest.approx(2.0)
        assert result.coefficient((0, 0, 0, 1)) == pytest.approx(2.0)

    def test_matrix_equivalence(self):
        a = LadderPolynomial.ladder("a")
        ad = LadderPolynomial.ladder("a", dagger=True)
        b = LadderPolynomial.ladder("b")
        bd = LadderPolynomial.ladder("b", dagger=True)
        left = (a + ad) * (a + ad) + bd * a
        right = b * b + ad * b + a * a * ad
        space = FockSpace((10, 10))
        symbolic = normal_order(left, right).to_matrix(space).matrix
        numeric = left.to_matrix(space).matrix @ right.to_matrix(space).matrix
        keep = _interior(space, 4)
        assert np.allclose(symbolic[np.ix_(keep, keep)], numeric[np.ix_(keep, keep)],
                           atol=1e-9)

    def test_power(self):
        x = LadderPolynomial.quadrature("a")
        assert x ** 3 == quadrature_power("a", 3)
        with pytest.raises(ValueError):
            x ** -1

    def test_overflow(self):
        with pytest.raises(OrderingOverflowError):
            LadderPolynomial.constant(1e200)

    def test_invalid_powers(self):
        with pytest.raises(ValueError):
            LadderPolynomial({(1, -1, 0, 0): 1.0})
        with pytest.raises(ValueError):
            LadderMonomial(1.0, (1, 0, 0))


class TestPolynomialStructure:
    """Test Hermiticity, splitting and evaluation."""

    def test_hermitian(self):
        x = LadderPolynomial.quadrature("a")
        assert x.is_hermitian()
        assert not LadderPolynomial.ladder("a").is_hermitian()
        assert (1j * LadderPolynomial.ladder("b")).dagger() == \
            -1j * LadderPolynomial.ladder("b", dagger=True)

    def test_split(self):
        poly = (quadrature_power("a", 2) + quadrature_power("b", 2)
                + combine_modes(quadrature_power("a", 1), quadrature_power("b", 1)))
        h_a, h_b, h_c, constant = poly.split()
        assert constant == pytest.approx(2.0)
        assert h_a.coefficient((1, 1, 0, 0)) == pytest.approx(2.0)
        assert h_b.coefficient((0, 0, 1, 1)) == pytest.approx(2.0)
        assert len(h_c) == 4
        assert poly.without_constant().coefficient((0, 0, 0, 0)) == 0

    def test_single_mode_matrix(self):
        x = LadderPolynomial.quadrature("b")
        matrix = x.single_mode_matrix("b", 5)
        a = annihilation_matrix(5)
        assert np.allclose(matrix, a + a.T)
        with pytest.raises(ValueError):
            x.single_mode_matrix("a", 5)

    def test_phase_power_binomial(self):
        space = FockSpace((12, 12))
        poly = phase_power(0.3, 0.2, 3).to_matrix(space).matrix
        x_a = LadderPolynomial.quadrature("a").to_matrix(space).matrix
        x_b = LadderPolynomial.quadrature("b").to_matrix(space).matrix
        phi = 0.3 * x_a + 0.2 * x_b
        numeric = phi @ phi @ phi
        keep = _interior(space, 3)
        assert np.allclose(poly[np.ix_(keep, keep)], numeric[np.ix_(keep, keep)], atol=1e-12)


class TestCosineExpansion:
    """Test Taylor expansion of junction potentials."""

    def test_quadratic_coefficient(self):
        # -n E cos(phi/n) -> E phi^2 / (2n) at second order
        poly = cosine_expansion(10.0, 2, 0.5, 0.0, 4)
        quartic = -2 * 10.0 / (2 ** 4 * 24) * 0.5 ** 4
        expected = 10.0 / 4 * 0.5 ** 2 * 2 + quartic * 12
        assert poly.coefficient((1, 1, 0, 0)).real == pytest.approx(expected)

    def test_taylor_potential(self):
        poly = taylor_potential(1.0, 1, 1.0, 4)
        assert poly.coefficient((1, 1, 0, 0)).real == pytest.approx(1.0 - 12.0 / 24.0)
        assert poly.coefficient((2, 2, 0, 0)).real == pytest.approx(-6.0 / 24.0)

    def test_pi_bias_flips_sign(self):
        plain = cosine_expansion(5.0, 1, 0.3, 0.0, 4)
        flipped = cosine_expansion(5.0, 1, 0.3, 0.0, 4, bias=np.pi)
        assert flipped == plain.scaled(-1.0)

    def test_odd_order_rejected(self):
        with pytest.raises(ValueError):
            taylor_potential(1.0, 1, 0.2, 5)
        with pytest.raises(ValueError):
            taylor_potential(1.0, 1, 0.0, 4)

    def test_zero_energy(self):
        assert cosine_expansion(0.0, 1, 0.3, 0.3, 4).is_zero()


class TestMatrixFunctions:
    """Test spectral matrix functions."""

    def test_pythagorean_identity(self):
        space = FockSpace((10, 2))
        phi = FockOperator(space, np.kron(phase_matrix(10, 0.4), np.eye(2)).astype(complex))
        c = matrix_cosine(phi).matrix
        s = matrix_sine(phi).matrix
        assert np.allclose(c @ c + s @ s, np.eye(space.dim))

    def test_diagonal_function(self):
        out = hermitian_function(np.diag([0.0, np.pi]), np.cos)
        assert np.allclose(out, np.diag([1.0, -1.0]))

    def test_non_hermitian_rejected(self):
        with pytest.raises(HermiticityError):
            hermitian_function(np.array([[0.0, 1.0], [0.0, 0.0]]), np.cos)
