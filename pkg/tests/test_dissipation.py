"""
Tests for quartonsim/dissipation.py
"""

import numpy as np
import pytest

from quartonsim.dissipation import (
    KappaModel, Transition, bath_table, build_dissipators, cluster_baths, drive_operator,
    effective_rate, enumerate_transitions, prune,
)
from quartonsim.operators import FockSpace
from quartonsim.validation import DissipationError


@pytest.fixture
def kappa_model():
    return KappaModel(0.3, 16.0)


class TestKappaModel:
    """Test the frequency-dependent coupling."""

    def test_quadratic_scaling(self, kappa_model):
        assert kappa_model(16.0) == pytest.approx(0.3)
        assert kappa_model(8.0) == pytest.approx(0.075)

    def test_filter(self):
        model = KappaModel(0.3, 16.0, filter=(16.0, 1.2))
        assert model.filter_weight(16.0) == 1.0
        assert model.filter_weight(16.6) == pytest.approx(0.5)
        assert model.without_filter()(16.6) == pytest.approx(0.3 * (16.6 / 16.0) ** 2)

    def test_from_spectrum(self, dispersive_spectrum):
        model = KappaModel.from_spectrum(dispersive_spectrum, 0.3, 1.2)
        assert model.omega_r == pytest.approx(15.875)
        assert model.filter == (pytest.approx(15.875), 1.2)
        assert KappaModel.from_spectrum(dispersive_spectrum, 0.3).filter is None

    def test_validation(self):
        with pytest.raises(ValueError):
            KappaModel(-0.1, 16.0)
        with pytest.raises(ValueError):
            KappaModel(0.3, 0.0)


class TestTransitions:
    """Test transition enumeration and effective rates."""

    def test_drive_operator_hermitian(self):
        n0 = drive_operator(FockSpace((4, 2)))
        assert np.allclose(n0, n0.conj().T)

    def test_effective_rate(self, dispersive_spectrum, kappa_model):
        rate = effective_rate((0, 0), (1, 0), dispersive_spectrum, kappa_model)
        assert rate == pytest.approx(0.3)
        rate = effective_rate((2, 1), (3, 1), dispersive_spectrum, kappa_model)
        assert rate == pytest.approx(0.3 * (15.75 / 16.0) ** 2 * 3)

    def test_qubit_decay_absent_without_hybridization(self, dispersive_spectrum, kappa_model):
        rate = effective_rate((0, 0), (0, 1), dispersive_spectrum, kappa_model)
        assert rate == pytest.approx(0.0)

    def test_upward_rejected(self, dispersive_spectrum, kappa_model):
        with pytest.raises(DissipationError):
            effective_rate((1, 0), (0, 0), dispersive_spectrum, kappa_model)

    def test_enumeration(self, dispersive_spectrum, kappa_model):
        transitions = enumerate_transitions(dispersive_spectrum, kappa_model)
        assert all(t.frequency > 0 for t in transitions)
        photon = [t for t in transitions if t.rate > 1e-12]
        assert all(t.is_resonator_photon for t in photon)
        assert len(photon) == 13 * 3

    def test_describe(self):
        t = Transition(0, 2, 16.0, 1j, 0.3, (0, 0), (1, 0))
        assert t.describe() == "|1,0>->|0,0>"
        assert abs(t.amplitude) == pytest.approx(np.sqrt(0.3))
        assert Transition(0, 2, 16.0, 1.0, 0.3).describe() == "e2->e0"


class TestClustering:
    """Test bath clustering and pruning."""

    def test_single_bath_within_linewidth(self, dispersive_spectrum, kappa_model):
        dset = build_dissipators(dispersive_spectrum, kappa_model, c=1.0, threshold_hz=1.0)
        assert len(dset.baths) == 1
        assert dset.k_star == 0

    def test_baths_split_by_pull(self, dispersive_spectrum, kappa_model):
        dset = build_dissipators(dispersive_spectrum, kappa_model, c=0.5, threshold_hz=1.0)
        assert len(dset.baths) == 3
        assert dset.monitored.frequency == pytest.approx(16.0)
        assert dset.k_star == 2

    def test_operator_norm_is_total_rate(self, dispersive_spectrum, kappa_model):
        dset = build_dissipators(dispersive_spectrum, kappa_model, c=0.5, threshold_hz=1.0)
        for bath in dset.baths:
            assert np.linalg.norm(bath.operator) ** 2 == pytest.approx(bath.total_rate)

    def test_empty_transitions(self):
        with pytest.raises(DissipationError):
            cluster_baths([])

    def test_chaining(self):
        freqs = [5.0, 5.2, 5.4, 6.0]
        transitions = [Transition(0, i + 1, f, 1.0, 0.1) for i, f in enumerate(freqs)]
        dset = cluster_baths(transitions, c=1.0, kappa=0.25)
        assert [len(b.members) for b in dset.baths] == [3, 1]

    def test_prune_everything(self, dispersive_spectrum, kappa_model):
        dset = build_dissipators(dispersive_spectrum, kappa_model, threshold_hz=0.0)
        pruned = prune(dset, threshold_hz=1e12)
        assert pruned.empty
        assert pruned.monitored is None
        assert len(pruned.dropped) == sum(len(b.members) for b in dset.baths)

    def test_prune_keeps_membership(self, dispersive_spectrum, kappa_model):
        dset = build_dissipators(dispersive_spectrum, kappa_model, c=0.5, threshold_hz=0.0)
        pruned = prune(dset, threshold_hz=1e3)
        assert len(pruned.baths) == 3
        assert pruned.total_rate == pytest.approx(dset.total_rate)

    def test_zero_kappa(self, dispersive_spectrum):
        dset = build_dissipators(dispersive_spectrum, KappaModel(0.0, 16.0))
        assert dset.empty
        assert dset.operators == []

    def test_bath_table(self, dispersive_spectrum, kappa_model):
        rows = bath_table(build_dissipators(dispersive_spectrum, kappa_model, c=0.5))
        assert len(rows) == 3
        assert sum(row["monitored"] for row in rows) == 1
        assert set(rows[0]) == {"bath", "frequency_ghz", "total_rate_ghz", "members", "monitored"}
        assert "|1,0>->|0,0>" in rows[2]["members"]
