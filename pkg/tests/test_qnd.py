"""
Tests for quartonsim/qnd.py
"""

import math

import pytest

from quartonsim.dissipation import KappaModel
from quartonsim.qnd import (
    build_decay_matrix, coherent_readout_state, dominant_entries, qbar, qnd_estimates,
)
from quartonsim.validation import MetricsError


@pytest.fixture
def kappa_model():
    return KappaModel(0.3, 16.0)


class TestDecayMatrix:
    """Test the decay-induced transition matrix."""

    def test_downward_entries_only(self, dispersive_spectrum, kappa_model):
        decay = build_decay_matrix(dispersive_spectrum, kappa_model)
        for t in decay.transitions:
            assert dispersive_spectrum.energies[t.upper] > dispersive_spectrum.energies[t.lower]
            assert t.rate > 0

    def test_dominant_entries(self, dispersive_spectrum, kappa_model):
        decay = build_decay_matrix(dispersive_spectrum, kappa_model)
        top = dominant_entries(decay, 3)
        assert len(top) == 3
        assert top[0].rate >= top[1].rate >= top[2].rate
        assert top[0].upper_label == (13, 0)
        assert top[0].rate == pytest.approx(0.3 * 13)


class TestCoherentState:
    """Test the Poisson-weighted readout state."""

    def test_normalized(self, dispersive_spectrum, kappa_model):
        decay = build_decay_matrix(dispersive_spectrum, kappa_model)
        state, n_max = coherent_readout_state(decay, dispersive_spectrum, 1, 2.0)
        assert n_max == 12
        assert sum(abs(state) ** 2) == pytest.approx(1.0, abs=1e-5)

    def test_ladder_too_short(self, make_toy_spectrum, kappa_model):
        spec = make_toy_spectrum(dims=(6, 3))
        decay = build_decay_matrix(spec, kappa_model)
        with pytest.raises(MetricsError) as exc:
            coherent_readout_state(decay, spec, 0, 2.0)
        assert (6, 0) in exc.value.missing


class TestQbar:
    """Test the first-order QND estimate."""

    def test_dispersive_readout_is_qnd(self, dispersive_spectrum, kappa_model):
        estimates = qnd_estimates(dispersive_spectrum, kappa_model, 2.0, 10.0)
        assert [e.k for e in estimates] == [0, 1]
        for estimate in estimates:
            assert estimate.gamma == pytest.approx(0.0, abs=1e-15)
            assert estimate.qbar == pytest.approx(1.0)

    def test_hybridization_leaks(self, hybridized_spectrum, kappa_model):
        estimate = qnd_estimates(hybridized_spectrum, kappa_model, 2.0, 10.0)[1]
        assert 0.9 < estimate.qbar < 1.0
        assert estimate.qbar == pytest.approx(math.exp(-10.0 * estimate.gamma))

    def test_zero_duration(self, hybridized_spectrum, kappa_model):
        decay = build_decay_matrix(hybridized_spectrum, kappa_model)
        assert qbar(decay, hybridized_spectrum, 1, 2.0, 0.0).qbar == 1.0

    def test_to_dict(self, dispersive_spectrum, kappa_model):
        decay = build_decay_matrix(dispersive_spectrum, kappa_model)
        out = qbar(decay, dispersive_spectrum, 0, 2.0).to_dict()
        assert out["alpha"] == pytest.approx(math.sqrt(2.0))
        assert out["n_cutoff"] == 12
        assert out["delta_t_ns"] == 10.0
