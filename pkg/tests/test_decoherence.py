"""
Tests for quartonsim/decoherence.py
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from quartonsim.circuit import CircuitParams
from quartonsim.decoherence import (
    ChannelRate, DecoherenceBudget, EchoSettings, EnvironmentParams, FluxDispersion,
    dielectric_loss, echo_coherence, echo_phases, fit_echo, flux_allocation, flux_t1,
    flux_t2_echo, purcell_decay, qubit_frequency_vs_flux, quasiparticle_decay, resistor_loss,
    resistor_charge_operator, snr_scaling, synthesize_flux_noise, thermal_dephasing,
    white_noise_dephasing,
)
from quartonsim.dissipation import KappaModel, effective_rate
from quartonsim.spectrum import SpectrumMetrics
from quartonsim.util import bose_einstein


def _metrics(two_chi_mhz=250.0, omega_r=16.1):
    return SpectrumMetrics(0.0, 0.0, two_chi_mhz, -300.0, 7, omega_r, 7.0)


class TestEnvironment:
    """Test the environment model."""

    def test_flux_psd(self):
        env = EnvironmentParams()
        psd = env.flux_psd("ground")
        assert psd(np.array([1.0]))[0] == pytest.approx(25e-12)
        assert psd(np.array([100.0]))[0] == pytest.approx(25e-14)

    def test_unknown_loop(self):
        with pytest.raises(ValueError):
            EnvironmentParams().flux_amplitude("galvanic")

    def test_gamma_range(self):
        with pytest.raises(ValidationError):
            EnvironmentParams(gamma_phi=0.5)

    def test_echo_settings(self):
        echo = EchoSettings(series_len=1000.0, segment=100.0, samples_per_segment=200)
        assert echo.n_segments == 10
        assert echo.dt == pytest.approx(5e-7)


class TestThermalDephasing:
    """Test shot-noise dephasing from thermal photons."""

    def test_zero_temperature(self):
        assert thermal_dephasing(_metrics(), 0.3, 0.0) == 0.0

    def test_formula(self):
        n_th = bose_einstein(16.1, 45.0)
        two_chi = 2 * math.pi * 0.25e9
        kappa = 2 * math.pi * 0.3e9
        expected = n_th * (n_th + 1) * two_chi ** 2 / kappa
        assert thermal_dephasing(_metrics(), 0.3, 45.0) == pytest.approx(expected)

    def test_lower_frequency_dephases_faster(self):
        assert thermal_dephasing(_metrics(), 0.3, 45.0, omega_r=12.6) > \
            thermal_dephasing(_metrics(), 0.3, 45.0)

    def test_well_thermalized_resonator(self):
        """A 12.5 GHz resonator at 45 mK with 2χ = 252 MHz keeps T_φ near half a millisecond."""
        rate = thermal_dephasing(_metrics(252.0), 0.3, 45.0, omega_r=12.5)
        assert 1.0 / rate == pytest.approx(0.51e-3, rel=0.1)
        assert 1.0 / thermal_dephasing(_metrics(252.0), 0.3, 45.0) > 10e-3


class TestFluxAllocation:
    """Test loop-flux branch coefficients."""

    def test_ground_loop_sums_to_one(self, small_config):
        alloc = flux_allocation(small_config.circuit, "ground")
        assert -alloc["resonator"] + alloc["qubit"] + alloc["quarton_alpha"] == pytest.approx(1.0)
        assert alloc["quarton_alpha"] == alloc["quarton_series"]

    def test_quarton_loop_encloses_one_flux(self, small_config):
        alloc = flux_allocation(small_config.circuit, "quarton")
        assert alloc["quarton_alpha"] - alloc["quarton_series"] == pytest.approx(1.0)

    def test_unknown_loop(self, small_config):
        with pytest.raises(ValueError):
            flux_allocation(small_config.circuit, "galvanic")


class TestFluxNoise:
    """Test spectral synthesis and the echo estimator."""

    def test_white_noise_variance(self):
        s_white, dt, n = 1e-12, 1e-6, 4096
        series = synthesize_flux_noise(lambda f: np.full_like(f, s_white), n, dt,
                                       np.random.default_rng(0))
        assert np.mean(series ** 2) == pytest.approx(s_white / dt, rel=1e-3)
        assert abs(np.mean(series)) < 1e-6 * np.std(series)

    def test_seeded(self):
        psd = EnvironmentParams().flux_psd("quarton")
        a = synthesize_flux_noise(psd, 256, 1e-6, np.random.default_rng(5))
        b = synthesize_flux_noise(psd, 256, 1e-6, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_echo_cancels_static_shift(self):
        shift = np.full((2, 100), 1e4)
        phases = echo_phases(shift, 1e-6, np.array([2, 10, 100]))
        assert np.allclose(phases, 0.0, atol=1e-9)

    def test_echo_sees_drift(self):
        shift = np.tile(np.arange(100, dtype=float), (1, 1)) * 1e3
        phases = echo_phases(shift, 1e-6, np.array([100]))
        assert abs(phases[0, 0]) > 0.1

    def test_fit_exact_exponential(self):
        taus = np.linspace(1e-6, 1e-4, 20)
        result = fit_echo(taus, np.exp(-taus / 3e-5), "ground")
        assert result.t2 == pytest.approx(3e-5, rel=1e-4)
        assert not result.lower_bound
        assert result.rate == pytest.approx(1.0 / result.t2)

    def test_fit_without_decay(self):
        taus = np.linspace(1e-6, 1e-4, 5)
        result = fit_echo(taus, np.ones(5))
        assert math.isinf(result.t2)
        assert result.lower_bound
        assert result.rate == 0.0

    def test_white_noise_control(self):
        dispersion = FluxDispersion("ground", 7.0, 1e-3, 0.0)
        target = 1e4
        s_white = 2 * target / (2 * math.pi * 1e-3 * 1e9) ** 2
        assert white_noise_dephasing(dispersion, s_white) == pytest.approx(target)
        echo = EchoSettings(n_series=100, series_len=1000.0, segment=100.0,
                            samples_per_segment=200, n_taus=10)
        result = echo_coherence(dispersion, lambda f: np.full_like(f, s_white), echo, seed=1)
        assert 1.0 / result.t2 == pytest.approx(target, rel=0.15)


class TestFluxEcho:
    """Test the per-loop echo estimate with given dispersions."""

    ECHO = EchoSettings(n_series=2, series_len=200.0, segment=100.0,
                        samples_per_segment=100, n_taus=5, seeds=2)

    @pytest.fixture
    def dispersions(self):
        return {
            "quarton": FluxDispersion("quarton", 7.0, 0.0, 0.0),
            "ground": FluxDispersion("ground", 7.0, 1e-2, 0.0),
        }

    def test_loops_and_total(self, dispersive_spectrum, small_config, dispersions):
        results = flux_t2_echo(dispersive_spectrum, small_config.circuit,
                               EnvironmentParams(), self.ECHO, dispersions)
        assert set(results) == {"quarton", "ground", "total"}
        assert math.isinf(results["quarton"].t2)
        assert results["quarton"].lower_bound
        assert results["total"].rate == pytest.approx(results["ground"].rate)

    def test_reproducible(self, dispersive_spectrum, small_config, dispersions):
        first = flux_t2_echo(dispersive_spectrum, small_config.circuit,
                             EnvironmentParams(), self.ECHO, dispersions)
        second = flux_t2_echo(dispersive_spectrum, small_config.circuit,
                              EnvironmentParams(), self.ECHO, dispersions)
        assert first["total"].t2 == second["total"].t2


class TestPurcell:
    """Test qubit decay through the resonator port."""

    def test_dispersive_has_no_purcell(self, dispersive_spectrum):
        rate = purcell_decay(dispersive_spectrum, KappaModel(0.3, 16.0))
        assert rate == pytest.approx(0.0, abs=1e-6)

    def test_hybridized(self, hybridized_spectrum):
        model = KappaModel(0.3, 16.0)
        rate = purcell_decay(hybridized_spectrum, model)
        expected = effective_rate((0, 0), (0, 1), hybridized_spectrum, model)
        assert rate > 0
        assert rate == pytest.approx(2 * math.pi * expected * 1e9)


class TestCircuitChannels:
    """Test channels evaluated on the reduced design point."""

    @pytest.fixture
    def parts(self, small_simulator):
        return small_simulator.spectrum(), small_simulator.params

    def test_resistor(self, parts):
        spec, params = parts
        loss = resistor_loss(spec, params, 10.0)
        assert loss.rate_C > 0 and loss.rate_Q > 0
        assert loss.rate == pytest.approx(loss.rate_C + loss.rate_Q)
        assert resistor_loss(spec, params, 0.0).rate == 0.0
        assert resistor_loss(spec, params, 20.0).rate == pytest.approx(2 * loss.rate)

    def test_resistor_charge_coefficients(self, parts):
        """Voltage-divider weights of the node charges at the default capacitances."""
        spec, _ = parts
        op = resistor_charge_operator(CircuitParams(), spec)
        (k_a, _, right_a), (k_b, left_b, _) = op.terms
        assert k_a == pytest.approx(0.028506, rel=1e-4)
        assert k_b == pytest.approx(0.082933, rel=1e-4)
        assert np.allclose(right_a, np.eye(spec.space.n_b))
        assert np.allclose(left_b, np.eye(spec.space.n_a))

    def test_quasiparticle_linear_in_density(self, parts):
        spec, params = parts
        base = quasiparticle_decay(spec, params, EnvironmentParams(x_qp=5e-9))
        assert base > 0
        assert quasiparticle_decay(spec, params, EnvironmentParams(x_qp=1e-8)) == \
            pytest.approx(2 * base)
        assert quasiparticle_decay(spec, params, EnvironmentParams(x_qp=0.0)) == 0.0

    def test_quasiparticle_branch_subset(self, parts):
        spec, params = parts
        env = EnvironmentParams()
        total = quasiparticle_decay(spec, params, env)
        parts_sum = sum(quasiparticle_decay(spec, params, env, [name]) for name in
                        ("resonator", "qubit", "quarton_alpha", "quarton_series"))
        assert parts_sum == pytest.approx(total)

    def test_quasiparticle_lumped_chains(self, parts):
        """Counting a chain once divides each branch by its junction count."""
        spec, params = parts
        env = EnvironmentParams()
        lumped = quasiparticle_decay(spec, params, env, lumped_chains=True)
        assert 0 < lumped < quasiparticle_decay(spec, params, env)
        for name, count in (("resonator", params.n_Ja), ("quarton_series", params.n_S)):
            assert quasiparticle_decay(spec, params, env, [name]) == pytest.approx(
                count * quasiparticle_decay(spec, params, env, [name], lumped_chains=True))
        assert quasiparticle_decay(spec, params, env, ["qubit"], lumped_chains=True) == \
            pytest.approx(quasiparticle_decay(spec, params, env, ["qubit"]))

    def test_dielectric_inverse_in_q(self, parts):
        spec, params = parts
        rate = dielectric_loss(spec, params, EnvironmentParams(Q_diel=7e6))
        assert rate > 0
        assert dielectric_loss(spec, params, EnvironmentParams(Q_diel=14e6)) == \
            pytest.approx(rate / 2)

    def test_flux_t1_scales_with_amplitude(self, parts):
        spec, params = parts
        base = flux_t1(spec, params, EnvironmentParams())
        doubled = flux_t1(spec, params, EnvironmentParams(A_phi_quarton=2.0))
        assert set(base) == {"quarton", "ground"}
        assert doubled["quarton"] == pytest.approx(4 * base["quarton"])
        assert doubled["ground"] == pytest.approx(base["ground"])

    def test_dispersion_fit(self, small_simulator, parts):
        spec, params = parts
        dispersion = qubit_frequency_vs_flux(params, small_simulator.basis, "ground",
                                             dims=spec.space.dims)
        assert dispersion.f0 == pytest.approx(spec.transition((0, 0), (0, 1)), abs=1e-4)

    def test_spectrum_without_basis(self, dispersive_spectrum, small_config):
        with pytest.raises(ValueError):
            resistor_loss(dispersive_spectrum, small_config.circuit, 10.0)


class TestBudget:
    """Test budget aggregation."""

    def test_totals(self):
        budget = DecoherenceBudget([
            ChannelRate("resistor", "T1", 100.0),
            ChannelRate("dielectric", "T1", 300.0),
            ChannelRate("thermal_photon", "T2", 50.0),
        ])
        assert budget.t1 == pytest.approx(1 / 400.0)
        assert budget.t2 == pytest.approx(1 / 250.0)
        rows = budget.rows()
        assert [r["channel"] for r in rows][-2:] == ["total_T1", "total_T2"]
        assert budget.to_dict()["resistor"]["time_s"] == pytest.approx(0.01)
        assert budget.channel("dielectric").rate == 300.0

    def test_zero_rate_is_infinite_time(self):
        assert math.isinf(ChannelRate("flux_echo", "T2", 0.0).time)
        assert math.isinf(DecoherenceBudget([]).t2)

    def test_unknown_channel(self):
        with pytest.raises(KeyError):
            DecoherenceBudget([]).channel("cosmic_rays")

    def test_simulator_budget(self, small_simulator):
        budget = small_simulator.decoherence(include_echo=False)
        names = {ch.name for ch in budget.channels}
        assert names == {"thermal_photon", "resistor", "quasiparticle", "dielectric",
                         "flux_t1", "purcell"}
        assert 0 < budget.t1 < math.inf
        assert budget.t2 <= 2 * budget.t1


class TestSnrScaling:
    """Test the dispersive SNR scaling."""

    def test_optimal_chi(self):
        value = snr_scaling(0.15, 0.3, 2.0, 1.0, 5.0)
        assert value == pytest.approx(math.sqrt(2 * math.pi * 0.3 * 2.0 * 5.0))
        assert snr_scaling(0.05, 0.3, 2.0, 1.0, 5.0) < value
        assert snr_scaling(0.5, 0.3, 2.0, 1.0, 5.0) < value

    def test_no_coupling(self):
        assert snr_scaling(0.0, 0.3, 2.0, 1.0, 5.0) == 0.0
