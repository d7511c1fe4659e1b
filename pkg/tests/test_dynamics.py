"""
Tests for quartonsim/dynamics.py
"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from quartonsim.dissipation import KappaModel
from quartonsim.dynamics import (
    DrivePulse, ReadoutConfig, TrajectoryEnsemble, TruncatedEigenbasis, blob_statistics,
    calibrate_drive, check_drive_frequency, converge_truncation, drive_amplitude_guess,
    drive_frequency, equal_likelihood_threshold, liouvillian, readout_statistics,
    run_lindblad, run_trajectories,
)
from quartonsim.selfcheck import toy_model
from quartonsim.spectrum import compute_metrics
from quartonsim.validation import ConvergenceError, IntegrationError


@pytest.fixture
def traj_config():
    return ReadoutConfig(n_traj=4, chunk_size=2, substeps=20, seed=3, integration_time=0.5)


@pytest.fixture
def toy_drive():
    return DrivePulse(0.05, 16.0, 2.0)


class TestDrive:
    """Test the square pulse and its frequency."""

    def test_pulse(self):
        pulse = DrivePulse(0.1, 16.0, 1.0)
        assert pulse(0.0) == pytest.approx(0.2)
        assert pulse(1.5) == 0.0

    def test_drive_frequency_is_midpoint(self, dispersive_spectrum):
        assert drive_frequency(dispersive_spectrum) == pytest.approx(15.875)

    def test_drive_outside_lines(self, dispersive_spectrum):
        check_drive_frequency(dispersive_spectrum, 15.9)
        with pytest.raises(ValueError):
            check_drive_frequency(dispersive_spectrum, 17.0)

    def test_amplitude_guess(self):
        assert drive_amplitude_guess(0.125, 0.3, 2.0) == pytest.approx(math.sqrt(2 * 0.038125))


class TestTruncatedEigenbasis:
    """Test the projected model."""

    def test_from_spectrum(self, dispersive_spectrum):
        model = TruncatedEigenbasis.from_spectrum(dispersive_spectrum, KappaModel(0.3, 16.0), 4, 2)
        assert model.dim == 8
        assert model.labels[model.position((3, 1))] == (3, 1)
        assert list(model.photon_numbers[:2]) == [0.0, 0.0]
        assert model.monitored is not None
        assert np.allclose(model.n0, model.n0.conj().T)

    def test_from_arrays_shape_check(self):
        with pytest.raises(ValueError):
            TruncatedEigenbasis.from_arrays([(0, 0), (0, 1)], [0.0, 1.0], np.zeros((3, 3)))

    def test_without_dissipation(self):
        model = toy_model(True).without_dissipation()
        assert model.dissipators == []
        assert model.monitored is None


class TestLindblad:
    """Test the master-equation engine."""

    def test_liouvillian_preserves_trace(self):
        rng = np.random.default_rng(0)
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = h + h.conj().T
        d = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        trace = np.eye(3).reshape(-1)
        assert np.allclose(trace @ liouvillian(h, [d]).toarray(), 0.0)

    def test_free_decay(self):
        result = run_lindblad(toy_model(True), None, (1, 0), 2.0, n_times=21)
        expected = np.exp(-2 * math.pi * 0.3 * result.times)
        assert np.allclose(result.populations[:, 2], expected, atol=1e-6)
        assert result.photon_number[-1] == pytest.approx(expected[-1], abs=1e-6)

    def test_trace_and_positivity(self, toy_drive):
        result = run_lindblad(toy_model(True), toy_drive, 0, 3.0, n_times=31)
        assert result.trace_error < 1e-8
        assert result.min_eigenvalue > -1e-8
        assert len(result.times) == 31

    def test_stays_hermitian(self, toy_drive):
        """Driven dissipative evolution keeps ρ Hermitian at every stored time."""
        result = run_lindblad(toy_model(True), toy_drive, 0, 3.0, n_times=31)
        assert result.hermiticity_error < 1e-10
        assert np.allclose(result.rho_final, result.rho_final.conj().T, atol=1e-10)

    def test_unitary_purity(self, toy_drive):
        result = run_lindblad(toy_model(False), toy_drive, 0, 2.0, n_times=21,
                              rtol=1e-11, atol=1e-13)
        assert np.allclose(result.purity, 1.0, atol=1e-8)

    def test_qnd_fidelity(self, toy_drive):
        result = run_lindblad(toy_model(True), toy_drive, 0, 3.0, n_times=31)
        assert result.qnd_fidelity > 0.999
        assert set(result.leakage()) == {1}

    def test_default_end_time(self, toy_drive):
        result = run_lindblad(toy_model(True), toy_drive, 0)
        assert result.times[-1] == pytest.approx(2.0)

    def test_dispersive_readout(self, dispersive_spectrum):
        model = TruncatedEigenbasis.from_spectrum(dispersive_spectrum, KappaModel(0.3, 16.0), 5, 2)
        drive = DrivePulse(0.05, drive_frequency(dispersive_spectrum), 2.0)
        for k in (0, 1):
            result = run_lindblad(model, drive, k, 3.0, n_times=31)
            assert result.qnd_fidelity == pytest.approx(1.0, abs=1e-9)
            assert result.photon_number.max() > 0.0


class TestCalibration:
    """Test drive calibration against the steady photon number."""

    def test_without_model(self, dispersive_spectrum):
        metrics = compute_metrics(dispersive_spectrum, 3)
        assert calibrate_drive(None, metrics, 0.3, 2.0) == pytest.approx(
            drive_amplitude_guess(metrics.chi, 0.3, 2.0))

    def test_zero_target(self, dispersive_spectrum):
        metrics = compute_metrics(dispersive_spectrum, 3)
        assert calibrate_drive(None, metrics, 0.3, 0.0) == 0.0

    def test_master_equation_calibration(self, dispersive_spectrum):
        metrics = compute_metrics(dispersive_spectrum, 3)
        model = TruncatedEigenbasis.from_spectrum(dispersive_spectrum, KappaModel(0.3, 16.0), 6, 2)
        eps0 = calibrate_drive(model, metrics, 0.3, 0.5)
        guess = drive_amplitude_guess(metrics.chi, 0.3, 0.5)
        assert 0.8 * guess < eps0 < 1.25 * guess


class TestConvergence:
    """Test truncation growth."""

    def test_converges_for_weak_drive(self, dispersive_spectrum):
        drive = DrivePulse(0.01, drive_frequency(dispersive_spectrum), 1.0)
        model, result = converge_truncation(dispersive_spectrum, KappaModel(0.3, 16.0), drive,
                                            0, (3, 2), tol=1e-3)
        assert model.dim >= 12
        assert result.qnd_fidelity == pytest.approx(1.0, abs=1e-6)

    def test_no_steps(self, dispersive_spectrum):
        drive = DrivePulse(0.01, drive_frequency(dispersive_spectrum), 1.0)
        with pytest.raises(ConvergenceError):
            converge_truncation(dispersive_spectrum, KappaModel(0.3, 16.0), drive, 0, (3, 2),
                                max_steps=0)


class TestTrajectories:
    """Test the heterodyne trajectory engine."""

    def test_reproducible(self, traj_config, toy_drive):
        first = run_trajectories(traj_config, toy_model(True), toy_drive)
        second = run_trajectories(traj_config, toy_model(True), toy_drive)
        for k in (0, 1):
            assert np.array_equal(first.records[k], second.records[k])

    def test_independent_of_chunking(self, traj_config, toy_drive):
        one_chunk = traj_config.model_copy(update={"chunk_size": 4})
        a = run_trajectories(traj_config, toy_model(True), toy_drive)
        b = run_trajectories(one_chunk, toy_model(True), toy_drive)
        for k in (0, 1):
            assert np.allclose(a.records[k], b.records[k])

    def test_seed_changes_records(self, traj_config, toy_drive):
        other = traj_config.model_copy(update={"seed": 4})
        a = run_trajectories(traj_config, toy_model(True), toy_drive)
        b = run_trajectories(other, toy_model(True), toy_drive)
        assert not np.allclose(a.records[0], b.records[0])

    def test_shapes(self, traj_config, toy_drive):
        ensemble = run_trajectories(traj_config, toy_model(True), toy_drive)
        assert ensemble.states == [0, 1]
        assert ensemble.dt == pytest.approx(1.0 / 80.0)
        assert ensemble.records[0].shape == (4, 40)
        assert ensemble.mean_populations[1].shape == (41, 3)
        assert np.allclose(ensemble.mean_populations[0].sum(axis=1), 1.0)
        assert ensemble.integrate()[1].shape == (4, 2)

    def test_needs_monitored_bath(self, traj_config, toy_drive):
        with pytest.raises(IntegrationError):
            run_trajectories(traj_config, toy_model(False), toy_drive)

    def test_statistics_windows(self, traj_config, toy_drive):
        ensemble = run_trajectories(traj_config, toy_model(True), toy_drive)
        stats = readout_statistics(ensemble, windows=(0.25, 0.5, 1.0))
        assert [w for w, _, _, _ in stats.snr_vs_time] == [0.25, 0.5]
        assert 0.0 <= stats.fidelity_0 <= 1.0


class TestReadoutStatistics:
    """Test Gaussian blob statistics."""

    def test_separated_blobs(self):
        rng = np.random.default_rng(1)
        points0 = rng.normal(size=(4000, 2))
        points1 = rng.normal(size=(4000, 2)) + np.array([4.0, 0.0])
        stats = blob_statistics(points0, points1)
        assert stats.fidelity_0 == pytest.approx(norm.cdf(2.0), abs=0.01)
        assert stats.fidelity_1 == pytest.approx(norm.cdf(2.0), abs=0.01)
        assert stats.snr == pytest.approx(4.0, rel=0.05)

    def test_identical_blobs(self):
        points = np.random.default_rng(2).normal(size=(100, 2))
        stats = blob_statistics(points, points.copy())
        assert (stats.fidelity_0, stats.fidelity_1, stats.snr) == (0.5, 0.5, 0.0)

    def test_threshold_equal_widths(self):
        assert equal_likelihood_threshold(0.0, 1.0, 4.0, 1.0) == 2.0

    def test_threshold_unequal_widths(self):
        t = equal_likelihood_threshold(0.0, 1.0, 4.0, 2.0)
        assert 0.0 < t < 4.0
        assert norm.pdf(t, 0.0, 1.0) == pytest.approx(norm.pdf(t, 4.0, 2.0), rel=1e-6)

    def test_needs_two_states(self):
        ensemble = TrajectoryEnsemble(np.arange(3) * 0.1, 0.1, {0: np.ones((2, 3), complex)},
                                      {}, {}, [(0, 0)], 16.0, 0)
        with pytest.raises(ValueError):
            readout_statistics(ensemble)

    def test_to_dict(self):
        rng = np.random.default_rng(3)
        stats = blob_statistics(rng.normal(size=(50, 2)), rng.normal(size=(50, 2)) + 3.0)
        out = stats.to_dict()
        assert set(out) == {"fidelity_0", "fidelity_1", "snr", "threshold", "means", "sigmas",
                            "snr_vs_time"}
