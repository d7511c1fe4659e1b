"""
Public API for quartonsim.
Provides a high-level interface that runs the full readout pipeline from one RunConfig.
"""

from functools import cached_property
from typing import Dict, List, Optional, Sequence

from quartonsim.basis import BasisChoice, TiltResult, optimize_basis, optimize_tilt
from quartonsim.circuit import CircuitParams, HamiltonianBundle, build_hamiltonian
from quartonsim.config import RunConfig
from quartonsim.decoherence import DecoherenceBudget, decoherence_budget
from quartonsim.dissipation import KappaModel, bath_table
from quartonsim.dynamics import (
    DrivePulse,
    LindbladResult,
    ReadoutStatistics,
    TrajectoryEnsemble,
    TruncatedEigenbasis,
    calibrate_drive,
    check_drive_frequency,
    converge_truncation,
    drive_frequency,
    readout_statistics,
    run_lindblad,
    run_trajectories,
)
from quartonsim.log import get_logger
from quartonsim.qnd import DecayMatrix, QndEstimate, build_decay_matrix, qbar
from quartonsim.spectrum import LabeledSpectrum, SpectrumMetrics, compute_metrics, \
    eigensolve_and_label


class ReadoutSimulator:
    """
    Readout pipeline for one operating point.

    Every stage is computed on first use and cached:
    tilt and basis -> Hamiltonian -> labeled spectrum -> metrics -> decay matrix,
    dissipators and truncated eigenbasis -> calibrated drive -> dynamics.
    """

    def __init__(self, config: Optional[RunConfig] = None, workers: int = 1):
        """
        Args:
            config: Run configuration (defaults to the starred design point)
            workers: Process-pool size for trajectories
        """
        self.config = config or RunConfig()
        self.workers = workers
        self.logger = get_logger("api")

    # -- circuit and basis ------------------------------------------

    @cached_property
    def tilt_result(self) -> Optional[TiltResult]:
        solver = self.config.solver
        if not solver.optimize_tilt:
            return None
        return optimize_tilt(self.config.circuit, None, solver.tilt_range, solver.dims,
                             solver.heuristic, solver.n_levels, solver.order, True,
                             solver.tilt_points)

    @property
    def params(self) -> CircuitParams:
        if self.tilt_result is not None:
            return self.tilt_result.params
        return self.config.circuit

    @cached_property
    def basis(self) -> BasisChoice:
        if self.tilt_result is not None:
            return self.tilt_result.basis
        solver = self.config.solver
        return optimize_basis(self.params, solver.heuristic, solver.n_levels, solver.order,
                              solver.dims_a)

    @cached_property
    def hamiltonian(self) -> HamiltonianBundle:
        solver = self.config.solver
        return build_hamiltonian(self.params, self.basis, solver.mode, solver.order, solver.dims)

    # -- spectrum ---------------------------------------------------

    def spectrum(self) -> LabeledSpectrum:
        return self._spectrum

    @cached_property
    def _spectrum(self) -> LabeledSpectrum:
        return eigensolve_and_label(self.hamiltonian.H_full, self.basis,
                                    self.config.solver.label_range)

    def metrics(self) -> SpectrumMetrics:
        return self._metrics

    @cached_property
    def _metrics(self) -> SpectrumMetrics:
        metrics = compute_metrics(self.spectrum(), self.config.solver.n_star)
        self.logger.info(f"2χ = {metrics.cross_kerr_2chi:.1f} MHz, "
                         f"K_b = {metrics.self_kerr_Kb:.1f} MHz, "
                         f"S = ({metrics.spread_q0:.2f}, {metrics.spread_q1:.2f}) MHz")
        return metrics

    @cached_property
    def kappa_model(self) -> KappaModel:
        return KappaModel.from_spectrum(self.spectrum(), self.params.kappa_r,
                                        self.params.kappa_f)

    # -- analytic QND -----------------------------------------------

    @cached_property
    def decay_matrix(self) -> DecayMatrix:
        return build_decay_matrix(self.spectrum(), self.kappa_model)

    def qnd(self, states: Sequence[int] = (0, 1)) -> List[QndEstimate]:
        readout = self.config.readout
        return [qbar(self.decay_matrix, self.spectrum(), k, readout.n_bar_target,
                     self.config.solver.delta_t) for k in states]

    # -- dynamics ---------------------------------------------------

    @cached_property
    def model(self) -> TruncatedEigenbasis:
        readout = self.config.readout
        return TruncatedEigenbasis.from_spectrum(
            self.spectrum(), self.kappa_model, readout.i_star, readout.j_star,
            readout.cluster_c, readout.discard_threshold * 1e3)

    @cached_property
    def drive(self) -> DrivePulse:
        readout = self.config.readout
        spec = self.spectrum()
        omega_d = readout.omega_d if readout.omega_d is not None else drive_frequency(spec)
        check_drive_frequency(spec, omega_d)
        eps0 = readout.eps0
        if eps0 is None:
            eps0 = calibrate_drive(self.model, self.metrics(), self.params.kappa_r,
                                   readout.n_bar_target, omega_d)
        self.logger.info(f"Drive: f_d = {omega_d:.4f} GHz, ε₀ = {eps0:.5f} GHz")
        return DrivePulse(eps0, omega_d, readout.pulse_len)

    def dynamics(self, k: int = 0, converge: bool = False) -> LindbladResult:
        """Master-equation readout of qubit state k through pulse and ring-down."""
        readout = self.config.readout
        solver = self.config.solver
        t_end = readout.pulse_len + readout.ringdown
        if converge:
            _, result = converge_truncation(
                self.spectrum(), self.kappa_model, self.drive, k,
                (readout.i_star, readout.j_star), t_end=t_end, c=readout.cluster_c,
                threshold_hz=readout.discard_threshold * 1e3)
            return result
        return run_lindblad(self.model, self.drive, k, t_end, readout.n_times,
                            solver.rtol, solver.atol)

    def trajectories(self) -> TrajectoryEnsemble:
        return self._ensemble

    @cached_property
    def _ensemble(self) -> TrajectoryEnsemble:
        readout = self.config.readout
        return run_trajectories(readout, self.model, self.drive, (0, 1),
                                readout.integration_time, self.workers)

    def readout_statistics(self) -> ReadoutStatistics:
        return readout_statistics(self.trajectories(), self.config.readout.integration_time)

    # -- decoherence ------------------------------------------------

    def decoherence(self, include_echo: bool = True) -> DecoherenceBudget:
        return decoherence_budget(self.spectrum(), self.params, self.metrics(),
                                  self.config.environment, self.kappa_model,
                                  self.config.echo, include_echo)

    def bath_table(self) -> List[dict]:
        return bath_table(self.model.dissipator_set)

    def summary(self) -> Dict[str, object]:
        """Operating point, basis and metrics as one dict."""
        out: Dict[str, object] = {
            "tilt": self.params.tilt,
            "basis": self.basis.to_dict(),
            "metrics": self.metrics().to_dict(),
        }
        if self.tilt_result is not None:
            out["tilt_residual"] = self.tilt_result.residual
            out["tilt_residual_untilted"] = self.tilt_result.residual_untilted
            out["tilt_at_boundary"] = self.tilt_result.at_boundary
        return out


def simulate(config: Optional[RunConfig] = None, workers: int = 1) -> ReadoutSimulator:
    """
    Create a simulator for one operating point.

    Args:
        config: Run configuration; defaults to the starred design point
        workers: Process-pool size for trajectories

    Returns:
        ReadoutSimulator

    Example:
        >>> sim = simulate()
        >>> sim.metrics().cross_kerr_2chi
    """
    return ReadoutSimulator(config, workers)
