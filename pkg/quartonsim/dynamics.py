"""
Time-domain readout simulation in a truncated eigenbasis.

The lab-frame drive H_d(t) = ε(t) n̂₀ with ε(t) = 2ε₀ cos(2π f_d t) on [0, T] acts on the
diagonal H₀. Energies are in GHz and are multiplied by 2π to give rad/ns; dissipator
amplitudes carry sqrt(2π) so their squares are rates in 1/ns.

Two engines share the model:
- run_lindblad: deterministic master equation on a sparse Liouvillian (row-major vec).
- run_trajectories: normalized heterodyne stochastic Schrödinger equation on the
  monitored bath k*, with seeded per-trajectory random streams.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.stats import norm

from quartonsim.dissipation import (
    DEFAULT_THRESHOLD_HZ,
    DissipatorSet,
    KappaModel,
    build_dissipators,
    drive_operator,
)
from quartonsim.log import get_logger, log_integration, log_trajectory_chunk
from quartonsim.spectrum import Label, LabeledSpectrum, SpectrumMetrics
from quartonsim.util import TWO_PI
from quartonsim.validation import (
    ConvergenceError,
    IntegrationError,
    Limits,
    SubstepError,
    check_trace,
    validate_non_negative,
    validate_positive,
)


logger = get_logger("dynamics")


def _unit(unit: str) -> dict:
    return {"unit": unit}


class ReadoutConfig(BaseModel):
    """Readout pulse, truncation and trajectory settings."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    omega_d: Optional[float] = Field(None, gt=0, json_schema_extra=_unit("GHz"))
    eps0: Optional[float] = Field(None, ge=0, json_schema_extra=_unit("GHz"))
    pulse_len: float = Field(5.0, gt=0, json_schema_extra=_unit("ns"))
    ringdown: float = Field(5.0, ge=0, json_schema_extra=_unit("ns"))
    integration_time: float = Field(5.0, gt=0, json_schema_extra=_unit("ns"))
    n_bar_target: float = Field(2.0, ge=0, json_schema_extra=_unit(""))
    eta: float = Field(1.0, gt=0, le=1, json_schema_extra=_unit(""))
    n_traj: int = Field(1000, ge=1, json_schema_extra=_unit(""))
    substeps: int = Field(200, ge=1, json_schema_extra=_unit(""))
    samples_per_period: int = Field(5, ge=1, json_schema_extra=_unit(""))
    seed: int = Field(7, ge=0, json_schema_extra=_unit(""))
    i_star: int = Field(9, ge=2, json_schema_extra=_unit(""))
    j_star: int = Field(5, ge=2, json_schema_extra=_unit(""))
    cluster_c: float = Field(1.0, gt=0, json_schema_extra=_unit(""))
    discard_threshold: float = Field(10.0, ge=0, json_schema_extra=_unit("kHz"))
    n_times: int = Field(201, ge=2, json_schema_extra=_unit(""))
    chunk_size: int = Field(64, ge=1, json_schema_extra=_unit(""))


# ── Model ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DrivePulse:
    """Square pulse ε(t) = 2 ε₀ cos(2π f_d t) for 0 ≤ t ≤ length."""
    eps0: float
    omega_d: float
    length: float

    def __call__(self, t: float) -> float:
        if 0.0 <= t <= self.length:
            return 2.0 * self.eps0 * math.cos(TWO_PI * self.omega_d * t)
        return 0.0


def drive_frequency(spec: LabeledSpectrum) -> float:
    """Midpoint of the resonator lines for qubit |0> and |1>."""
    return 0.5 * (spec.transition((0, 0), (1, 0)) + spec.transition((0, 1), (1, 1)))


def check_drive_frequency(spec: LabeledSpectrum, omega_d: float) -> None:
    lines = sorted((spec.transition((0, 0), (1, 0)), spec.transition((0, 1), (1, 1))))
    if not lines[0] <= omega_d <= lines[1]:
        raise ValueError(
            f"Drive frequency {omega_d:.4f} GHz lies outside the pulled resonator lines "
            f"[{lines[0]:.4f}, {lines[1]:.4f}] GHz"
        )


@dataclass
class TruncatedEigenbasis:
    """Labeled eigenstates with n_a < i*, n_b < j*, and operators projected onto them."""
    labels: List[Label]
    energies: np.ndarray
    n0: np.ndarray
    dissipators: List[np.ndarray]
    monitored: Optional[int] = None
    dissipator_set: Optional[DissipatorSet] = None

    @classmethod
    def from_spectrum(cls, spec: LabeledSpectrum, kappa_model: KappaModel, i_star: int = 9,
                      j_star: int = 5, c: float = 1.0,
                      threshold_hz: float = DEFAULT_THRESHOLD_HZ) -> 'TruncatedEigenbasis':
        labels = sorted(lab for lab in spec.label_map if lab[0] < i_star and lab[1] < j_star)
        missing = [(na, nb) for na in range(i_star) for nb in range(j_star)
                   if (na, nb) not in spec.label_map]
        if missing:
            logger.warning(f"{len(missing)} labels absent from the truncated eigenbasis")
        indices = [spec.index(lab) for lab in labels]
        n0 = spec.in_eigenbasis(drive_operator(spec.space), indices)
        dset = build_dissipators(spec, kappa_model, indices, c, threshold_hz)
        return cls(labels, spec.energies[indices].copy(), n0, dset.operators, dset.k_star, dset)

    @classmethod
    def from_arrays(cls, labels: Sequence[Label], energies: Sequence[float], n0: np.ndarray,
                    dissipators: Sequence[np.ndarray] = (),
                    monitored: Optional[int] = None) -> 'TruncatedEigenbasis':
        energies = np.asarray(energies, dtype=float)
        n0 = np.asarray(n0, dtype=complex)
        if n0.shape != (len(energies), len(energies)):
            raise ValueError(f"n0 shape {n0.shape} does not match {len(energies)} states")
        return cls([tuple(lab) for lab in labels], energies, n0,
                   [np.asarray(d, dtype=complex) for d in dissipators], monitored)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def position(self, label: Label) -> int:
        return self.labels.index(tuple(label))

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.array([lab[0] for lab in self.labels], dtype=float)

    @property
    def qubit_states(self) -> np.ndarray:
        return np.array([lab[1] for lab in self.labels], dtype=int)

    def without_dissipation(self) -> 'TruncatedEigenbasis':
        return TruncatedEigenbasis(self.labels, self.energies, self.n0, [], None)


# ── Master equation ──────────────────────────────────────────────


def liouvillian(H: np.ndarray, jumps: Sequence[np.ndarray]) -> sparse.csr_matrix:
    """
    Row-major superoperator: vec(AρB) = (A ⊗ Bᵀ) vec(ρ).

    L = -i(H⊗I - I⊗Hᵀ) + Σ [d⊗d* - ½ d†d⊗I - ½ I⊗(d†d)ᵀ]
    """
    dim = H.shape[0]
    eye = sparse.identity(dim, dtype=complex, format="csr")
    H = sparse.csr_matrix(H)
    out = -1j * (sparse.kron(H, eye) - sparse.kron(eye, H.T))
    for d in jumps:
        d = sparse.csr_matrix(d)
        dd = (d.conj().T @ d).tocsr()
        out = out + sparse.kron(d, d.conj()) - 0.5 * sparse.kron(dd, eye) \
            - 0.5 * sparse.kron(eye, dd.T)
    return out.tocsr()


def commutator_superoperator(op: np.ndarray) -> sparse.csr_matrix:
    """-i(O⊗I - I⊗Oᵀ)."""
    return liouvillian(op, [])


@dataclass
class LindbladResult:
    """Eigenstate populations vs time and the QND fidelity of the prepared state."""
    times: np.ndarray
    populations: np.ndarray
    labels: List[Label]
    initial: Label
    rho_final: np.ndarray
    purity: np.ndarray
    trace_error: float
    hermiticity_error: float = 0.0

    @property
    def photon_number(self) -> np.ndarray:
        return self.populations @ np.array([lab[0] for lab in self.labels], dtype=float)

    def qubit_populations(self, index: int = -1) -> Dict[int, float]:
        """Population summed over the resonator ladder for each qubit label."""
        out: Dict[int, float] = {}
        for pos, lab in enumerate(self.labels):
            out[lab[1]] = out.get(lab[1], 0.0) + float(self.populations[index, pos])
        return out

    @property
    def qnd_fidelity(self) -> float:
        return self.qubit_populations()[self.initial[1]]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.rho_final + self.rho_final.conj().T))))

    def leakage(self) -> Dict[int, float]:
        """Final population in every qubit label other than the prepared one."""
        return {q: p for q, p in self.qubit_populations().items() if q != self.initial[1]}


def _initial_label(init: Union[int, Label]) -> Label:
    return (0, int(init)) if isinstance(init, (int, np.integer)) else tuple(init)


def run_lindblad(model: TruncatedEigenbasis, drive: Optional[DrivePulse],
                 init: Union[int, Label] = 0, t_end: Optional[float] = None,
                 n_times: int = 201, rtol: float = 1e-8, atol: float = 1e-10,
                 trace_tol: float = Limits.TRACE_TOL) -> LindbladResult:
    """
    Integrate ρ̇ = -i[H₀ + H_d(t), ρ] + Σ D[d_k]ρ through the pulse and the ring-down.

    Args:
        model: Truncated eigenbasis with projected operators
        drive: Pulse, or None for free evolution
        init: Prepared qubit state k (starts in |0,k>) or an explicit label
        t_end: Final time (ns); defaults to the pulse length
        n_times: Output samples on [0, t_end]

    Raises:
        IntegrationError: On solver failure or trace deviation beyond trace_tol
    """
    label = _initial_label(init)
    dim = model.dim
    if t_end is None:
        t_end = drive.length if drive is not None else 0.0
    validate_positive("t_end", t_end)
    h0 = np.diag(TWO_PI * model.energies).astype(complex)
    jumps = [math.sqrt(TWO_PI) * d for d in model.dissipators]
    L0 = liouvillian(h0, jumps)
    Ld = commutator_superoperator(TWO_PI * model.n0)

    rho0 = np.zeros((dim, dim), dtype=complex)
    pos = model.position(label)
    rho0[pos, pos] = 1.0
    times = np.linspace(0.0, t_end, n_times)

    def free(t, y):
        return L0 @ y

    def driven(t, y):
        return L0 @ y + drive(t) * (Ld @ y)

    segments = []
    if drive is not None and drive.eps0 != 0 and drive.length > 0:
        switch = min(drive.length, t_end)
        segments.append((0.0, switch, driven))
        if t_end > switch:
            segments.append((switch, t_end, free))
    else:
        segments.append((0.0, t_end, free))

    log_integration("master equation", t_end)
    y = rho0.reshape(-1)
    out_t, out_y = [0.0], [y]
    for start, stop, rhs in segments:
        inside = times[(times > start) & (times <= stop)]
        t_eval = np.unique(np.append(inside, stop))
        sol = solve_ivp(rhs, (start, stop), y, method="DOP853", t_eval=t_eval,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"Master-equation integration failed: {sol.message}")
        keep = np.isin(sol.t, inside)
        out_t.extend(sol.t[keep])
        out_y.extend(sol.y.T[keep])
        y = sol.y[:, -1]

    populations, purity, worst, skew = [], [], 0.0, 0.0
    for t, col in zip(out_t, out_y):
        rho = col.reshape(dim, dim)
        check_trace(rho, t, trace_tol)
        worst = max(worst, abs(np.trace(rho) - 1.0))
        skew = max(skew, float(np.max(np.abs(rho - rho.conj().T))))
        populations.append(np.real(np.diagonal(rho)))
        purity.append(float(np.real(np.vdot(rho, rho))))
    rho_final = out_y[-1].reshape(dim, dim)
    return LindbladResult(np.array(out_t), np.array(populations), list(model.labels), label,
                          rho_final, np.array(purity), float(worst), skew)


def drive_amplitude_guess(chi: float, kappa: float, n_bar: float) -> float:
    """ε₀ = sqrt(n̄ (χ² + κ²/4)) for a drive detuned by ±χ from each pulled line."""
    validate_non_negative("n_bar", n_bar)
    return math.sqrt(n_bar * (chi ** 2 + kappa ** 2 / 4.0))


def steady_photon_number(result: LindbladResult, fraction: float = 0.2) -> float:
    """Mean photon number over the final `fraction` of the record."""
    count = max(1, int(len(result.times) * fraction))
    return float(np.mean(result.photon_number[-count:]))


def calibrate_drive(model: Optional[TruncatedEigenbasis], metrics: SpectrumMetrics, kappa: float,
                    n_bar_target: float, omega_d: Optional[float] = None,
                    settle: Optional[float] = None, rtol: float = Limits.CALIBRATION_RTOL,
                    max_iter: int = Limits.CALIBRATION_MAX_ITER) -> float:
    """
    Drive amplitude giving a steady photon number n_bar_target, averaged over |0> and |1>.

    Starts from the analytic guess and rescales ε₀ by sqrt(target / measured) after
    short master-equation runs. With model None the analytic guess is returned.

    Raises:
        ConvergenceError: If the photon number misses the target after max_iter runs
    """
    validate_non_negative("n_bar_target", n_bar_target)
    if n_bar_target == 0:
        return 0.0
    eps0 = drive_amplitude_guess(metrics.chi, kappa, n_bar_target)
    if model is None:
        return eps0
    omega_d = omega_d if omega_d is not None else metrics.omega_r + metrics.chi
    if settle is None:
        settle = max(5.0, 8.0 / (TWO_PI * kappa))
    numbers: List[float] = []
    for iteration in range(max_iter):
        pulse = DrivePulse(eps0, omega_d, settle)
        numbers = [steady_photon_number(run_lindblad(model, pulse, k, settle,
                                                     n_times=int(settle * 20) + 1))
                   for k in (0, 1)]
        average = float(np.mean(numbers))
        logger.debug(f"Calibration {iteration}: eps0={eps0:.5f} GHz, n={numbers}")
        if average > 0 and abs(average / n_bar_target - 1.0) < rtol:
            return eps0
        if average <= 0:
            break
        eps0 *= math.sqrt(n_bar_target / average)
    raise ConvergenceError(
        f"Drive calibration did not reach n={n_bar_target} in {max_iter} runs; "
        f"last photon numbers {numbers}"
    )


def converge_truncation(spec: LabeledSpectrum, kappa_model: KappaModel, drive: DrivePulse,
                        init: int = 0, start: Tuple[int, int] = (9, 5), tol: float = 1e-3,
                        max_steps: int = 4, t_end: Optional[float] = None, c: float = 1.0,
                        threshold_hz: float = DEFAULT_THRESHOLD_HZ
                        ) -> Tuple[TruncatedEigenbasis, LindbladResult]:
    """
    Grow (i*, j*) until final populations change by less than tol.

    Raises:
        ConvergenceError: If max_steps enlargements do not converge
    """
    i_star, j_star = start
    previous: Optional[LindbladResult] = None
    change = math.inf
    for _ in range(max_steps + 1):
        model = TruncatedEigenbasis.from_spectrum(spec, kappa_model, i_star, j_star, c,
                                                  threshold_hz)
        result = run_lindblad(model, drive, init, t_end)
        if previous is not None:
            final_prev = dict(zip(previous.labels, previous.populations[-1]))
            change = max(abs(p - final_prev.get(lab, 0.0))
                         for lab, p in zip(result.labels, result.populations[-1]))
            logger.info(f"Truncation ({i_star}, {j_star}): population change {change:.2e}")
            if change < tol:
                return model, result
        previous = result
        i_star, j_star = i_star + 1, j_star + 1
    raise ConvergenceError(f"Truncation did not converge (last change {change:.2e})")


# ── Stochastic trajectories ──────────────────────────────────────


@dataclass
class TrajectoryEnsemble:
    """
    Demodulated heterodyne records per prepared qubit state.

    records[k] has shape (n_traj, n_intervals): record increments per measurement
    interval divided by the interval, demodulated by exp(i 2π f_d t).
    """
    times: np.ndarray
    dt: float
    records: Dict[int, np.ndarray]
    mean_populations: Dict[int, np.ndarray]
    population_sem: Dict[int, np.ndarray]
    labels: List[Label]
    omega_d: float
    seed: int

    @property
    def states(self) -> List[int]:
        return sorted(self.records)

    def samples(self, window: Optional[float] = None) -> int:
        if window is None:
            return len(self.times)
        return max(1, min(len(self.times), int(round(window / self.dt))))

    def weights(self, window: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """W_I(t) = |<I_1 - I_0>|, W_Q(t) = |<Q_1 - Q_0>| over the first window ns."""
        n = self.samples(window)
        k0, k1 = self.states[0], self.states[-1]
        diff = self.records[k1][:, :n].mean(axis=0) - self.records[k0][:, :n].mean(axis=0)
        return np.abs(diff.real), np.abs(diff.imag)

    def integrate(self, window: Optional[float] = None) -> Dict[int, np.ndarray]:
        """Weighted integrated (I, Q) points per prepared state, shape (n_traj, 2)."""
        n = self.samples(window)
        w_i, w_q = self.weights(window)
        out = {}
        for k, rec in self.records.items():
            part = rec[:, :n]
            out[k] = np.stack([part.real @ w_i, part.imag @ w_q], axis=1) * self.dt
        return out


def _trajectory_chunk(task: dict) -> dict:
    """Integrate one chunk of trajectories; pure function of the task."""
    energies = task["energies"]
    n0 = task["n0"]
    jumps = task["jumps"]
    monitored = task["monitored"]
    eps0, omega_d, pulse_len = task["drive"]
    dt, substeps, n_intervals = task["dt"], task["substeps"], task["n_intervals"]
    eta, seed, k = task["eta"], task["seed"], task["state"]
    indices = task["indices"]
    start = task["start"]

    dim = len(energies)
    n = len(indices)
    ds = dt / substeps
    phase = np.exp(-1j * TWO_PI * energies * ds)
    drive_op = TWO_PI * n0
    n_jumps = len(jumps)
    jumps_t = [d.T for d in jumps]
    ldl = sum((d.conj().T @ d for d in jumps), np.zeros((dim, dim), dtype=complex))
    rngs = [np.random.default_rng([seed, k, idx]) for idx in indices]
    inflation = math.sqrt((1.0 - eta) / eta)

    psi = np.zeros((n, dim), dtype=complex)
    psi[:, start] = 1.0
    records = np.zeros((n, n_intervals), dtype=complex)
    pops = np.zeros((n_intervals + 1, dim))
    pops_sq = np.zeros((n_intervals + 1, dim))
    p = np.abs(psi) ** 2
    pops[0] += p.sum(axis=0)
    pops_sq[0] += (p ** 2).sum(axis=0)

    width = max(n_jumps, 1)
    for interval in range(n_intervals):
        # One block per trajectory and interval keeps streams independent of chunking
        draws = np.stack([rng.standard_normal((substeps, width + 1, 2)) for rng in rngs], axis=1)
        noise = (draws[..., 0] + 1j * draws[..., 1]) * math.sqrt(ds / 2.0)
        signal = np.zeros(n, dtype=complex)
        for step in range(substeps):
            t = (interval * substeps + step) * ds
            eps = 2.0 * eps0 * math.cos(TWO_PI * omega_d * t) if t <= pulse_len else 0.0
            drift = -0.5 * (psi @ ldl.T)
            if eps:
                drift += -1j * eps * (psi @ drive_op.T)
            update = drift * ds
            for j, (d, dT) in enumerate(zip(jumps, jumps_t)):
                lpsi = psi @ dT
                expect = np.sum(psi.conj() * lpsi, axis=1)
                update += (np.conj(expect)[:, None] * lpsi
                           - 0.5 * (np.abs(expect) ** 2)[:, None] * psi) * ds
                update += (lpsi - expect[:, None] * psi) * noise[step, :, j][:, None]
                if j == monitored:
                    signal += expect * ds + noise[step, :, j] \
                        + inflation * noise[step, :, width]
            psi = (psi + update) * phase
            norms = np.linalg.norm(psi, axis=1)
            drift_norm = float(np.max(np.abs(norms - 1.0)))
            if drift_norm > Limits.NORM_DRIFT_TOL:
                raise SubstepError(
                    f"Norm drift {drift_norm:.3f} at t={t:.4f} ns; increase substeps"
                )
            psi /= norms[:, None]
        t_mid = (interval + 0.5) * dt
        records[:, interval] = signal / dt * np.exp(1j * TWO_PI * omega_d * t_mid)
        p = np.abs(psi) ** 2
        pops[interval + 1] += p.sum(axis=0)
        pops_sq[interval + 1] += (p ** 2).sum(axis=0)
    return {"indices": indices, "records": records, "pops": pops, "pops_sq": pops_sq,
            "chunk": task["chunk"]}


def run_trajectories(config: ReadoutConfig, model: TruncatedEigenbasis, drive: DrivePulse,
                     states: Sequence[int] = (0, 1), t_end: Optional[float] = None,
                     workers: int = 1) -> TrajectoryEnsemble:
    """
    Heterodyne trajectories for each prepared qubit state.

    Each trajectory draws from default_rng([seed, state, index]), and chunks have a
    fixed size, so results do not depend on the worker count.

    Raises:
        IntegrationError: If the model has no monitored bath
        SubstepError: If the norm drifts beyond tolerance
    """
    if model.monitored is None or not model.dissipators:
        raise IntegrationError("Trajectories need a monitored dissipator")
    t_end = t_end if t_end is not None else config.integration_time
    dt = 1.0 / (config.samples_per_period * drive.omega_d)
    n_intervals = max(1, int(round(t_end / dt)))
    jumps = [math.sqrt(TWO_PI) * d for d in model.dissipators]

    tasks = []
    for k in states:
        start = model.position((0, k))
        for chunk, first in enumerate(range(0, config.n_traj, config.chunk_size)):
            indices = list(range(first, min(first + config.chunk_size, config.n_traj)))
            tasks.append({
                "energies": model.energies, "n0": model.n0, "jumps": jumps,
                "monitored": model.monitored, "drive": (drive.eps0, drive.omega_d, drive.length),
                "dt": dt, "substeps": config.substeps, "n_intervals": n_intervals,
                "eta": config.eta, "seed": config.seed, "state": k, "indices": indices,
                "start": start, "chunk": chunk,
            })

    log_integration(f"{config.n_traj} trajectories x {len(states)} states", t_end)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trajectory_chunk, tasks))
    else:
        results = [_trajectory_chunk(task) for task in tasks]

    records: Dict[int, np.ndarray] = {}
    means: Dict[int, np.ndarray] = {}
    sems: Dict[int, np.ndarray] = {}
    for k in states:
        mine = [r for task, r in zip(tasks, results) if task["state"] == k]
        for r in mine:
            log_trajectory_chunk(r["chunk"], len(r["indices"]))
        records[k] = np.concatenate([r["records"] for r in mine], axis=0)
        total = sum(r["pops"] for r in mine)
        total_sq = sum(r["pops_sq"] for r in mine)
        mean = total / config.n_traj
        var = np.maximum(total_sq / config.n_traj - mean ** 2, 0.0)
        means[k] = mean
        sems[k] = np.sqrt(var / config.n_traj)
    times = (np.arange(n_intervals) + 0.5) * dt
    return TrajectoryEnsemble(times, dt, records, means, sems, list(model.labels),
                              drive.omega_d, config.seed)


# ── Readout statistics ───────────────────────────────────────────


@dataclass(frozen=True)
class ReadoutStatistics:
    """Assignment fidelity per prepared state and SNR of projected IQ blobs."""
    fidelity_0: float
    fidelity_1: float
    snr: float
    threshold: float
    means: Tuple[float, float]
    sigmas: Tuple[float, float]
    snr_vs_time: List[Tuple[float, float, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fidelity_0": self.fidelity_0,
            "fidelity_1": self.fidelity_1,
            "snr": self.snr,
            "threshold": self.threshold,
            "means": list(self.means),
            "sigmas": list(self.sigmas),
            "snr_vs_time": [
                {"window_ns": w, "snr": s, "fidelity_0": f0, "fidelity_1": f1}
                for w, s, f0, f1 in self.snr_vs_time
            ],
        }


def equal_likelihood_threshold(mu0: float, s0: float, mu1: float, s1: float) -> float:
    """Point between the means where the two Gaussian densities are equal."""
    if math.isclose(s0, s1, rel_tol=1e-12):
        return 0.5 * (mu0 + mu1)
    a = 1.0 / s1 ** 2 - 1.0 / s0 ** 2
    b = 2.0 * (mu0 / s0 ** 2 - mu1 / s1 ** 2)
    c = mu1 ** 2 / s1 ** 2 - mu0 ** 2 / s0 ** 2 + 2.0 * math.log(s1 / s0)
    roots = np.roots([a, b, c])
    roots = roots[np.isreal(roots)].real
    lo, hi = sorted((mu0, mu1))
    inside = [r for r in roots if lo <= r <= hi]
    if inside:
        return float(inside[0])
    return 0.5 * (mu0 + mu1)


def gaussian_assignment(mu0: float, s0: float, mu1: float, s1: float) -> Tuple[float, float, float]:
    """
    Assignment fidelities (F0, F1) and threshold for two 1-D Gaussians with mu0 < mu1.
    """
    threshold = equal_likelihood_threshold(mu0, s0, mu1, s1)
    f0 = float(norm.cdf((threshold - mu0) / s0))
    f1 = float(norm.sf((threshold - mu1) / s1))
    return f0, f1, threshold


def blob_statistics(points0: np.ndarray, points1: np.ndarray) -> ReadoutStatistics:
    """
    Project IQ points on the axis through the blob means and fit Gaussians.

    Identical means give fidelity 0.5 and SNR 0.
    """
    points0 = np.asarray(points0, dtype=float)
    points1 = np.asarray(points1, dtype=float)
    m0, m1 = points0.mean(axis=0), points1.mean(axis=0)
    separation = float(np.linalg.norm(m1 - m0))
    if separation == 0:
        logger.warning("Readout blobs coincide; no separation")
        spread = float(np.std(points0)) if points0.size else 0.0
        return ReadoutStatistics(0.5, 0.5, 0.0, 0.0, (0.0, 0.0), (spread, spread))
    axis = (m1 - m0) / separation
    x0 = (points0 - m0) @ axis
    x1 = (points1 - m0) @ axis
    mu0, s0 = norm.fit(x0)
    mu1, s1 = norm.fit(x1)
    s0 = max(s0, 1e-300)
    s1 = max(s1, 1e-300)
    if abs(mu1 - mu0) < Limits.MIN_BLOB_SEPARATION * max(s0, s1):
        logger.warning(
            f"Low blob separation: |Δμ| = {abs(mu1 - mu0):.3g} < "
            f"{Limits.MIN_BLOB_SEPARATION} σ"
        )
    f0, f1, threshold = gaussian_assignment(mu0, s0, mu1, s1)
    snr = abs(mu1 - mu0) / (0.5 * (s0 + s1))
    return ReadoutStatistics(f0, f1, float(snr), threshold, (float(mu0), float(mu1)),
                             (float(s0), float(s1)))


def readout_statistics(ensemble: TrajectoryEnsemble, window: Optional[float] = None,
                       windows: Sequence[float] = (1.0, 2.0, 3.0, 4.0, 5.0)) -> ReadoutStatistics:
    """
    Fidelities and SNR for the integration window, plus their growth over `windows`.

    Raises:
        ValueError: With fewer than two prepared-state ensembles
    """
    if len(ensemble.states) < 2:
        raise ValueError("Readout statistics need two prepared-state ensembles")
    k0, k1 = ensemble.states[0], ensemble.states[-1]
    points = ensemble.integrate(window)
    stats = blob_statistics(points[k0], points[k1])
    curve = []
    total = ensemble.dt * len(ensemble.times)
    for w in windows:
        if w > total + 1e-9:
            continue
        pts = ensemble.integrate(w)
        s = blob_statistics(pts[k0], pts[k1])
        curve.append((float(w), s.snr, s.fidelity_0, s.fidelity_1))
    return ReadoutStatistics(stats.fidelity_0, stats.fidelity_1, stats.snr, stats.threshold,
                             stats.means, stats.sigmas, curve)
