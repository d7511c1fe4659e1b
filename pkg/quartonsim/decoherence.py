"""
Decoherence budget for the quarton-coupled qubit.

Rates are returned in 1/s. Every channel works from the labeled spectrum and the
circuit branches: thermal-photon dephasing, normal-metal resistor loss,
quasiparticle tunneling, dielectric loss, flux-noise relaxation, flux-noise echo
dephasing and Purcell decay.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import curve_fit

from quartonsim.circuit import (
    CircuitParams,
    JunctionBranch,
    SeparableOperator,
    branch_trig,
    build_hamiltonian,
)
from quartonsim.dissipation import KappaModel, effective_rate
from quartonsim.log import get_logger
from quartonsim.operators import charge_matrix, phase_matrix
from quartonsim.spectrum import Label, LabeledSpectrum, SpectrumMetrics, eigensolve_and_label
from quartonsim.util import (
    E_CHARGE,
    GHZ,
    HBAR,
    TWO_PI,
    bose_einstein,
    emission_factor,
    fit_quadratic,
    to_angular_per_second,
)
from quartonsim.validation import validate_non_negative, validate_positive


logger = get_logger("decoherence")

GROUND: Label = (0, 0)
QUBIT: Label = (0, 1)
RESONATOR: Label = (1, 0)

LOOPS = ("quarton", "ground")
QUARTON_BRANCHES = ("quarton_alpha", "quarton_series")

# Static flux steps (Φ0) for the quadratic fit of ω_q(Φ)
DEFAULT_FLUX_POINTS = tuple(np.linspace(-3e-3, 3e-3, 7))


def _unit(unit: str) -> dict:
    return {"unit": unit}


class EnvironmentParams(BaseModel):
    """Noise environment of the chip."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    T: float = Field(45.0, ge=0, json_schema_extra=_unit("mK"))
    R: float = Field(10.0, ge=0, json_schema_extra=_unit("uOhm"))
    x_qp: float = Field(5e-9, ge=0, json_schema_extra=_unit(""))
    Delta: float = Field(82.0, gt=0, json_schema_extra=_unit("GHz"))
    Q_diel: float = Field(7e6, gt=0, json_schema_extra=_unit(""))
    A_phi_quarton: float = Field(1.0, ge=0, json_schema_extra=_unit("uPhi0/rtHz"))
    A_phi_ground: float = Field(5.0, ge=0, json_schema_extra=_unit("uPhi0/rtHz"))
    gamma_phi: float = Field(1.0, ge=0.8, le=1.0, json_schema_extra=_unit(""))

    def flux_amplitude(self, loop: str) -> float:
        """Flux-noise amplitude of a loop in Φ0/√Hz."""
        if loop == "quarton":
            return self.A_phi_quarton * 1e-6
        if loop == "ground":
            return self.A_phi_ground * 1e-6
        raise ValueError(f"loop must be one of {LOOPS}, got {loop!r}")

    def flux_psd(self, loop: str) -> Callable[[np.ndarray], np.ndarray]:
        """S_Φ(f) = A^2 (1 Hz / f)^γ in Φ0^2/Hz."""
        amp2 = self.flux_amplitude(loop) ** 2
        gamma = self.gamma_phi
        return lambda f: amp2 * np.power(1.0 / np.asarray(f, dtype=float), gamma)


class EchoSettings(BaseModel):
    """Monte-Carlo echo simulation: series are split into independent echo segments."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_series: int = Field(100, ge=1, json_schema_extra=_unit(""))
    series_len: float = Field(10000.0, gt=0, json_schema_extra=_unit("us"))
    segment: float = Field(100.0, gt=0, json_schema_extra=_unit("us"))
    samples_per_segment: int = Field(1000, ge=10, json_schema_extra=_unit(""))
    n_taus: int = Field(50, ge=3, json_schema_extra=_unit(""))
    seed: int = Field(11, json_schema_extra=_unit(""))
    seeds: int = Field(1, ge=1, json_schema_extra=_unit(""))

    @property
    def dt(self) -> float:
        """Sample spacing in seconds."""
        return self.segment * 1e-6 / self.samples_per_segment

    @property
    def n_segments(self) -> int:
        return max(1, int(self.series_len // self.segment))


# ── Helpers ──────────────────────────────────────────────────────


def _zpfs(spec: LabeledSpectrum) -> Tuple[float, float]:
    if spec.basis is None:
        raise ValueError("Spectrum carries no basis; zero-point amplitudes are unknown")
    return spec.basis.zpf_a, spec.basis.zpf_b


def _branch_current(branches: Sequence[JunctionBranch], weights: Dict[str, float],
                    spec: LabeledSpectrum) -> SeparableOperator:
    """Σ weight * E * sin((arg + bias) / count), the phase derivative of the branch potentials."""
    zpf_a, zpf_b = _zpfs(spec)
    out = SeparableOperator(spec.space.dims)
    for branch in branches:
        weight = weights.get(branch.name, 0.0)
        if weight == 0 or branch.energy == 0:
            continue
        trig = branch_trig(branch, spec.space.dims, zpf_a, zpf_b, kind="sin")
        for coeff, left, right in trig.terms:
            out.add(weight * branch.energy * coeff, left, right)
    return out


def _element(spec: LabeledSpectrum, op: SeparableOperator, bra: Label, ket: Label) -> complex:
    return spec.matrix_element(op.matrix(), bra, ket)


# ── Thermal photons ──────────────────────────────────────────────


def thermal_dephasing(metrics: SpectrumMetrics, kappa_r: float, T: float,
                      omega_r: Optional[float] = None) -> float:
    """
    Shot-noise dephasing n̄(n̄+1)(2χ)^2/κ from thermal resonator photons.

    Args:
        metrics: Spectrum metrics supplying 2χ
        kappa_r: Resonator linewidth (GHz)
        T: Effective resonator temperature (mK)
        omega_r: Resonator frequency (GHz); defaults to the labeled |1,0> line

    Returns:
        Dephasing rate (1/s)
    """
    validate_non_negative("T", T)
    validate_positive("kappa_r", kappa_r)
    omega_r = metrics.omega_r if omega_r is None else omega_r
    n_th = bose_einstein(omega_r, T)
    two_chi = to_angular_per_second(metrics.cross_kerr_2chi / 1000.0)
    return n_th * (n_th + 1.0) * two_chi ** 2 / to_angular_per_second(kappa_r)


# ── Normal-metal resistor ────────────────────────────────────────


@dataclass(frozen=True)
class ResistorLoss:
    """Capacitive (Γ_C) and quarton-current (Γ_Q) parts of the resistor loss, 1/s."""
    rate_C: float
    rate_Q: float

    @property
    def rate(self) -> float:
        return self.rate_C + self.rate_Q


def resistor_charge_operator(params: CircuitParams, spec: LabeledSpectrum) -> SeparableOperator:
    """Charge combination coupling to the voltage across the normal-metal segment."""
    zpf_a, zpf_b = _zpfs(spec)
    c_a, c_b, c_j = params.C_a, params.C_b, params.C_J
    c_sigma = c_a * c_b + c_j * c_a + c_j * c_b
    k_a = c_j / (c_a + c_j * c_b / (c_b + c_j)) - c_j ** 2 / c_sigma
    k_b = c_j / (c_b + c_j * c_a / (c_a + c_j)) + c_j ** 2 / c_sigma
    op = SeparableOperator(spec.space.dims)
    op.add(k_a, charge_matrix(spec.space.n_a, zpf_a), None)
    op.add(k_b, None, charge_matrix(spec.space.n_b, zpf_b))
    return op


def resistor_loss(spec: LabeledSpectrum, params: CircuitParams, R: float,
                  transition: Tuple[Label, Label] = (GROUND, QUBIT)) -> ResistorLoss:
    """
    Zero-temperature loss through the normal-metal resistor.

    Γ_C = (8e²Rω/ħ)|<f|O_C|i>|² and Γ_Q = (8e²R/ħ)|<f|I_Q/ħ|i>|²/ω, where I_Q is the
    phase derivative of the quarton branch potentials.

    Args:
        spec: Labeled spectrum
        params: Circuit parameters (capacitances, quarton energies)
        R: Resistance (µΩ)
        transition: (lower, upper) labels; (0,0)->(0,1) for the qubit,
            (0,0)->(1,0) for the resonator
    """
    validate_non_negative("R", R)
    lower, upper = transition
    omega = to_angular_per_second(spec.transition(lower, upper))
    prefactor = 8.0 * E_CHARGE ** 2 * (R * 1e-6) / HBAR

    charge = _element(spec, resistor_charge_operator(params, spec), upper, lower)
    current = _element(spec, _branch_current(params.branches(), {n: 1.0 for n in QUARTON_BRANCHES},
                                             spec), upper, lower)
    rate_c = prefactor * omega * abs(charge) ** 2
    rate_q = prefactor * abs(TWO_PI * GHZ * current) ** 2 / omega
    return ResistorLoss(rate_c, rate_q)


# ── Quasiparticles ───────────────────────────────────────────────


def junction_phases(params: CircuitParams) -> List[JunctionBranch]:
    """
    One entry per junction type, with count = number of junctions and the phase
    across a single junction given by (c_a φ_a + c_b φ_b) / count.
    """
    return [b for b in params.branches() if b.energy > 0]


def quasiparticle_decay(spec: LabeledSpectrum, params: CircuitParams, env: EnvironmentParams,
                        branches: Optional[Sequence[str]] = None,
                        lumped_chains: bool = False) -> float:
    """
    Σ_junctions |<0|sin(φ_j/2)|1>|² (8E_J/πħ) x_qp sqrt(2Δ/ħω_q).

    With lumped_chains each series chain counts as one junction carrying
    the chain energy, which gives a rate lower by the chain length.

    Args:
        spec: Labeled spectrum
        params: Circuit parameters
        env: Environment (x_qp, Δ)
        branches: Branch names to include (default: all)
        lumped_chains: Count a junction chain once instead of per junction

    Returns:
        Relaxation rate (1/s)
    """
    zpf_a, zpf_b = _zpfs(spec)
    omega_q = spec.transition(GROUND, QUBIT)
    rate = 0.0
    for branch in junction_phases(params):
        if branches is not None and branch.name not in branches:
            continue
        half = JunctionBranch(branch.name, branch.energy, 2 * branch.count,
                              branch.coeff_a, branch.coeff_b, 0.0)
        op = branch_trig(half, spec.space.dims, zpf_a, zpf_b, kind="sin")
        element = _element(spec, op, GROUND, QUBIT)
        per_junction = (abs(element) ** 2 * 8.0 * to_angular_per_second(branch.energy) / math.pi
                        * env.x_qp * math.sqrt(2.0 * env.Delta / omega_q))
        count = 1 if lumped_chains else branch.count
        rate += count * per_junction
        logger.debug(f"Quasiparticle {branch.name}: {count} x {per_junction:.3e} /s")
    return rate


# ── Dielectric ───────────────────────────────────────────────────


def dielectric_loss(spec: LabeledSpectrum, params: CircuitParams, env: EnvironmentParams) -> float:
    """ħω_q²/(4E_C Q)|<0|φ_b|1>|²[coth(ħω_q/2k_BT) + 1] in 1/s."""
    _, zpf_b = _zpfs(spec)
    omega_q = spec.transition(GROUND, QUBIT)
    op = SeparableOperator(spec.space.dims)
    op.add(1.0, None, phase_matrix(spec.space.n_b, zpf_b))
    element = _element(spec, op, GROUND, QUBIT)
    # ħω²/(4E_C) with E_C = h E_C[Hz] reduces to 2π f_q² / (4 E_C)
    rate = TWO_PI * (omega_q * GHZ) ** 2 / (4.0 * params.E_Cb * GHZ * env.Q_diel)
    return rate * abs(element) ** 2 * emission_factor(omega_q, env.T)


# ── Flux noise ───────────────────────────────────────────────────


def flux_allocation(params: CircuitParams, loop: str) -> Dict[str, float]:
    """
    Branch coefficients of the loop flux φ̃ in the irrotational gauge.

    Ground-loop flux is split by inverse capacitance over {C_a, C_b, C_Q}; the
    quarton loop uses the A and B coefficients of the two quarton capacitances.
    """
    if loop == "ground":
        inverse = np.array([1.0 / params.C_a, 1.0 / params.C_b, 1.0 / params.C_Q])
        c_a, c_b, c_q = inverse / inverse.sum()
        return {"resonator": -c_a, "qubit": c_b, "quarton_alpha": c_q, "quarton_series": c_q}
    if loop == "quarton":
        c_a, c_b = params.C_a, params.C_b
        c_s, c_alpha = params.C_s_eff, params.C_alpha_eff
        denom = 2.0 * c_a * c_b + (c_a + c_b) * (c_alpha + c_s)
        coeff_a = c_b * c_s / denom
        coeff_b = c_a * c_s / denom
        return {
            "resonator": coeff_a,
            "qubit": coeff_b,
            "quarton_alpha": -(coeff_b - coeff_a),
            "quarton_series": -(coeff_b - coeff_a + 1.0),
        }
    raise ValueError(f"loop must be one of {LOOPS}, got {loop!r}")


def flux_derivative(spec: LabeledSpectrum, params: CircuitParams, loop: str) -> SeparableOperator:
    """∂H/∂φ̃ (GHz per radian of loop phase)."""
    return _branch_current(params.branches(), flux_allocation(params, loop), spec)


def flux_t1(spec: LabeledSpectrum, params: CircuitParams, env: EnvironmentParams,
            loops: Sequence[str] = LOOPS) -> Dict[str, float]:
    """
    |<0|∂H/∂Φ|1>|² S_Φ(ω_q) per loop, in 1/s.

    ∂H/∂Φ = (2π/Φ0) ∂H/∂φ̃; with S_Φ in Φ0²/Hz the Φ0 cancels.
    """
    omega_q = spec.transition(GROUND, QUBIT)
    rates = {}
    for loop in loops:
        element = _element(spec, flux_derivative(spec, params, loop), GROUND, QUBIT)
        d_omega = TWO_PI * to_angular_per_second(abs(element))
        psd = float(env.flux_psd(loop)(omega_q * GHZ))
        rates[loop] = d_omega ** 2 * psd
        logger.debug(f"Flux T1 {loop} loop: |dH/dφ| = {abs(element):.4e} GHz, "
                     f"rate {rates[loop]:.3e} /s")
    return rates


@dataclass(frozen=True)
class FluxDispersion:
    """ω_q(Φ) ≈ f0 + f1 δΦ + f2 δΦ², with f in GHz and δΦ in Φ0."""
    loop: str
    f0: float
    f1: float
    f2: float

    def shift_hz(self, delta: np.ndarray) -> np.ndarray:
        return (self.f1 * delta + self.f2 * delta ** 2) * GHZ


def qubit_frequency_vs_flux(params: CircuitParams, basis, loop: str,
                            flux_points: Sequence[float] = DEFAULT_FLUX_POINTS,
                            dims: Tuple[int, int] = (25, 25)) -> FluxDispersion:
    """
    Fit the qubit frequency against a static loop-flux offset.

    Each point is a full exact-mode eigensolve with the loop flux allocated over
    the branches as in the irrotational gauge.
    """
    allocation = flux_allocation(params, loop)
    freqs = []
    for delta in flux_points:
        offsets = {name: TWO_PI * delta * coeff for name, coeff in allocation.items()}
        bundle = build_hamiltonian(params, basis, "exact", dims=dims, offsets=offsets)
        spec = eigensolve_and_label(bundle.H_full, basis)
        freqs.append(spec.transition(GROUND, QUBIT))
    f0, f1, f2 = fit_quadratic(np.asarray(flux_points), np.asarray(freqs))
    logger.info(f"{loop} loop dispersion: f1 = {f1:.4e} GHz/Φ0, f2 = {f2:.4e} GHz/Φ0²")
    return FluxDispersion(loop, f0, f1, f2)


def synthesize_flux_noise(psd: Callable[[np.ndarray], np.ndarray], n: int, dt: float,
                          rng: np.random.Generator) -> np.ndarray:
    """
    Gaussian-stationary series with two-sided density psd(f) by spectral synthesis.

    Random phases on fixed amplitudes; the DC bin is zeroed.
    """
    freqs = np.fft.rfftfreq(n, dt)
    density = np.zeros_like(freqs)
    density[1:] = psd(freqs[1:])
    # one-sided density 2S with |X_k|^2 = S1 N / (2 dt)
    amplitude = np.sqrt(density * n / dt)
    phases = rng.uniform(0.0, TWO_PI, size=freqs.size)
    spectrum = amplitude * np.exp(1j * phases)
    if n % 2 == 0:
        spectrum[-1] = amplitude[-1] * np.cos(phases[-1]) * math.sqrt(2.0)
    return np.fft.irfft(spectrum, n)


def echo_phases(shift_hz: np.ndarray, dt: float, tau_steps: np.ndarray) -> np.ndarray:
    """
    Accumulated echo phase per segment.

    Args:
        shift_hz: Frequency deviation, shape (segments, samples)
        dt: Sample spacing (s)
        tau_steps: Even echo lengths in samples

    Returns:
        Array of shape (segments, len(tau_steps))
    """
    cumulative = np.concatenate(
        [np.zeros((shift_hz.shape[0], 1)), np.cumsum(shift_hz, axis=1) * dt], axis=1)
    half = tau_steps // 2
    return TWO_PI * (2.0 * cumulative[:, half] - cumulative[:, tau_steps])


@dataclass
class EchoResult:
    """Echo coherence curve and fitted T2 (s) for one loop or the combination."""
    loop: str
    t2: float
    lower_bound: bool
    taus: np.ndarray = field(repr=False)
    coherence: np.ndarray = field(repr=False)
    t2_spread: float = 0.0

    @property
    def rate(self) -> float:
        return 0.0 if math.isinf(self.t2) else 1.0 / self.t2


def fit_echo(taus: np.ndarray, coherence: np.ndarray, loop: str = "") -> EchoResult:
    """
    Fit exp(-τ/T2); without measurable decay return the window-limited lower bound.
    """
    end = float(coherence[-1])
    if end >= 1.0 - 1e-12:
        return EchoResult(loop, math.inf, True, taus, coherence)
    guess = taus[-1] / max(-math.log(max(end, 1e-12)), 1e-12)
    try:
        (t2,), _ = curve_fit(lambda t, t2: np.exp(-t / t2), taus, coherence, p0=[guess],
                             bounds=(0.0, np.inf))
    except (RuntimeError, ValueError) as e:
        logger.warning(f"Echo fit failed for {loop or 'echo'} ({e}); reporting lower bound")
        return EchoResult(loop, guess, True, taus, coherence)
    return EchoResult(loop, float(t2), False, taus, coherence)


def echo_coherence(dispersion: FluxDispersion, psd: Callable[[np.ndarray], np.ndarray],
                   echo: EchoSettings, seed: int, stream: int = 0) -> EchoResult:
    """Average cos(phase) over all echo segments of all series, then fit."""
    n_seg = echo.n_segments
    n_samples = n_seg * echo.samples_per_segment
    steps = np.unique(np.linspace(2, echo.samples_per_segment, echo.n_taus).astype(int) // 2 * 2)
    total = np.zeros(steps.size)
    count = 0
    for i in range(echo.n_series):
        rng = np.random.default_rng([seed, stream, i])
        flux = synthesize_flux_noise(psd, n_samples, echo.dt, rng)
        segments = flux.reshape(n_seg, echo.samples_per_segment)
        phases = echo_phases(dispersion.shift_hz(segments), echo.dt, steps)
        total += np.cos(phases).sum(axis=0)
        count += n_seg
    return fit_echo(steps * echo.dt, total / count, dispersion.loop)


def flux_t2_echo(spec: LabeledSpectrum, params: CircuitParams, env: EnvironmentParams,
                 echo: Optional[EchoSettings] = None,
                 dispersions: Optional[Dict[str, FluxDispersion]] = None) -> Dict[str, EchoResult]:
    """
    Flux-noise echo dephasing per loop plus the combined estimate under key 'total'.

    Loops are independent so their rates add. With echo.seeds > 1 the mean T2 over
    seeds is reported together with its standard deviation.
    """
    echo = echo or EchoSettings()
    if dispersions is None:
        dispersions = {loop: qubit_frequency_vs_flux(params, spec.basis, loop, dims=spec.space.dims)
                       for loop in LOOPS}
    results: Dict[str, EchoResult] = {}
    for stream, loop in enumerate(LOOPS):
        if loop not in dispersions:
            continue
        psd = env.flux_psd(loop)
        runs = [echo_coherence(dispersions[loop], psd, echo, echo.seed + k, stream)
                for k in range(echo.seeds)]
        t2s = np.array([r.t2 for r in runs])
        best = runs[0]
        if echo.seeds > 1 and np.all(np.isfinite(t2s)):
            best = EchoResult(loop, float(t2s.mean()), any(r.lower_bound for r in runs),
                              best.taus, best.coherence, float(t2s.std(ddof=1)))
        results[loop] = best
        logger.info(f"Flux echo {loop} loop: T2 = {best.t2 * 1e3:.3f} ms"
                    + (" (lower bound)" if best.lower_bound else ""))
    rate = sum(r.rate for r in results.values())
    any_bound = any(r.lower_bound for r in results.values())
    first = next(iter(results.values()))
    results["total"] = EchoResult("total", math.inf if rate == 0 else 1.0 / rate, any_bound,
                                  first.taus, first.coherence)
    return results


def white_noise_dephasing(dispersion: FluxDispersion, s_white: float) -> float:
    """Γ = ½ (∂ω/∂Φ)² S for two-sided white flux noise S (Φ0²/Hz), in 1/s."""
    slope = TWO_PI * dispersion.f1 * GHZ
    return 0.5 * slope ** 2 * s_white


# ── Purcell ──────────────────────────────────────────────────────


def purcell_decay(spec: LabeledSpectrum, kappa_model: KappaModel) -> float:
    """κ(ω_q)|<0,0|n̂₀|0,1>|² in 1/s."""
    return to_angular_per_second(effective_rate(GROUND, QUBIT, spec, kappa_model))


# ── SNR ──────────────────────────────────────────────────────────


def snr_scaling(chi: float, kappa: float, n_bar: float, eta: float, t: float) -> float:
    """
    sqrt(η κ n̄ t)·|sin 2θ| with |sin 2θ| = χκ/(χ² + κ²/4).

    χ and κ in GHz, t in ns; the absolute prefactor is left out.
    """
    for name, value in (("kappa", kappa), ("n_bar", n_bar), ("eta", eta), ("t", t)):
        validate_non_negative(name, value)
    if chi == 0 and kappa == 0:
        return 0.0
    sin_2theta = abs(chi) * kappa / (chi ** 2 + kappa ** 2 / 4.0)
    return math.sqrt(eta * TWO_PI * kappa * n_bar * t) * sin_2theta


# ── Budget ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class ChannelRate:
    name: str
    kind: str
    rate: float

    @property
    def time(self) -> float:
        return math.inf if self.rate == 0 else 1.0 / self.rate


@dataclass
class DecoherenceBudget:
    """Per-channel rates (1/s) with T1 and T2 totals."""
    channels: List[ChannelRate]

    def channel(self, name: str) -> ChannelRate:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(name)

    @property
    def total_rate(self) -> float:
        return float(sum(ch.rate for ch in self.channels))

    @property
    def gamma_1(self) -> float:
        return float(sum(ch.rate for ch in self.channels if ch.kind == "T1"))

    @property
    def gamma_phi(self) -> float:
        return float(sum(ch.rate for ch in self.channels if ch.kind == "T2"))

    @property
    def t1(self) -> float:
        return math.inf if self.gamma_1 == 0 else 1.0 / self.gamma_1

    @property
    def t2(self) -> float:
        rate = 0.5 * self.gamma_1 + self.gamma_phi
        return math.inf if rate == 0 else 1.0 / rate

    def rows(self) -> List[dict]:
        rows = [{"channel": ch.name, "kind": ch.kind, "rate_per_s": ch.rate, "time_s": ch.time}
                for ch in self.channels]
        rows.append({"channel": "total_T1", "kind": "T1", "rate_per_s": self.gamma_1,
                     "time_s": self.t1})
        rows.append({"channel": "total_T2", "kind": "T2",
                     "rate_per_s": 0.5 * self.gamma_1 + self.gamma_phi, "time_s": self.t2})
        return rows

    def to_dict(self) -> dict:
        return {row["channel"]: {k: v for k, v in row.items() if k != "channel"}
                for row in self.rows()}


def decoherence_budget(spec: LabeledSpectrum, params: CircuitParams, metrics: SpectrumMetrics,
                       env: Optional[EnvironmentParams] = None,
                       kappa_model: Optional[KappaModel] = None,
                       echo: Optional[EchoSettings] = None,
                       include_echo: bool = True) -> DecoherenceBudget:
    """Evaluate every channel at one operating point."""
    env = env or EnvironmentParams()
    kappa_model = kappa_model or KappaModel.from_spectrum(spec, params.kappa_r, params.kappa_f)
    resistor = resistor_loss(spec, params, env.R)
    flux = flux_t1(spec, params, env)
    channels = [
        ChannelRate("thermal_photon", "T2", thermal_dephasing(metrics, params.kappa_r, env.T)),
        ChannelRate("resistor", "T1", resistor.rate),
        ChannelRate("quasiparticle", "T1", quasiparticle_decay(spec, params, env)),
        ChannelRate("dielectric", "T1", dielectric_loss(spec, params, env)),
        ChannelRate("flux_t1", "T1", sum(flux.values())),
        ChannelRate("purcell", "T1", purcell_decay(spec, kappa_model)),
    ]
    if include_echo:
        echo_result = flux_t2_echo(spec, params, env, echo)["total"]
        channels.append(ChannelRate("flux_echo", "T2", echo_result.rate))
    budget = DecoherenceBudget(channels)
    logger.info(f"Decoherence budget: T1 = {budget.t1 * 1e3:.3f} ms, T2 = {budget.t2 * 1e3:.3f} ms")
    return budget
