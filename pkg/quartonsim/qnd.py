"""
Analytic QND estimate.

The readout leaves the resonator in a steady coherent state on the ladder of the
prepared qubit state k. First-order leakage out of that state through the decay
matrix D gives Γ_k, and Q̄_k = exp(-Δt Γ_k).
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from quartonsim.dissipation import KappaModel, Transition, enumerate_transitions, labeled_indices
from quartonsim.log import get_logger
from quartonsim.spectrum import LabeledSpectrum
from quartonsim.util import TWO_PI, coherent_amplitudes, poisson_cutoff
from quartonsim.validation import Limits, MetricsError, format_labels, validate_non_negative


logger = get_logger("qnd")

DEFAULT_DELTA_T = 10.0


@dataclass
class DecayMatrix:
    """D = Σ sqrt(κ_eff,ij) |e_i><e_j| over labeled eigenstates, downward entries only."""
    transitions: List[Transition]
    indices: List[int]
    operator: np.ndarray

    @property
    def entries(self) -> Dict[tuple, Transition]:
        return {(t.lower, t.upper): t for t in self.transitions}


@dataclass(frozen=True)
class QndEstimate:
    """Leakage rate gamma (1/ns) and Q̄ = exp(-Δt Γ) for prepared qubit state k."""
    k: int
    gamma: float
    qbar: float
    delta_t: float
    alpha: float
    n_cutoff: int

    def to_dict(self) -> dict:
        return {
            "qubit_state": self.k,
            "gamma_per_ns": self.gamma,
            "qbar": self.qbar,
            "delta_t_ns": self.delta_t,
            "alpha": self.alpha,
            "n_cutoff": self.n_cutoff,
        }


def build_decay_matrix(spec: LabeledSpectrum, kappa_model: KappaModel,
                       indices: Optional[Sequence[int]] = None) -> DecayMatrix:
    """
    Decay-induced transition matrix weighted by the normalized charge n̂₀ = i(a† - a).

    The filter weight of `kappa_model` applies when it carries one.
    """
    indices = list(indices) if indices is not None else labeled_indices(spec)
    transitions = [t for t in enumerate_transitions(spec, kappa_model, indices) if t.rate > 0]
    position = {idx: pos for pos, idx in enumerate(indices)}
    op = np.zeros((len(indices), len(indices)), dtype=complex)
    for t in transitions:
        op[position[t.lower], position[t.upper]] = t.amplitude
    return DecayMatrix(transitions, indices, op)


def dominant_entries(decay: DecayMatrix, n: int = 5) -> List[Transition]:
    """The n largest-rate transitions."""
    return sorted(decay.transitions, key=lambda t: t.rate, reverse=True)[:n]


def coherent_readout_state(decay: DecayMatrix, spec: LabeledSpectrum, k: int,
                           n_bar: float) -> tuple:
    """
    Poisson-weighted superposition of labeled |n, k> in the decay-matrix index space.

    Returns:
        (state vector, cutoff photon number)

    Raises:
        MetricsError: If the labeled ladder is shorter than the Poisson cutoff
    """
    n_max = poisson_cutoff(n_bar, Limits.COHERENT_TAIL)
    ladder = [(n, k) for n in range(n_max + 1)]
    missing = [lab for lab in ladder if not spec.has(lab)]
    position = {idx: pos for pos, idx in enumerate(decay.indices)}
    missing += [lab for lab in ladder if spec.has(lab) and spec.index(lab) not in position]
    if missing:
        raise MetricsError(
            f"Labeled ladder too short for n_bar={n_bar}: missing {format_labels(missing)}",
            missing,
        )
    amps = coherent_amplitudes(n_bar, n_max)
    state = np.zeros(len(decay.indices), dtype=complex)
    for n, amp in enumerate(amps):
        state[position[spec.index((n, k))]] = amp
    return state, n_max


def qbar(decay: DecayMatrix, spec: LabeledSpectrum, k: int, n_bar: float,
         delta_t: float = DEFAULT_DELTA_T) -> QndEstimate:
    """
    First-order QND estimate for qubit state k.

    Γ_k = Σ_{n, q≠k} |<n,q|D|α,k>|^2, converted from linewidth (GHz) to 1/ns.

    Args:
        decay: Decay matrix over labeled eigenstates
        spec: Labeled spectrum the decay matrix was built from
        k: Prepared qubit state
        n_bar: Mean photon number |α|^2
        delta_t: Readout duration (ns)
    """
    validate_non_negative("n_bar", n_bar)
    validate_non_negative("delta_t", delta_t)
    state, n_max = coherent_readout_state(decay, spec, k, n_bar)
    final = decay.operator @ state
    labels = {idx: lab for lab, idx in spec.label_map.items()}
    leak = 0.0
    for pos, idx in enumerate(decay.indices):
        label = labels.get(idx)
        if label is not None and label[1] != k:
            leak += abs(final[pos]) ** 2
    gamma = TWO_PI * leak
    estimate = QndEstimate(k, gamma, math.exp(-delta_t * gamma), delta_t, math.sqrt(n_bar), n_max)
    logger.debug(f"Q̄_{k} = {estimate.qbar:.6f} (Γ = {gamma:.3e} /ns)")
    return estimate


def qnd_estimates(spec: LabeledSpectrum, kappa_model: KappaModel, n_bar: float = 2.0,
                  delta_t: float = DEFAULT_DELTA_T, states: Sequence[int] = (0, 1)
                  ) -> List[QndEstimate]:
    """Q̄ for each prepared qubit state."""
    decay = build_decay_matrix(spec, kappa_model)
    return [qbar(decay, spec, k, n_bar, delta_t) for k in states]
