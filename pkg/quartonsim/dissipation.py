"""
Jump operators from eigenstate transitions.

Every downward transition |e_j> -> |e_i> radiates through the resonator coupling
capacitor with amplitude sqrt(κ(ω_ji) f(ω_ji)) <e_i|n̂₀|e_j>. Transitions with
overlapping linewidths share a bath; each bath becomes one Lindblad operator.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from quartonsim.log import get_logger, log_bath
from quartonsim.operators import FockSpace, annihilation_matrix
from quartonsim.spectrum import Label, LabeledSpectrum
from quartonsim.validation import DissipationError, validate_non_negative, validate_positive


logger = get_logger("dissipation")

DEFAULT_THRESHOLD_HZ = 1e4


def drive_operator(space: FockSpace) -> np.ndarray:
    """n̂₀ = i(a† - a) ⊗ 1 in the Fock basis."""
    a = annihilation_matrix(space.n_a)
    return np.kron(1j * (a.T - a), np.eye(space.n_b))


@dataclass(frozen=True)
class KappaModel:
    """
    Frequency-dependent resonator coupling κ(ω) = κ_r (ω/ω_r)^2, optionally
    weighted by a Lorentzian filter [1 + (2(ω - ω_c)/κ_f)^2]^-1.

    All values are linewidths in GHz.
    """
    kappa_r: float
    omega_r: float
    exponent: float = 2.0
    filter: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        validate_non_negative("kappa_r", self.kappa_r)
        validate_positive("omega_r", self.omega_r)
        if self.filter is not None:
            validate_positive("filter center", self.filter[0])
            validate_positive("kappa_f", self.filter[1])

    @classmethod
    def from_spectrum(cls, spec: LabeledSpectrum, kappa_r: float,
                      kappa_f: Optional[float] = None) -> 'KappaModel':
        """Anchor ω_r (and the filter center) at the midpoint of the two pulled resonator lines."""
        w0 = spec.transition((0, 0), (1, 0))
        w1 = spec.transition((0, 1), (1, 1))
        omega = 0.5 * (w0 + w1)
        return cls(kappa_r, omega, filter=(omega, kappa_f) if kappa_f else None)

    def coupling(self, omega: float) -> float:
        return self.kappa_r * (omega / self.omega_r) ** self.exponent

    def filter_weight(self, omega: float) -> float:
        if self.filter is None:
            return 1.0
        center, width = self.filter
        return 1.0 / (1.0 + (2.0 * (omega - center) / width) ** 2)

    def __call__(self, omega: float) -> float:
        return self.coupling(omega) * self.filter_weight(omega)

    def without_filter(self) -> 'KappaModel':
        return KappaModel(self.kappa_r, self.omega_r, self.exponent, None)


@dataclass(frozen=True)
class Transition:
    """Downward transition upper -> lower between eigenstates (eigen indices)."""
    lower: int
    upper: int
    frequency: float
    element: complex
    rate: float
    lower_label: Optional[Label] = None
    upper_label: Optional[Label] = None

    @property
    def amplitude(self) -> complex:
        """sqrt(rate) carrying the phase of the matrix element."""
        if self.element == 0:
            return 0j
        return math.sqrt(self.rate) * self.element / abs(self.element)

    @property
    def is_resonator_photon(self) -> bool:
        if self.lower_label is None or self.upper_label is None:
            return False
        return (self.upper_label[0] - self.lower_label[0] == 1
                and self.upper_label[1] == self.lower_label[1])

    def describe(self) -> str:
        def fmt(label, idx):
            return f"|{label[0]},{label[1]}>" if label else f"e{idx}"
        return f"{fmt(self.upper_label, self.upper)}->{fmt(self.lower_label, self.lower)}"


def labeled_indices(spec: LabeledSpectrum) -> List[int]:
    return sorted(spec.label_map.values())


def enumerate_transitions(spec: LabeledSpectrum, kappa_model: KappaModel,
                          indices: Optional[Sequence[int]] = None) -> List[Transition]:
    """All downward transitions among `indices` (default: labeled eigenstates)."""
    indices = list(indices) if indices is not None else labeled_indices(spec)
    n0 = spec.in_eigenbasis(drive_operator(spec.space), indices)
    labels = {idx: lab for lab, idx in spec.label_map.items()}
    out = []
    for u, upper in enumerate(indices):
        for l, lower in enumerate(indices):
            omega = spec.energies[upper] - spec.energies[lower]
            if omega <= 1e-12:
                continue
            element = complex(n0[l, u])
            rate = kappa_model(omega) * abs(element) ** 2
            out.append(Transition(lower, upper, float(omega), element, rate,
                                  labels.get(lower), labels.get(upper)))
    return out


def effective_rate(i: Label, j: Label, spec: LabeledSpectrum, kappa_model: KappaModel) -> float:
    """
    κ(ω_ji) f(ω_ji) |<e_i|n̂₀|e_j>|^2 for the decay |e_j> -> |e_i>.

    Raises:
        DissipationError: If |e_j> does not lie above |e_i>
    """
    omega = spec.transition(i, j)
    if omega <= 0:
        raise DissipationError(
            f"Transition |{j[0]},{j[1]}> -> |{i[0]},{i[1]}> is not downward (ω = {omega:.4f} GHz)"
        )
    element = spec.matrix_element(drive_operator(spec.space), i, j)
    return kappa_model(omega) * abs(element) ** 2


@dataclass
class Bath:
    """Transitions sharing one environment; d = Σ amplitude |e_i><e_j| with κ_k = 1."""
    members: List[Transition]
    operator: np.ndarray

    @property
    def total_rate(self) -> float:
        return float(sum(t.rate for t in self.members))

    @property
    def frequency(self) -> float:
        total = self.total_rate
        if total == 0:
            return float(np.mean([t.frequency for t in self.members]))
        return float(sum(t.frequency * t.rate for t in self.members) / total)

    @property
    def resonator_rate(self) -> float:
        return float(sum(t.rate for t in self.members if t.is_resonator_photon))

    @property
    def kappa(self) -> float:
        return 1.0


@dataclass
class DissipatorSet:
    """Clustered baths on the eigen-index subspace `indices`."""
    baths: List[Bath]
    indices: List[int]
    k_star: Optional[int]
    discard_threshold: float = 0.0
    dropped: List[Transition] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.baths

    @property
    def operators(self) -> List[np.ndarray]:
        return [bath.operator for bath in self.baths]

    @property
    def monitored(self) -> Optional[Bath]:
        return None if self.k_star is None else self.baths[self.k_star]

    @property
    def total_rate(self) -> float:
        return float(sum(b.total_rate for b in self.baths))


def _bath_operator(members: Sequence[Transition], position: Dict[int, int]) -> np.ndarray:
    op = np.zeros((len(position), len(position)), dtype=complex)
    for t in members:
        op[position[t.lower], position[t.upper]] += t.amplitude
    return op


def _select_monitored(baths: Sequence[Bath]) -> Optional[int]:
    if not baths:
        return None
    resonator = [b.resonator_rate for b in baths]
    if max(resonator) > 0:
        return int(np.argmax(resonator))
    return int(np.argmax([b.total_rate for b in baths]))


def cluster_baths(transitions: Sequence[Transition], c: float = 1.0, kappa: float = 0.3,
                  indices: Optional[Sequence[int]] = None) -> DissipatorSet:
    """
    Group transitions whose frequencies chain within c·κ of each other.

    Sorting by frequency and merging adjacent gaps ≤ c·κ is the one-dimensional
    form of density clustering with a single neighbourhood radius.

    Args:
        transitions: Transitions with frequencies (GHz) and rates
        c: Neighbourhood radius in units of κ
        kappa: Linewidth κ (GHz)
        indices: Eigen indices spanning the operators (default: transition endpoints)

    Raises:
        DissipationError: If there are no transitions
    """
    if not transitions:
        raise DissipationError("Cannot cluster an empty transition list")
    validate_positive("c", c)
    validate_positive("kappa", kappa)
    if indices is None:
        indices = sorted({t.lower for t in transitions} | {t.upper for t in transitions})
    position = {idx: pos for pos, idx in enumerate(indices)}
    radius = c * kappa

    ordered = sorted(transitions, key=lambda t: t.frequency)
    groups: List[List[Transition]] = [[ordered[0]]]
    for t in ordered[1:]:
        if t.frequency - groups[-1][-1].frequency <= radius:
            groups[-1].append(t)
        else:
            groups.append([t])

    baths = [Bath(group, _bath_operator(group, position)) for group in groups]
    for k, bath in enumerate(baths):
        log_bath(k, bath.frequency, bath.total_rate, len(bath.members))
    return DissipatorSet(baths, list(indices), _select_monitored(baths))


def prune(dissipators: DissipatorSet, threshold_hz: float = DEFAULT_THRESHOLD_HZ) -> DissipatorSet:
    """
    Drop member transitions with rate below threshold_hz; baths left empty disappear.

    Bath membership of surviving transitions is kept as clustered.
    """
    validate_non_negative("threshold", threshold_hz)
    threshold = threshold_hz / 1e9
    position = {idx: pos for pos, idx in enumerate(dissipators.indices)}
    baths, dropped = [], list(dissipators.dropped)
    for bath in dissipators.baths:
        kept = [t for t in bath.members if t.rate >= threshold]
        dropped.extend(t for t in bath.members if t.rate < threshold)
        if kept:
            baths.append(Bath(kept, _bath_operator(kept, position)))
    if not baths:
        logger.warning(f"All transitions fall below {threshold_hz:.3g} Hz; dissipator set is empty")
    return DissipatorSet(baths, dissipators.indices, _select_monitored(baths),
                         threshold_hz, dropped)


def build_dissipators(spec: LabeledSpectrum, kappa_model: KappaModel,
                      indices: Optional[Sequence[int]] = None, c: float = 1.0,
                      threshold_hz: float = DEFAULT_THRESHOLD_HZ) -> DissipatorSet:
    """Enumerate, cluster and prune in one call."""
    indices = list(indices) if indices is not None else labeled_indices(spec)
    if kappa_model.kappa_r == 0:
        return DissipatorSet([], indices, None, threshold_hz)
    transitions = enumerate_transitions(spec, kappa_model, indices)
    clustered = cluster_baths(transitions, c, kappa_model.kappa_r, indices)
    return prune(clustered, threshold_hz)


def bath_table(dissipators: DissipatorSet) -> List[dict]:
    """Rows of (bath, frequency, total rate, members, monitored) for export."""
    rows = []
    for k, bath in enumerate(dissipators.baths):
        rows.append({
            "bath": k,
            "frequency_ghz": bath.frequency,
            "total_rate_ghz": bath.total_rate,
            "members": " ".join(t.describe() for t in bath.members),
            "monitored": int(k == dissipators.k_star),
        })
    return rows
