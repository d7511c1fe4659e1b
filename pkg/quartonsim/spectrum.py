"""
Eigensolve, bare-state labeling and readout-design metrics.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from quartonsim.circuit import CircuitParams
from quartonsim.log import get_logger, log_eigensolve
from quartonsim.operators import FockOperator, FockSpace, LadderPolynomial
from quartonsim.util import harmonic_frequency, to_mhz
from quartonsim.validation import (
    LabelingError,
    Limits,
    MetricsError,
    check_hermitian,
    format_labels,
    validate_positive,
)


logger = get_logger("spectrum")

Label = Tuple[int, int]

DEFAULT_LABEL_RANGE = (14, 7)
BASE_REQUIRED: Tuple[Label, ...] = ((0, 0), (1, 0), (0, 1))


@dataclass
class LabeledSpectrum:
    """
    Eigenpairs of H with a bare-state label map.

    Energies are relative to the ground state (GHz) and sorted ascending; states
    holds eigenvectors as columns in the Fock basis of `space`.
    """
    energies: np.ndarray
    states: np.ndarray
    label_map: Dict[Label, int]
    overlap: Dict[Label, float]
    space: FockSpace
    ambiguous: List[Label] = field(default_factory=list)
    basis: Optional[object] = None

    def has(self, label: Label) -> bool:
        return tuple(label) in self.label_map

    def index(self, label: Label) -> int:
        try:
            return self.label_map[tuple(label)]
        except KeyError:
            raise MetricsError(f"Missing label {format_labels([label])}", [label])

    def energy(self, label: Label) -> float:
        return float(self.energies[self.index(label)])

    def state(self, label: Label) -> np.ndarray:
        return self.states[:, self.index(label)]

    def transition(self, lower: Label, upper: Label) -> float:
        """ω(upper) - ω(lower) in GHz."""
        return self.energy(upper) - self.energy(lower)

    def label_of(self, index: int) -> Optional[Label]:
        for label, idx in self.label_map.items():
            if idx == index:
                return label
        return None

    def matrix_element(self, operator: np.ndarray, bra: Label, ket: Label) -> complex:
        """<bra|O|ket> between labeled eigenstates."""
        return complex(np.vdot(self.state(bra), operator @ self.state(ket)))

    def in_eigenbasis(self, operator: np.ndarray, indices: Sequence[int]) -> np.ndarray:
        """Project a Fock-basis operator onto the given eigenstates."""
        vecs = self.states[:, list(indices)]
        return vecs.conj().T @ operator @ vecs

    def labels(self) -> List[Label]:
        return sorted(self.label_map)


@dataclass
class SpectrumMetrics:
    """Readout-design metrics in MHz."""
    spread_q0: float
    spread_q1: float
    cross_kerr_2chi: float
    self_kerr_Kb: float
    n_star: int
    omega_r: float
    omega_q: float
    ambiguity_flags: List[Label] = field(default_factory=list)

    @property
    def chi(self) -> float:
        """Half the cross-Kerr, in GHz."""
        return self.cross_kerr_2chi / 2000.0

    def to_dict(self) -> dict:
        return {
            "spread_q0_mhz": self.spread_q0,
            "spread_q1_mhz": self.spread_q1,
            "cross_kerr_2chi_mhz": self.cross_kerr_2chi,
            "self_kerr_Kb_mhz": self.self_kerr_Kb,
            "n_star": self.n_star,
            "omega_r_ghz": self.omega_r,
            "omega_q_ghz": self.omega_q,
            "ambiguous": [list(label) for label in self.ambiguity_flags],
        }


# ── Labeling ─────────────────────────────────────────────────────


def _bare_order(space: FockSpace, label_range: Tuple[int, int]) -> List[Label]:
    na_max = min(label_range[0], space.n_a)
    nb_max = min(label_range[1], space.n_b)
    labels = [(na, nb) for na in range(na_max) for nb in range(nb_max)]
    return sorted(labels, key=lambda lab: (lab[0] + lab[1], lab[0]))


def label_eigenstates(states: np.ndarray, space: FockSpace,
                      label_range: Tuple[int, int] = DEFAULT_LABEL_RANGE
                      ) -> Tuple[Dict[Label, int], Dict[Label, float], List[Label]]:
    """
    Greedy max-overlap assignment of bare labels to eigenstates.

    Bare states are visited in increasing (n_a + n_b). When two labels want the same
    eigenstate the larger overlap keeps it and the loser moves to its best unclaimed
    eigenstate; both are flagged.

    Returns:
        (label_map, overlap, collided labels)
    """
    weights = np.abs(states) ** 2
    claimed: Dict[int, Label] = {}
    label_map: Dict[Label, int] = {}
    collided: List[Label] = []

    def best_unclaimed(label: Label) -> int:
        row = weights[space.index(*label)].copy()
        if claimed:
            row[list(claimed)] = -1.0
        return int(np.argmax(row))

    for label in _bare_order(space, label_range):
        row = weights[space.index(*label)]
        choice = int(np.argmax(row))
        owner = claimed.get(choice)
        if owner is None:
            claimed[choice] = label
            label_map[label] = choice
            continue
        collided.extend(lab for lab in (owner, label) if lab not in collided)
        if row[choice] > weights[space.index(*owner), choice]:
            claimed[choice] = label
            label_map[label] = choice
            loser = owner
        else:
            loser = label
        new = best_unclaimed(loser)
        claimed[new] = loser
        label_map[loser] = new

    overlap = {lab: float(weights[space.index(*lab), idx]) for lab, idx in label_map.items()}
    return label_map, overlap, collided


def eigensolve_and_label(H_full: FockOperator, basis: Optional[object] = None,
                         label_range: Tuple[int, int] = DEFAULT_LABEL_RANGE,
                         required: Iterable[Label] = BASE_REQUIRED) -> LabeledSpectrum:
    """
    Diagonalize H and label eigenstates by their dominant bare Fock state.

    Args:
        H_full: Hermitian Hamiltonian
        basis: BasisChoice the Fock states refer to (kept for matrix elements)
        label_range: Bare labels n_a < range[0], n_b < range[1] are assigned
        required: Labels whose overlap must reach the failure threshold

    Returns:
        LabeledSpectrum with energies relative to the ground state

    Raises:
        HermiticityError: If H is not Hermitian
        LabelingError: If a required label is missing or below the failure overlap
    """
    check_hermitian(H_full.matrix, "Hamiltonian")
    space = H_full.space
    log_eigensolve(space.dim)
    values, vectors = np.linalg.eigh(0.5 * (H_full.matrix + H_full.matrix.conj().T))
    energies = values - values[0]

    label_map, overlap, collided = label_eigenstates(vectors, space, label_range)

    ambiguous = list(collided)
    for label in sorted(overlap):
        if overlap[label] < Limits.LABEL_WARN_OVERLAP and label not in ambiguous:
            ambiguous.append(label)
    if ambiguous:
        logger.debug(f"Ambiguous labels: {format_labels(ambiguous)}")

    spectrum = LabeledSpectrum(energies, vectors, label_map, overlap, space, ambiguous, basis)
    check_required_labels(spectrum, required)
    if spectrum.label_map.get((0, 0)) != 0:
        raise LabelingError("Ground state does not carry label |0,0>", [(0, 0)])
    return spectrum


def check_required_labels(spec: LabeledSpectrum, required: Iterable[Label]) -> None:
    """
    Raise LabelingError for required labels with overlap below the failure threshold.

    Labels between the failure and warning thresholds are logged.
    """
    failed, weak = [], []
    for label in required:
        label = tuple(label)
        score = spec.overlap.get(label)
        if score is None or score < Limits.LABEL_FAIL_OVERLAP:
            failed.append(label)
        elif score < Limits.LABEL_WARN_OVERLAP:
            weak.append(label)
    if weak:
        logger.warning(f"Weakly labeled states (overlap < {Limits.LABEL_WARN_OVERLAP}): "
                       f"{format_labels(weak)}")
    if failed:
        raise LabelingError(
            f"Labeling failed for {format_labels(failed)} (overlap < {Limits.LABEL_FAIL_OVERLAP}); "
            f"likely an avoided crossing",
            failed,
        )


# ── Metrics ──────────────────────────────────────────────────────


def metric_labels(n_star: int) -> List[Label]:
    labels = [(i, q) for q in (0, 1) for i in range(n_star + 1)]
    return labels + [(0, 2)]


def compute_metrics(spec: LabeledSpectrum, n_star: int = 7) -> SpectrumMetrics:
    """
    Frequency spreads, cross-Kerr and qubit self-Kerr.

    Spread S_q = max - min of ω(i,q) - ω(i-1,q) over i = 1..n_star.
    2χ = ω11 - ω01 - ω10 and K_b = ω02 - 2 ω01.

    Raises:
        MetricsError: Listing labels absent from the spectrum
        LabelingError: If a needed label has overlap below the failure threshold
    """
    if n_star < 2:
        raise ValueError(f"n_star must be >= 2, got {n_star}")
    needed = metric_labels(n_star)
    missing = [lab for lab in needed if not spec.has(lab)]
    if missing:
        raise MetricsError(f"Missing labels for metrics: {format_labels(missing)}", missing)
    check_required_labels(spec, needed)

    spreads = []
    for q in (0, 1):
        steps = [spec.transition((i - 1, q), (i, q)) for i in range(1, n_star + 1)]
        spreads.append(to_mhz(max(steps) - min(steps)))
    w10 = spec.transition((0, 0), (1, 0))
    w01 = spec.transition((0, 0), (0, 1))
    w11 = spec.transition((0, 0), (1, 1))
    w02 = spec.transition((0, 0), (0, 2))
    flags = [lab for lab in spec.ambiguous if lab in needed]
    return SpectrumMetrics(
        spread_q0=spreads[0],
        spread_q1=spreads[1],
        cross_kerr_2chi=to_mhz(w11 - w01 - w10),
        self_kerr_Kb=to_mhz(w02 - 2.0 * w01),
        n_star=n_star,
        omega_r=w10,
        omega_q=w01,
        ambiguity_flags=flags,
    )


# ── Analytic estimates ───────────────────────────────────────────


@dataclass(frozen=True)
class KerrEstimates:
    """Scaling estimates of Kerr coefficients (GHz)."""
    chi_ab: float
    internal_self_kerr_a: float
    internal_self_kerr_b: float
    quarton_self_kerr_a: float
    quarton_self_kerr_b: float
    squeezing_a: float
    squeezing_b: float

    def to_dict(self) -> dict:
        return {
            "chi_ab": self.chi_ab,
            "internal_self_kerr_a": self.internal_self_kerr_a,
            "internal_self_kerr_b": self.internal_self_kerr_b,
            "quarton_self_kerr_a": self.quarton_self_kerr_a,
            "quarton_self_kerr_b": self.quarton_self_kerr_b,
            "squeezing_a": self.squeezing_a,
            "squeezing_b": self.squeezing_b,
        }


def analytic_kerr_estimates(params: CircuitParams) -> KerrEstimates:
    """Closed-form Kerr scalings from the effective junction energies."""
    e_ja, e_jb = params.E_Ja_eff, params.E_Jb_eff
    chi = 2.0 * params.E_Q * math.sqrt(params.E_Ca * params.E_Cb / (e_ja * e_jb))
    ratio = params.E_Q / params.E_J if params.E_J > 0 else 0.0
    omega_a = harmonic_frequency(params.E_Ca, e_ja)
    omega_b = harmonic_frequency(params.E_Cb, e_jb)
    return KerrEstimates(
        chi_ab=chi,
        internal_self_kerr_a=-params.E_Ca / params.n_Ja ** 2,
        internal_self_kerr_b=-params.E_Cb / params.n_Jb ** 2,
        quarton_self_kerr_a=ratio * params.E_Ca,
        quarton_self_kerr_b=ratio * params.E_Cb,
        squeezing_a=-chi ** 2 / (2.0 * omega_a),
        squeezing_b=-chi ** 2 / (2.0 * omega_b),
    )


@dataclass(frozen=True)
class SqueezingCheck:
    cross_kerr: float
    cross_kerr_analytic: float
    self_kerr_a: float
    self_kerr_a_analytic: float

    @property
    def cross_kerr_error(self) -> float:
        if self.cross_kerr_analytic == 0:
            return abs(self.cross_kerr)
        return abs(self.cross_kerr / self.cross_kerr_analytic - 1.0)


def squeezing_toy_check(omega_a: float, omega_b: float, zeta: float,
                        dims: Tuple[int, int] = (10, 10)) -> SqueezingCheck:
    """
    Exact diagonalization of ω_a a†a + ω_b b†b + ζ (b†² + b²) a†a.

    Returns the cross-Kerr ω11 - ω10 - ω01 and mode-a self-Kerr (ω20 - 2ω10)/2 next to
    their second-order values -2ζ²/ω_b and -ζ²/ω_b.

    Raises:
        ValueError: If ζ/ω_b exceeds the perturbative bound
    """
    validate_positive("omega_a", omega_a)
    validate_positive("omega_b", omega_b)
    if abs(zeta) / omega_b >= Limits.MAX_SQUEEZING_RATIO:
        raise ValueError(
            f"zeta/omega_b = {abs(zeta) / omega_b:.3f} exceeds {Limits.MAX_SQUEEZING_RATIO}"
        )
    a = LadderPolynomial.ladder("a")
    ad = LadderPolynomial.ladder("a", dagger=True)
    b = LadderPolynomial.ladder("b")
    bd = LadderPolynomial.ladder("b", dagger=True)
    number_a = ad * a
    poly = number_a.scaled(omega_a) + (bd * b).scaled(omega_b) \
        + ((bd * bd + b * b) * number_a).scaled(zeta)
    space = FockSpace(tuple(dims))
    spec = eigensolve_and_label(poly.to_matrix(space), label_range=dims)
    w10 = spec.transition((0, 0), (1, 0))
    w01 = spec.transition((0, 0), (0, 1))
    cross = spec.transition((0, 0), (1, 1)) - w10 - w01
    self_a = (spec.transition((0, 0), (2, 0)) - 2.0 * w10) / 2.0
    return SqueezingCheck(cross, -2.0 * zeta ** 2 / omega_b, self_a, -zeta ** 2 / omega_b)
