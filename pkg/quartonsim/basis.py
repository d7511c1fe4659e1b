"""
Basis and tilt optimization.

Chooses the phase zero-point amplitude of each mode so that Fock states approximate
bare-mode eigenstates, then tilts the quarton (t = 2α) to null the linear coupling
<0_a 1_b|H|1_a 0_b>.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from quartonsim.circuit import (
    CircuitParams,
    coupling_element,
    harmonic_guess,
    mode_polynomial,
)
from quartonsim.log import get_logger, log_basis_step, log_tilt_trial
from quartonsim.operators import LadderPolynomial
from quartonsim.validation import BasisError, validate_fock_dim, validate_mode, validate_positive


logger = get_logger("basis")

HEURISTICS = ("min_adag_a", "min_adag_adag", "max_overlap")

# Bracket scan around the harmonic guess
SCAN_LOW = 0.3
SCAN_HIGH = 3.0
SCAN_POINTS = 25
SEARCH_TOL = 1e-4

DEFAULT_TILT_RANGE = (0.8, 1.3)
TILT_SCAN_POINTS = 11


@dataclass(frozen=True)
class BasisChoice:
    """Phase zero-point amplitudes per mode and the resulting per-mode overlap scores."""
    zpf_a: float
    zpf_b: float
    overlap_scores: Tuple[float, float] = (1.0, 1.0)
    heuristic: str = "min_adag_a"

    def __post_init__(self):
        validate_positive("zpf_a", self.zpf_a)
        validate_positive("zpf_b", self.zpf_b)
        for score in self.overlap_scores:
            if not 0.0 <= score <= 1.0 + 1e-12:
                raise ValueError(f"Overlap score must lie in [0, 1], got {score}")

    @property
    def n_zpf_a(self) -> float:
        return 1.0 / (2.0 * self.zpf_a)

    @property
    def n_zpf_b(self) -> float:
        return 1.0 / (2.0 * self.zpf_b)

    def zpf(self, mode: str) -> float:
        return (self.zpf_a, self.zpf_b)[validate_mode(mode)]

    def scaled(self, factor_a: float, factor_b: float = 1.0) -> 'BasisChoice':
        return BasisChoice(self.zpf_a * factor_a, self.zpf_b * factor_b,
                           self.overlap_scores, self.heuristic)

    def to_dict(self) -> dict:
        return {
            "zpf_a": self.zpf_a,
            "zpf_b": self.zpf_b,
            "overlap_a": self.overlap_scores[0],
            "overlap_b": self.overlap_scores[1],
            "heuristic": self.heuristic,
        }


@dataclass(frozen=True)
class ZpfResult:
    zpf: float
    score: float


@dataclass(frozen=True)
class TiltResult:
    """Outcome of the tilt search."""
    tilt: float
    residual: float
    residual_untilted: float
    basis: BasisChoice
    params: CircuitParams
    at_boundary: bool = False
    trials: List[Tuple[float, float]] = field(default_factory=list)


# ── Objectives ───────────────────────────────────────────────────


def overlap_score(hamiltonian: LadderPolynomial, mode: str, dim: int, n_levels: int) -> float:
    """
    Mean |<k|e_k>|^2 over the lowest n_levels eigenstates of a single-mode Hamiltonian.

    Args:
        hamiltonian: Polynomial acting on `mode` only
        mode: 'a' or 'b'
        dim: Fock truncation used for the eigensolve
        n_levels: Number of levels k = 0..n_levels-1 to include
    """
    matrix = hamiltonian.single_mode_matrix(mode, dim)
    _, vectors = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    diag = np.abs(np.diagonal(vectors[:n_levels, :n_levels])) ** 2
    return float(np.mean(diag))


def _number_powers(mode: str, p: int, q: int) -> Tuple[int, int, int, int]:
    return (p, q, 0, 0) if mode == "a" else (0, 0, p, q)


def heuristic_objective(heuristic: str, mode: str, dim: int,
                        n_levels: int) -> Callable[[LadderPolynomial], float]:
    """Map a bare-mode Hamiltonian to the scalar minimized by `heuristic`."""
    if heuristic == "min_adag_a":
        key = _number_powers(mode, 1, 1)
        return lambda h: float(h.coefficient(key).real)
    if heuristic == "min_adag_adag":
        key = _number_powers(mode, 2, 0)
        return lambda h: float(abs(h.coefficient(key)))
    if heuristic == "max_overlap":
        return lambda h: -overlap_score(h, mode, dim, n_levels)
    raise ValueError(f"Unknown heuristic {heuristic!r}; expected one of {HEURISTICS}")


# ── zpf optimization ─────────────────────────────────────────────


def minimize_mode_zpf(hamiltonian: Callable[[float], LadderPolynomial], mode: str, guess: float,
                      heuristic: str = "min_adag_a", n_levels: int = 10,
                      dim: int = 25) -> ZpfResult:
    """
    Optimize the zpf of one mode for a Hamiltonian family H(zpf).

    A geometric scan over [0.3, 3] x guess brackets the minimum, then a golden-section
    search refines it.

    Raises:
        BasisError: If the scan minimum sits on the interval edge
    """
    validate_mode(mode)
    validate_fock_dim(dim)
    validate_positive("guess", guess)
    if n_levels < 1 or n_levels > dim:
        raise ValueError(f"n_levels must be in [1, {dim}], got {n_levels}")
    objective = heuristic_objective(heuristic, mode, dim, n_levels)

    def f(zpf: float) -> float:
        return objective(hamiltonian(zpf))

    grid = np.geomspace(SCAN_LOW * guess, SCAN_HIGH * guess, SCAN_POINTS)
    values = np.array([f(z) for z in grid])
    best = int(np.argmin(values))
    if best == 0 or best == len(grid) - 1:
        raise BasisError(
            f"No zpf bracket for mode {mode} with {heuristic}: minimum at edge of "
            f"[{grid[0]:.4g}, {grid[-1]:.4g}]"
        )
    bracket = (grid[best - 1], grid[best], grid[best + 1])
    result = minimize_scalar(f, bracket=bracket, method="golden", tol=SEARCH_TOL)
    zpf = float(result.x)
    if not grid[0] < zpf < grid[-1]:
        raise BasisError(f"zpf search for mode {mode} left the interval: {zpf:.4g}")
    score = overlap_score(hamiltonian(zpf), mode, dim, n_levels)
    log_basis_step(mode, zpf, score)
    return ZpfResult(zpf, score)


def optimize_zpf(params: CircuitParams, mode: str, heuristic: str = "min_adag_a",
                 n_levels: int = 10, other_zpf: Optional[float] = None, order: int = 8,
                 dim: int = 25) -> ZpfResult:
    """
    Optimize the zpf of one circuit mode with the other mode's zpf held fixed.

    Args:
        params: Circuit parameters
        mode: 'a' (resonator) or 'b' (qubit)
        heuristic: min_adag_a, min_adag_adag or max_overlap
        n_levels: Levels entering the overlap score
        other_zpf: zpf of the other mode; harmonic guess when omitted
        order: Taylor order of the bare-mode polynomial
        dim: Fock truncation of the overlap eigensolve

    Raises:
        ValueError: If n_levels exceeds truncation minus polynomial degree
        BasisError: If no bracket is found
    """
    slot = validate_mode(mode)
    if n_levels > dim - order:
        raise ValueError(
            f"n_levels={n_levels} exceeds truncation {dim} minus polynomial degree {order}"
        )
    guesses = harmonic_guess(params)
    other = other_zpf if other_zpf is not None else guesses[1 - slot]

    if slot == 0:
        def family(z: float) -> LadderPolynomial:
            return mode_polynomial(params, "a", z, other, order)
    else:
        def family(z: float) -> LadderPolynomial:
            return mode_polynomial(params, "b", other, z, order)

    return minimize_mode_zpf(family, mode, guesses[slot], heuristic, n_levels, dim)


def optimize_basis(params: CircuitParams, heuristic: str = "min_adag_a", n_levels: int = 10,
                   order: int = 8, dim: int = 25, rounds: int = 2) -> BasisChoice:
    """Alternate single-mode zpf searches; each bare Hamiltonian depends on both zpfs."""
    zpf_a, zpf_b = harmonic_guess(params)
    score_a = score_b = 1.0
    for _ in range(rounds):
        res_a = optimize_zpf(params, "a", heuristic, n_levels, zpf_b, order, dim)
        zpf_a, score_a = res_a.zpf, res_a.score
        res_b = optimize_zpf(params, "b", heuristic, n_levels, zpf_a, order, dim)
        zpf_b, score_b = res_b.zpf, res_b.score
    return BasisChoice(zpf_a, zpf_b, (min(score_a, 1.0), min(score_b, 1.0)), heuristic)


# ── Tilt ─────────────────────────────────────────────────────────


def optimize_tilt(params: CircuitParams, basis: Optional[BasisChoice] = None,
                  tilt_range: Tuple[float, float] = DEFAULT_TILT_RANGE,
                  dims: Tuple[int, int] = (25, 25), heuristic: str = "min_adag_a",
                  n_levels: int = 10, order: int = 8, reoptimize: bool = True,
                  scan_points: int = TILT_SCAN_POINTS) -> TiltResult:
    """
    Find the tilt t = 2α minimizing |<0_a 1_b|H|1_a 0_b>|^2.

    With reoptimize (the default) the basis is re-optimized at every trial tilt;
    otherwise `basis` is held fixed. A minimum on the range edge is returned with
    at_boundary set and a warning logged.
    """
    lo, hi = tilt_range
    if not 0 < lo < hi:
        raise ValueError(f"Invalid tilt range {tilt_range}")
    if not reoptimize and basis is None:
        raise ValueError("A fixed basis is required when reoptimize is False")
    trials: List[Tuple[float, float]] = []
    bases = {}

    def evaluate(t: float) -> float:
        trial = params.with_tilt(t)
        trial_basis = optimize_basis(trial, heuristic, n_levels, order, dims[0]) \
            if reoptimize else basis
        bases[t] = trial_basis
        residual = abs(coupling_element(trial, trial_basis, dims)) ** 2
        trials.append((float(t), residual))
        log_tilt_trial(t, residual)
        return residual

    grid = np.linspace(lo, hi, scan_points)
    values = np.array([evaluate(t) for t in grid])
    best = int(np.argmin(values))
    at_boundary = best == 0 or best == len(grid) - 1
    if at_boundary:
        logger.warning(
            f"Tilt minimum at boundary t={grid[best]:.4f} of [{lo}, {hi}]; widen the tilt range"
        )
        tilt = float(grid[best])
        residual = float(values[best])
    else:
        bracket = (grid[best - 1], grid[best], grid[best + 1])
        result = minimize_scalar(evaluate, bracket=bracket, method="golden", tol=SEARCH_TOL)
        tilt = float(result.x)
        residual = evaluate(tilt)

    untilted = params.with_tilt(1.0)
    untilted_basis = optimize_basis(untilted, heuristic, n_levels, order, dims[0]) \
        if reoptimize else basis
    residual_untilted = abs(coupling_element(untilted, untilted_basis, dims)) ** 2
    logger.info(f"Optimal tilt {tilt:.5f}: |g|^2={residual:.3e} (untilted {residual_untilted:.3e})")
    return TiltResult(tilt, residual, residual_untilted, bases[tilt], params.with_tilt(tilt),
                      at_boundary, sorted(trials))
