"""
Built-in invariant suite run by `quartonsim validate`.

Each check is small and fast; a failing check reports its measured value.
"""

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from quartonsim.basis import minimize_mode_zpf
from quartonsim.circuit import capacitance_transform, harmonic_polynomial
from quartonsim.dynamics import DrivePulse, TruncatedEigenbasis, run_lindblad
from quartonsim.log import get_logger
from quartonsim.operators import FockSpace, LadderPolynomial, build_annihilation, normal_order
from quartonsim.spectrum import squeezing_toy_check
from quartonsim.util import harmonic_zpf


logger = get_logger("selfcheck")

# Reference charging-energy matrix (MHz) for C = {3, 7.5, 80, 70} fF
CAPACITANCE_REFERENCE = {(0, 0): 223.6, (1, 1): 265.7, (2, 2): 1291.3, (3, 3): 3228.4}
CAPACITANCE_COUPLING = 9.2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail}


def check_normal_ordering(dim: int = 12) -> CheckResult:
    """Normal-ordered product against the product of truncated matrices on low levels."""
    a = LadderPolynomial.ladder("a")
    ad = LadderPolynomial.ladder("a", dagger=True)
    b = LadderPolynomial.ladder("b")
    bd = LadderPolynomial.ladder("b", dagger=True)
    left = (a + ad) * (a + ad) * (a + ad)
    right = bd * b + b * a + ad * ad
    space = FockSpace((dim, dim))
    symbolic = normal_order(left, right).to_matrix(space).matrix
    numeric = left.to_matrix(space).matrix @ right.to_matrix(space).matrix
    keep = [space.index(na, nb) for na in range(dim - 5) for nb in range(dim - 5)]
    error = float(np.max(np.abs(symbolic[np.ix_(keep, keep)] - numeric[np.ix_(keep, keep)])))
    return CheckResult("normal_ordering", error < 1e-9, error, 1e-9)


def check_commutator(dim: int = 10) -> CheckResult:
    """[a, a†] = 1 below the truncation edge."""
    space = FockSpace((dim, 3))
    a = build_annihilation(space, "a").matrix
    comm = a @ a.conj().T - a.conj().T @ a
    interior = [space.index(n, m) for n in range(dim - 1) for m in range(3)]
    block = comm[np.ix_(interior, interior)]
    error = float(np.max(np.abs(block - np.eye(len(interior)))))
    return CheckResult("commutator", error < 1e-12, error, 1e-12)


def check_harmonic_zpf(e_c: float = 0.119, e_j: float = 269.0) -> CheckResult:
    """zpf optimum of a harmonic mode equals (2E_C/E_J)^(1/4)."""
    exact = harmonic_zpf(e_c, e_j)
    result = minimize_mode_zpf(lambda z: harmonic_polynomial(e_c, e_j, z, "a"), "a",
                               1.3 * exact, "min_adag_a", n_levels=5, dim=15)
    error = abs(result.zpf / exact - 1.0)
    return CheckResult("harmonic_zpf", error < 1e-3, error, 1e-3)


def check_squeezing() -> CheckResult:
    """Photon-enhanced squeezing toy model against its second-order cross-Kerr."""
    check = squeezing_toy_check(16.0, 7.5, 0.2)
    return CheckResult("squeezing_cross_kerr", check.cross_kerr_error < 0.1,
                       check.cross_kerr_error, 0.1,
                       f"exact {check.cross_kerr:.3e} GHz, "
                       f"analytic {check.cross_kerr_analytic:.3e} GHz")


def toy_model(dissipation: bool = True) -> TruncatedEigenbasis:
    """Three-level readout toy: |0,0>, |0,1>, |1,0> with a decaying resonator photon."""
    labels = [(0, 0), (0, 1), (1, 0)]
    energies = [0.0, 7.5, 16.0]
    n0 = np.zeros((3, 3), dtype=complex)
    n0[0, 2], n0[2, 0] = -1j, 1j
    n0[0, 1], n0[1, 0] = -0.01j, 0.01j
    jumps = []
    if dissipation:
        d = np.zeros((3, 3), dtype=complex)
        d[0, 2] = np.sqrt(0.3)
        jumps.append(d)
    return TruncatedEigenbasis.from_arrays(labels, energies, n0, jumps, 0 if jumps else None)


def check_trace_preservation() -> CheckResult:
    drive = DrivePulse(0.05, 16.0, 2.0)
    result = run_lindblad(toy_model(True), drive, 0, 3.0, n_times=31)
    return CheckResult("trace_preservation", result.trace_error < 1e-8, result.trace_error, 1e-8)


def check_unitary_purity() -> CheckResult:
    drive = DrivePulse(0.05, 16.0, 2.0)
    result = run_lindblad(toy_model(False), drive, 0, 2.0, n_times=21, rtol=1e-11, atol=1e-13)
    defect = float(np.max(np.abs(result.purity - 1.0)))
    return CheckResult("unitary_purity", defect < 1e-8, defect, 1e-8)


def check_capacitance_matrix() -> CheckResult:
    result = capacitance_transform(3.0, 7.5, 80.0, 70.0)
    errors = [abs(result.E_C_matrix[i, j] / ref - 1.0) for (i, j), ref in
              CAPACITANCE_REFERENCE.items()]
    errors.append(abs(abs(result.E_C12) / CAPACITANCE_COUPLING - 1.0))
    worst = float(max(errors))
    return CheckResult("capacitance_matrix", worst < 0.01, worst, 0.01,
                       "diagonal within 0.5%, coupling rounded to 0.1 MHz")


CHECKS: Tuple[Callable[[], CheckResult], ...] = (
    check_normal_ordering,
    check_commutator,
    check_harmonic_zpf,
    check_squeezing,
    check_trace_preservation,
    check_unitary_purity,
    check_capacitance_matrix,
)


def run_selfcheck() -> List[CheckResult]:
    results = []
    for check in CHECKS:
        result = check()
        if result.passed:
            logger.info(f"PASS {result.name} ({result.value:.2e})")
        else:
            logger.error(f"FAIL {result.name}: {result.value:.3e} > {result.tolerance:.1e}")
        results.append(result)
    return results
