"""
Circuit model: parameters, junction branches and Hamiltonian construction.

The working modes are the resonator node a and the qubit node b. Every Josephson
element is a JunctionBranch contributing -count * E * cos((c_a φ_a + c_b φ_b + bias) / count).
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from quartonsim.log import get_logger
from quartonsim.operators import (
    FockOperator,
    FockSpace,
    LadderPolynomial,
    annihilation_matrix,
    charge_matrix,
    cosine_expansion,
    hermitian_function,
    phase_matrix,
    quadrature_power,
    vacuum_moment,
)
from quartonsim.util import CHARGING_GHZ_FF, TWO_PI, harmonic_zpf
from quartonsim.validation import check_hermitian, validate_even_order, validate_positive

if TYPE_CHECKING:
    from quartonsim.basis import BasisChoice


logger = get_logger("circuit")


def _unit(unit: str) -> dict:
    return {"unit": unit}


class CircuitParams(BaseModel):
    """
    Circuit energies (GHz, h = 1), junction counts and capacitances (fF).

    Defaults are the starred design point: resonator E_Ja_eff = 269 GHz, qubit
    E_Jb = 20.3 GHz, quarton E_J = 186.7 GHz with tilt 2α = 1.02.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    E_Ja: float = Field(538.0, gt=0, json_schema_extra=_unit("GHz"))
    E_Jb: float = Field(20.3, gt=0, json_schema_extra=_unit("GHz"))
    E_J: float = Field(186.7, ge=0, json_schema_extra=_unit("GHz"))
    E_Q: float = Field(70.0, ge=0, json_schema_extra=_unit("GHz"))
    E_Ca: float = Field(0.119, gt=0, json_schema_extra=_unit("GHz"))
    E_Cb: float = Field(0.325, gt=0, json_schema_extra=_unit("GHz"))
    E_Cab: Optional[float] = Field(None, ge=0, json_schema_extra=_unit("GHz"))
    alpha: float = Field(0.51, ge=0, json_schema_extra=_unit(""))
    n_S: int = Field(2, ge=1, json_schema_extra=_unit(""))
    n_Ja: int = Field(2, ge=1, json_schema_extra=_unit(""))
    n_Jb: int = Field(1, ge=1, json_schema_extra=_unit(""))
    C_a: float = Field(163.0, gt=0, json_schema_extra=_unit("fF"))
    C_b: float = Field(59.6, gt=0, json_schema_extra=_unit("fF"))
    C_J: float = Field(5.2, gt=0, json_schema_extra=_unit("fF"))
    C_s: Optional[float] = Field(None, gt=0, json_schema_extra=_unit("fF"))
    C_alpha: Optional[float] = Field(None, gt=0, json_schema_extra=_unit("fF"))
    kappa_r: float = Field(0.3, gt=0, json_schema_extra=_unit("GHz"))
    kappa_f: float = Field(1.2, gt=0, json_schema_extra=_unit("GHz"))
    flux_bias: float = Field(0.5, json_schema_extra=_unit(""))

    @model_validator(mode="after")
    def _check_quartic_energy(self) -> 'CircuitParams':
        expected = self.E_J * quartic_factor(self.n_S)
        if abs(expected - self.E_Q) > 0.01 * max(self.E_Q, expected, 1e-9):
            logger.warning(
                f"E_Q={self.E_Q:.3f} GHz inconsistent with E_J={self.E_J:.3f} GHz and "
                f"n_S={self.n_S} (expected {expected:.3f} GHz)"
            )
        return self

    # -- derived quantities ---------------------------------------------

    @property
    def tilt(self) -> float:
        return 2.0 * self.alpha

    @property
    def E_Ja_eff(self) -> float:
        return self.E_Ja / self.n_Ja

    @property
    def E_Jb_eff(self) -> float:
        return self.E_Jb / self.n_Jb

    @property
    def C_s_eff(self) -> float:
        return self.C_s if self.C_s is not None else self.C_J / self.n_S

    @property
    def C_alpha_eff(self) -> float:
        """Lone-junction capacitance; scales with its size α like its Josephson energy."""
        return self.C_alpha if self.C_alpha is not None else self.alpha * self.C_J

    @property
    def C_Q(self) -> float:
        """
        Quarton capacitance between the two nodes.

        With C_s = C_J/n_S and C_α = α C_J this is the coupling left after the
        internal series node is eliminated from the node capacitance matrix.
        """
        return self.C_s_eff + self.C_alpha_eff

    @property
    def E_Cab_eff(self) -> float:
        if self.E_Cab is not None:
            return self.E_Cab
        return coupling_charging_energy(self.C_a, self.C_b, self.C_Q)

    def with_tilt(self, tilt: float) -> 'CircuitParams':
        return self.model_copy(update={"alpha": tilt / 2.0})

    def with_quartic_energy(self, e_q: float) -> 'CircuitParams':
        """Set E_Q and the matching quarton E_J."""
        factor = quartic_factor(self.n_S)
        if factor <= 0:
            raise ValueError(f"n_S={self.n_S} has no quartic-only operating point")
        return self.model_copy(update={"E_Q": e_q, "E_J": e_q / factor})

    def swapped(self) -> 'CircuitParams':
        """Exchange the roles of modes a and b."""
        return self.model_copy(update={
            "E_Ja": self.E_Jb, "E_Jb": self.E_Ja,
            "n_Ja": self.n_Jb, "n_Jb": self.n_Ja,
            "E_Ca": self.E_Cb, "E_Cb": self.E_Ca,
            "C_a": self.C_b, "C_b": self.C_a,
        })

    def branches(self) -> List['JunctionBranch']:
        return [
            JunctionBranch("resonator", self.E_Ja, self.n_Ja, 1.0, 0.0),
            JunctionBranch("qubit", self.E_Jb, self.n_Jb, 0.0, 1.0),
            JunctionBranch("quarton_alpha", self.alpha * self.E_J, 1, 1.0, -1.0,
                           TWO_PI * self.flux_bias),
            JunctionBranch("quarton_series", self.E_J, self.n_S, 1.0, -1.0),
        ]


def quartic_factor(n_series: int) -> float:
    """E_Q / E_J at the linear-cancellation point α = 1/n_S."""
    return 1.0 / n_series - 1.0 / n_series ** 3


def coupling_charging_energy(c_a: float, c_b: float, c_q: float) -> float:
    """Off-diagonal E_Cab (GHz) of the two-node Maxwell matrix with coupling c_q."""
    det = c_a * c_b - c_q ** 2
    if det <= 0:
        raise ValueError("Capacitance matrix is not positive definite")
    return CHARGING_GHZ_FF * c_q / det


@dataclass(frozen=True)
class JunctionBranch:
    """A chain of `count` identical junctions across phase c_a φ_a + c_b φ_b."""
    name: str
    energy: float
    count: int
    coeff_a: float
    coeff_b: float
    bias: float = 0.0


# ── Separable operator construction ─────────────────────────────


@dataclass
class SeparableOperator:
    """Σ coeff * A ⊗ B with single-mode factors."""
    dims: Tuple[int, int]
    terms: List[Tuple[complex, np.ndarray, np.ndarray]] = field(default_factory=list)

    def add(self, coeff: complex, left: Optional[np.ndarray], right: Optional[np.ndarray]) -> None:
        if coeff == 0:
            return
        if left is None:
            left = np.eye(self.dims[0])
        if right is None:
            right = np.eye(self.dims[1])
        self.terms.append((coeff, left, right))

    def matrix(self) -> np.ndarray:
        dim = self.dims[0] * self.dims[1]
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, left, right in self.terms:
            out += coeff * np.kron(left, right)
        return out

    def element(self, bra: Tuple[int, int], ket: Tuple[int, int]) -> complex:
        """<bra|O|ket> without building the full matrix."""
        return complex(sum(c * l[bra[0], ket[0]] * r[bra[1], ket[1]] for c, l, r in self.terms))


def _mode_functions(dim: int, zpf: float, scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """cos and sin of scale * φ on one mode."""
    if scale == 0:
        return np.eye(dim, dtype=complex), np.zeros((dim, dim), dtype=complex)
    phi = phase_matrix(dim, zpf) * scale
    return hermitian_function(phi, np.cos), hermitian_function(phi, np.sin)


def branch_trig(branch: JunctionBranch, dims: Tuple[int, int], zpf_a: float, zpf_b: float,
                offset: float = 0.0, kind: str = "cos") -> SeparableOperator:
    """
    cos or sin of the branch argument (c_a φ_a + c_b φ_b + bias + offset) / count.

    Uses cos(u+v+s) = cos s (Ca Cb - Sa Sb) - sin s (Sa Cb + Ca Sb) and the matching sine rule.
    """
    ca, sa = _mode_functions(dims[0], zpf_a, branch.coeff_a / branch.count)
    cb, sb = _mode_functions(dims[1], zpf_b, branch.coeff_b / branch.count)
    shift = (branch.bias + offset) / branch.count
    cs, ss = math.cos(shift), math.sin(shift)
    if abs(ss) < 1e-14:
        ss = 0.0
    if abs(cs) < 1e-14:
        cs = 0.0
    op = SeparableOperator(dims)
    if kind == "cos":
        op.add(cs, ca, cb)
        op.add(-cs, sa, sb)
        op.add(-ss, sa, cb)
        op.add(-ss, ca, sb)
    elif kind == "sin":
        op.add(cs, sa, cb)
        op.add(cs, ca, sb)
        op.add(ss, ca, cb)
        op.add(-ss, sa, sb)
    else:
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    return op


def charge_square_matrix(dim: int, zpf: float) -> np.ndarray:
    """Normal-ordered n^2 = n_zpf^2 (2 a†a - a†^2 - a^2), constant dropped."""
    a = annihilation_matrix(dim)
    ad = a.T
    nz2 = 1.0 / (4.0 * zpf ** 2)
    return nz2 * (2.0 * ad @ a - ad @ ad - a @ a)


def exact_operator(params: CircuitParams, dims: Tuple[int, int], zpf_a: float, zpf_b: float,
                   offsets: Optional[Dict[str, float]] = None) -> SeparableOperator:
    """Full-cosine Hamiltonian as a separable sum."""
    validate_positive("zpf_a", zpf_a)
    validate_positive("zpf_b", zpf_b)
    offsets = offsets or {}
    op = SeparableOperator(dims)
    op.add(4.0 * params.E_Ca, charge_square_matrix(dims[0], zpf_a), None)
    op.add(4.0 * params.E_Cb, None, charge_square_matrix(dims[1], zpf_b))
    op.add(8.0 * params.E_Cab_eff, charge_matrix(dims[0], zpf_a), charge_matrix(dims[1], zpf_b))
    for branch in params.branches():
        if branch.energy == 0:
            continue
        trig = branch_trig(branch, dims, zpf_a, zpf_b, offsets.get(branch.name, 0.0))
        for coeff, left, right in trig.terms:
            op.add(-branch.count * branch.energy * coeff, left, right)
    return op


# ── Taylor (ladder-polynomial) construction ─────────────────────


def kinetic_polynomial(params: CircuitParams, zpf_a: float, zpf_b: float,
                       include_coupling: bool = True) -> LadderPolynomial:
    """4 E_Ca n_a^2 + 4 E_Cb n_b^2 + 8 E_Cab n_a n_b, normal ordered, constant dropped."""
    poly = LadderPolynomial()
    for mode, e_c, zpf in (("a", params.E_Ca, zpf_a), ("b", params.E_Cb, zpf_b)):
        nz2 = 1.0 / (4.0 * zpf ** 2)
        x = LadderPolynomial.ladder(mode)
        xd = LadderPolynomial.ladder(mode, dagger=True)
        poly = poly + (xd * x * 2.0 - xd * xd - x * x).scaled(4.0 * e_c * nz2)
    if include_coupling and params.E_Cab_eff:
        n_a = (LadderPolynomial.ladder("a", True) - LadderPolynomial.ladder("a")).scaled(
            1j / (2.0 * zpf_a))
        n_b = (LadderPolynomial.ladder("b", True) - LadderPolynomial.ladder("b")).scaled(
            1j / (2.0 * zpf_b))
        poly = poly + (n_a * n_b).scaled(8.0 * params.E_Cab_eff)
    return poly


def taylor_polynomial(params: CircuitParams, zpf_a: float, zpf_b: float,
                      order: int = 8) -> LadderPolynomial:
    """Full two-mode Hamiltonian expanded to `order` in every branch phase."""
    validate_even_order(order)
    validate_positive("zpf_a", zpf_a)
    validate_positive("zpf_b", zpf_b)
    poly = kinetic_polynomial(params, zpf_a, zpf_b)
    for branch in params.branches():
        poly = poly + cosine_expansion(branch.energy, branch.count, branch.coeff_a * zpf_a,
                                       branch.coeff_b * zpf_b, order, branch.bias)
    return poly.without_constant()


def mode_polynomial(params: CircuitParams, mode: str, zpf_a: float, zpf_b: float,
                    order: int = 8) -> LadderPolynomial:
    """
    Bare Hamiltonian H_j of one mode: the terms of the Taylor Hamiltonian acting on mode j only.

    Cross terms contribute through the other mode's normal-ordering constants, so H_j
    depends on both zero-point amplitudes.
    """
    validate_even_order(order)
    own, other = (0, 1) if mode == "a" else (1, 0)
    zpfs = (zpf_a, zpf_b)
    e_c = params.E_Ca if mode == "a" else params.E_Cb
    x = LadderPolynomial.ladder(mode)
    xd = LadderPolynomial.ladder(mode, dagger=True)
    nz2 = 1.0 / (4.0 * zpfs[own] ** 2)
    poly = (xd * x * 2.0 - xd * xd - x * x).scaled(4.0 * e_c * nz2)
    for branch in params.branches():
        if branch.energy == 0:
            continue
        coeffs = (branch.coeff_a, branch.coeff_b)
        amp_own = coeffs[own] * zpfs[own]
        amp_other = coeffs[other] * zpfs[other]
        if amp_own == 0:
            continue
        shift = branch.bias / branch.count
        for j in range(1, order + 1):
            factor = math.cos(shift + j * math.pi / 2)
            if abs(factor) < 1e-12:
                continue
            coeff = -branch.count * branch.energy * factor / (branch.count ** j * math.factorial(j))
            for m in range(1, j + 1):
                weight = (math.comb(j, m) * amp_own ** m * amp_other ** (j - m)
                          * vacuum_moment(j - m))
                if weight == 0:
                    continue
                poly = poly + quadrature_power(mode, m).scaled(coeff * weight)
    return poly.without_constant()


def harmonic_polynomial(e_c: float, e_j: float, zpf: float, mode: str = "a") -> LadderPolynomial:
    """4 E_C n^2 + E_J φ^2 / 2 on one mode, normal ordered, constant dropped."""
    x = LadderPolynomial.ladder(mode)
    xd = LadderPolynomial.ladder(mode, dagger=True)
    nz2 = 1.0 / (4.0 * zpf ** 2)
    kinetic = (xd * x * 2.0 - xd * xd - x * x).scaled(4.0 * e_c * nz2)
    potential = quadrature_power(mode, 2).scaled(0.5 * e_j * zpf ** 2)
    return (kinetic + potential).without_constant()


# ── Bundles ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class HamiltonianBundle:
    """Full Hamiltonian plus its Taylor decomposition H = H_a + H_b + H_coup."""
    H_full: FockOperator
    H_a: LadderPolynomial
    H_b: LadderPolynomial
    H_coup: LadderPolynomial
    basis: 'BasisChoice'
    mode: str = "exact"

    def __post_init__(self):
        for powers in self.H_coup.terms:
            if powers[0] + powers[1] == 0 or powers[2] + powers[3] == 0:
                raise AssertionError(f"Coupling term {powers} acts on a single mode")

    @property
    def space(self) -> FockSpace:
        return self.H_full.space


def build_hamiltonian(params: CircuitParams, basis: 'BasisChoice', mode: str = "exact",
                      order: int = 8, dims: Tuple[int, int] = (25, 25),
                      offsets: Optional[Dict[str, float]] = None) -> HamiltonianBundle:
    """
    Build the circuit Hamiltonian in the Fock basis set by `basis`.

    Args:
        params: Circuit parameters
        basis: Zero-point amplitudes for both modes
        mode: 'exact' (matrix cosines) or 'taylor' (ladder polynomial of given order)
        order: Taylor order for the decomposition and for taylor mode
        dims: Fock truncation per mode
        offsets: Extra static phase per branch name (flux offsets)

    Returns:
        HamiltonianBundle

    Raises:
        ValueError: On non-positive zpf or unknown mode
    """
    validate_positive("zpf_a", basis.zpf_a)
    validate_positive("zpf_b", basis.zpf_b)
    space = FockSpace(tuple(dims))
    poly = taylor_polynomial(params, basis.zpf_a, basis.zpf_b, order)
    h_a, h_b, h_coup, _ = poly.split()
    if mode == "exact":
        matrix = exact_operator(params, space.dims, basis.zpf_a, basis.zpf_b, offsets).matrix()
    elif mode == "taylor":
        if offsets:
            raise ValueError("Flux offsets require exact mode")
        matrix = poly.to_matrix(space).matrix
    else:
        raise ValueError(f"mode must be 'exact' or 'taylor', got {mode!r}")
    check_hermitian(matrix, "Hamiltonian")
    matrix = 0.5 * (matrix + matrix.conj().T)
    logger.debug(f"Built {mode} Hamiltonian on {space.dims} (tilt {params.tilt:.4f})")
    return HamiltonianBundle(FockOperator(space, matrix), h_a, h_b, h_coup, basis, mode)


def coupling_element(params: CircuitParams, basis: 'BasisChoice', dims: Tuple[int, int] = (25, 25),
                     mode: str = "exact", order: int = 8) -> complex:
    """
    Linear coupling <0_a 1_b|H|1_a 0_b>.

    In taylor mode only the normal-ordered a b† monomial contributes, so the
    element is its coefficient and does not depend on the truncation.
    """
    if mode == "exact":
        return exact_operator(params, dims, basis.zpf_a, basis.zpf_b).element((0, 1), (1, 0))
    if mode == "taylor":
        return taylor_polynomial(params, basis.zpf_a, basis.zpf_b, order).coefficient((0, 1, 1, 0))
    raise ValueError(f"mode must be 'exact' or 'taylor', got {mode!r}")


def harmonic_guess(params: CircuitParams) -> Tuple[float, float]:
    """Harmonic zero-point amplitudes for both modes."""
    return (harmonic_zpf(params.E_Ca, params.E_Ja_eff), harmonic_zpf(params.E_Cb, params.E_Jb_eff))


# ── Capacitance transform ────────────────────────────────────────


@dataclass(frozen=True)
class CapacitanceMatrixResult:
    """Charging-energy matrix (MHz) in the (φ_a, φ_b, φ̃_r, φ̃_q) coordinates."""
    E_C_matrix: np.ndarray
    internal_mode_freqs: Tuple[float, float]

    @property
    def E_C12(self) -> float:
        return float(self.E_C_matrix[0, 1])


TRANSFORM_W = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.5, 0.0, -1.0, 0.0],
    [0.5, 0.5, 0.0, -1.0],
])


def node_capacitance_matrix(C_Jq: float, C_Jr: float, C_a: float, C_b: float,
                            alpha: float = 0.5) -> np.ndarray:
    """
    Maxwell capacitance matrix over nodes (a, b, r, q).

    r is the internal node of the two-junction resonator chain, q the internal node
    of the quarton's series pair; the lone quarton junction carries alpha * C_Jq.
    """
    c_alpha = alpha * C_Jq
    return np.array([
        [C_a + C_Jr + C_Jq + c_alpha, -c_alpha, -C_Jr, -C_Jq],
        [-c_alpha, C_b + C_Jq + c_alpha, 0.0, -C_Jq],
        [-C_Jr, 0.0, 2.0 * C_Jr, 0.0],
        [-C_Jq, -C_Jq, 0.0, 2.0 * C_Jq],
    ])


def capacitance_transform(C_Jq: float, C_Jr: float, C_a: float, C_b: float,
                          E_Jr: float = 538.0, E_Jq: float = 186.7,
                          alpha: float = 0.5) -> CapacitanceMatrixResult:
    """
    Charging-energy matrix (e^2/2) W C^-1 W^T in MHz plus internal-mode frequencies.

    Args:
        C_Jq: Quarton series-junction capacitance (fF)
        C_Jr: Resonator chain junction capacitance (fF)
        C_a, C_b: Node capacitances to ground (fF)
        E_Jr, E_Jq: Per-junction energies of the resonator chain and quarton pair (GHz)
        alpha: Lone-junction size relative to a series junction

    Raises:
        ValueError: On non-positive or singular capacitances
    """
    for name, value in (("C_Jq", C_Jq), ("C_Jr", C_Jr), ("C_a", C_a), ("C_b", C_b)):
        validate_positive(name, value)
    cap = node_capacitance_matrix(C_Jq, C_Jr, C_a, C_b, alpha)
    if np.linalg.cond(cap) > 1e12:
        raise ValueError("Capacitance matrix is singular")
    inverse = np.linalg.inv(cap)
    e_c = CHARGING_GHZ_FF * 1e3 * TRANSFORM_W @ inverse @ TRANSFORM_W.T
    e_c = 0.5 * (e_c + e_c.T)
    # Internal modes see -2E cos(φ̃) at φ_a = φ_b = 0
    freqs = []
    for idx, e_j in ((2, E_Jr), (3, E_Jq)):
        ec_ghz = e_c[idx, idx] * 1e-3
        freqs.append(math.sqrt(8.0 * ec_ghz * 2.0 * e_j) - ec_ghz)
    return CapacitanceMatrixResult(e_c, (freqs[0], freqs[1]))
