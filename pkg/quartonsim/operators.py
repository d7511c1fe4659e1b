"""
Fock-space operators and a normal-ordered ladder-polynomial engine for two bosonic modes.

Tensor ordering is fixed as mode a (resonator) ⊗ mode b (qubit): the basis state
|n_a, n_b> sits at index n_a * N_b + n_b.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from quartonsim.validation import (
    Limits,
    OrderingOverflowError,
    check_hermitian,
    validate_even_order,
    validate_fock_dim,
    validate_mode,
    validate_positive,
)


Powers = Tuple[int, int, int, int]  # (a† power, a power, b† power, b power)

IDENTITY_POWERS: Powers = (0, 0, 0, 0)

# cos(j*pi/2) and sin(j*pi/2) for j mod 4
_COS_QUARTER = (1, 0, -1, 0)
_SIN_QUARTER = (0, 1, 0, -1)


@dataclass(frozen=True)
class FockSpace:
    """Truncated two-mode Fock space with dims (N_a, N_b)."""
    dims: Tuple[int, int]

    def __post_init__(self):
        if len(self.dims) != 2:
            raise ValueError(f"FockSpace needs two dimensions, got {self.dims}")
        for d in self.dims:
            validate_fock_dim(int(d))

    @property
    def n_a(self) -> int:
        return self.dims[0]

    @property
    def n_b(self) -> int:
        return self.dims[1]

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def index(self, n_a: int, n_b: int) -> int:
        """Flat index of |n_a, n_b>."""
        if not (0 <= n_a < self.n_a and 0 <= n_b < self.n_b):
            raise IndexError(f"|{n_a},{n_b}> outside truncation {self.dims}")
        return n_a * self.n_b + n_b

    def label(self, index: int) -> Tuple[int, int]:
        """Inverse of index()."""
        return divmod(index, self.n_b)

    def basis_vector(self, n_a: int, n_b: int) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index(n_a, n_b)] = 1.0
        return vec


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on a FockSpace."""
    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        shape = (self.space.dim, self.space.dim)
        if self.matrix.shape != shape:
            raise ValueError(f"Operator shape {self.matrix.shape} does not match space {shape}")

    def dagger(self) -> 'FockOperator':
        return FockOperator(self.space, self.matrix.conj().T)

    def is_hermitian(self, rtol: float = Limits.HERMITIAN_RTOL) -> bool:
        try:
            check_hermitian(self.matrix, rtol=rtol)
        except Exception:
            return False
        return True

    def commutator(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.space, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def expectation(self, state: np.ndarray) -> complex:
        return complex(np.vdot(state, self.matrix @ state))

    def __add__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.space, self.matrix - other.matrix)

    def __matmul__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.space, self.matrix @ other.matrix)

    def __mul__(self, scalar: complex) -> 'FockOperator':
        return FockOperator(self.space, self.matrix * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LadderMonomial:
    """coeff * a†^p a^q b†^r b^s, already in normal order."""
    coeff: complex
    powers: Powers

    def __post_init__(self):
        if len(self.powers) != 4 or any(p < 0 for p in self.powers):
            raise ValueError(f"Invalid ladder powers {self.powers}")

    @property
    def degree(self) -> int:
        return sum(self.powers)


# ── Single-mode normal-ordering kernel ──────────────────────────


def _reorder_single(p1: int, q1: int, p2: int, q2: int) -> List[Tuple[int, int, int]]:
    """
    Normal-order a†^p1 a^q1 a†^p2 a^q2.

    Returns:
        List of (integer weight, a† power, a power)
    """
    out = []
    for k in range(min(q1, p2) + 1):
        weight = math.comb(q1, k) * math.comb(p2, k) * math.factorial(k)
        out.append((weight, p1 + p2 - k, q1 + q2 - k))
    return out


class LadderPolynomial:
    """
    Normal-ordered polynomial in (a, a†, b, b†).

    Terms are stored in a dict keyed by power tuple; instances are treated as
    immutable and every operation returns a new polynomial.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[Powers, complex]] = None):
        self._terms: Dict[Powers, complex] = {}
        if terms:
            for powers, coeff in terms.items():
                if len(powers) != 4 or any(p < 0 for p in powers):
                    raise ValueError(f"Invalid ladder powers {powers}")
                self._terms[tuple(powers)] = complex(coeff)
        self._prune()

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value: complex) -> 'LadderPolynomial':
        return cls({IDENTITY_POWERS: value})

    @classmethod
    def ladder(cls, mode: str, dagger: bool = False) -> 'LadderPolynomial':
        """The single operator a, a†, b or b†."""
        slot = 2 * validate_mode(mode) + (0 if dagger else 1)
        powers = [0, 0, 0, 0]
        powers[slot] = 1
        return cls({tuple(powers): 1.0})

    @classmethod
    def quadrature(cls, mode: str) -> 'LadderPolynomial':
        """x + x† for the given mode."""
        return cls.ladder(mode) + cls.ladder(mode, dagger=True)

    @classmethod
    def from_monomials(cls, monomials: Iterable[LadderMonomial]) -> 'LadderPolynomial':
        terms: Dict[Powers, complex] = {}
        for mono in monomials:
            terms[mono.powers] = terms.get(mono.powers, 0j) + mono.coeff
        return cls(terms)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Dict[Powers, complex]:
        return dict(self._terms)

    def monomials(self) -> Iterator[LadderMonomial]:
        for powers in sorted(self._terms):
            yield LadderMonomial(self._terms[powers], powers)

    def coefficient(self, powers: Powers) -> complex:
        return self._terms.get(tuple(powers), 0j)

    @property
    def degree(self) -> int:
        return max((sum(p) for p in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LadderPolynomial):
            return NotImplemented
        if set(self._terms) != set(other._terms):
            return False
        return all(abs(self._terms[k] - other._terms[k]) <= 1e-12 * max(1.0, abs(self._terms[k]))
                   for k in self._terms)

    def __repr__(self) -> str:
        parts = [f"{c:.6g}*{p}" for p, c in sorted(self._terms.items())]
        return f"LadderPolynomial({', '.join(parts) or '0'})"

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: Union['LadderPolynomial', complex]) -> 'LadderPolynomial':
        if not isinstance(other, LadderPolynomial):
            other = LadderPolynomial.constant(other)
        terms = dict(self._terms)
        for powers, coeff in other._terms.items():
            terms[powers] = terms.get(powers, 0j) + coeff
        return LadderPolynomial(terms)

    __radd__ = __add__

    def __neg__(self) -> 'LadderPolynomial':
        return self.scaled(-1.0)

    def __sub__(self, other: Union['LadderPolynomial', complex]) -> 'LadderPolynomial':
        if not isinstance(other, LadderPolynomial):
            other = LadderPolynomial.constant(other)
        return self + (-other)

    def __mul__(self, other: Union['LadderPolynomial', complex]) -> 'LadderPolynomial':
        if isinstance(other, LadderPolynomial):
            return normal_order(self, other)
        return self.scaled(other)

    def __rmul__(self, other: complex) -> 'LadderPolynomial':
        return self.scaled(other)

    def __pow__(self, exponent: int) -> 'LadderPolynomial':
        if exponent < 0:
            raise ValueError("Negative powers are not defined")
        result = LadderPolynomial.constant(1.0)
        for _ in range(exponent):
            result = normal_order(result, self)
        return result

    def scaled(self, factor: complex) -> 'LadderPolynomial':
        return LadderPolynomial({p: c * factor for p, c in self._terms.items()})

    def dagger(self) -> 'LadderPolynomial':
        return LadderPolynomial(
            {(q, p, s, r): c.conjugate() for (p, q, r, s), c in self._terms.items()}
        )

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        """Every term has its conjugate-transposed partner with conjugate coefficient."""
        for (p, q, r, s), coeff in self._terms.items():
            partner = self._terms.get((q, p, s, r), 0j)
            if abs(partner - coeff.conjugate()) > tol * max(1.0, abs(coeff)):
                return False
        return True

    def split(self) -> Tuple['LadderPolynomial', 'LadderPolynomial', 'LadderPolynomial', complex]:
        """
        Separate into (H_a, H_b, H_coup, constant).

        H_a holds terms acting only on mode a, H_b only on mode b, and H_coup every
        term touching both modes.
        """
        h_a, h_b, h_c = {}, {}, {}
        constant = self._terms.get(IDENTITY_POWERS, 0j)
        for powers, coeff in self._terms.items():
            if powers == IDENTITY_POWERS:
                continue
            on_a = powers[0] + powers[1] > 0
            on_b = powers[2] + powers[3] > 0
            if on_a and on_b:
                h_c[powers] = coeff
            elif on_a:
                h_a[powers] = coeff
            else:
                h_b[powers] = coeff
        return LadderPolynomial(h_a), LadderPolynomial(h_b), LadderPolynomial(h_c), constant

    def without_constant(self) -> 'LadderPolynomial':
        return LadderPolynomial({p: c for p, c in self._terms.items() if p != IDENTITY_POWERS})

    # -- matrices ---------------------------------------------------------

    def to_matrix(self, space: FockSpace) -> FockOperator:
        """Evaluate on a truncated two-mode space."""
        out = np.zeros((space.dim, space.dim), dtype=complex)
        eye_a = np.eye(space.n_a)
        eye_b = np.eye(space.n_b)
        for (p, q, r, s), coeff in self._terms.items():
            left = _mode_term(space.n_a, p, q) if p + q else eye_a
            right = _mode_term(space.n_b, r, s) if r + s else eye_b
            out += coeff * np.kron(left, right)
        return FockOperator(space, out)

    def single_mode_matrix(self, mode: str, dim: int) -> np.ndarray:
        """
        Evaluate a polynomial that acts on one mode only.

        Raises:
            ValueError: If a term touches the other mode
        """
        slot = validate_mode(mode)
        out = np.zeros((dim, dim), dtype=complex)
        for powers, coeff in self._terms.items():
            other = powers[2:] if slot == 0 else powers[:2]
            if any(other):
                raise ValueError(f"Term {powers} acts on the other mode")
            p, q = powers[:2] if slot == 0 else powers[2:]
            out += coeff * (_mode_term(dim, p, q) if p + q else np.eye(dim))
        return out

    # -- internals --------------------------------------------------------

    def _prune(self) -> None:
        if not self._terms:
            return
        scale = max(abs(c) for c in self._terms.values())
        if not np.isfinite(scale) or scale > Limits.MAX_COEFFICIENT:
            raise OrderingOverflowError(
                f"Coefficient magnitude {scale:.3e} overflows; lower the Taylor order "
                f"or the zero-point amplitude"
            )
        cutoff = 1e-15 * scale
        self._terms = {p: c for p, c in self._terms.items() if abs(c) > cutoff}


@lru_cache(maxsize=4096)
def _mode_term(dim: int, p: int, q: int) -> np.ndarray:
    """Matrix of a†^p a^q on a single truncated mode."""
    a = annihilation_matrix(dim)
    ad = a.T
    out = np.linalg.matrix_power(ad, p) @ np.linalg.matrix_power(a, q)
    out.setflags(write=False)
    return out


def annihilation_matrix(dim: int) -> np.ndarray:
    """Single-mode lowering operator with <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


# ── Public operations ────────────────────────────────────────────


def build_annihilation(space: FockSpace, mode: str) -> FockOperator:
    """
    Lowering operator for one mode, identity on the other.

    Args:
        space: Two-mode Fock space
        mode: 'a' or 'b'

    Returns:
        FockOperator for a ⊗ 1 or 1 ⊗ b
    """
    slot = validate_mode(mode)
    if slot == 0:
        matrix = np.kron(annihilation_matrix(space.n_a), np.eye(space.n_b))
    else:
        matrix = np.kron(np.eye(space.n_a), annihilation_matrix(space.n_b))
    return FockOperator(space, matrix.astype(complex))


def normal_order(*factors: Union[LadderPolynomial, LadderMonomial]) -> LadderPolynomial:
    """
    Normal-order a product of ladder monomials or polynomials.

    Integer reordering weights are exact; coefficients are complex floats.

    Raises:
        OrderingOverflowError: If a coefficient overflows
    """
    result = LadderPolynomial.constant(1.0)
    for factor in factors:
        if isinstance(factor, LadderMonomial):
            factor = LadderPolynomial({factor.powers: factor.coeff})
        result = _multiply(result, factor)
    return result


def _multiply(left: LadderPolynomial, right: LadderPolynomial) -> LadderPolynomial:
    terms: Dict[Powers, complex] = {}
    for (p1, q1, r1, s1), c1 in left._terms.items():
        for (p2, q2, r2, s2), c2 in right._terms.items():
            a_part = _reorder_single(p1, q1, p2, q2)
            b_part = _reorder_single(r1, s1, r2, s2)
            base = c1 * c2
            for wa, pa, qa in a_part:
                for wb, pb, qb in b_part:
                    key = (pa, qa, pb, qb)
                    terms[key] = terms.get(key, 0j) + base * (wa * wb)
    return LadderPolynomial(terms)


def combine_modes(poly_a: LadderPolynomial, poly_b: LadderPolynomial) -> LadderPolynomial:
    """Product of a mode-a-only polynomial and a mode-b-only polynomial (no reordering needed)."""
    terms: Dict[Powers, complex] = {}
    for (p, q, _, _), ca in poly_a._terms.items():
        for (_, _, r, s), cb in poly_b._terms.items():
            key = (p, q, r, s)
            terms[key] = terms.get(key, 0j) + ca * cb
    return LadderPolynomial(terms)


@lru_cache(maxsize=64)
def quadrature_power(mode: str, k: int) -> LadderPolynomial:
    """Normal-ordered (x + x†)^k for one mode at unit amplitude."""
    if k == 0:
        return LadderPolynomial.constant(1.0)
    return normal_order(quadrature_power(mode, k - 1), LadderPolynomial.quadrature(mode))


def vacuum_moment(k: int) -> float:
    """<0|(x + x†)^k|0>: (k-1)!! for even k, zero otherwise."""
    if k % 2:
        return 0.0
    return float(math.prod(range(k - 1, 0, -2))) if k else 1.0


def _series_factor(bias: float, j: int) -> float:
    """cos(bias + j*pi/2), exact when the bias is 0 or pi."""
    sin_b = math.sin(bias)
    cos_b = math.cos(bias)
    if abs(sin_b) < 1e-12:
        sin_b = 0.0
    if abs(cos_b - round(cos_b)) < 1e-12:
        cos_b = float(round(cos_b))
    return cos_b * _COS_QUARTER[j % 4] - sin_b * _SIN_QUARTER[j % 4]


def phase_power(amp_a: float, amp_b: float, k: int) -> LadderPolynomial:
    """Normal-ordered (amp_a (a + a†) + amp_b (b + b†))^k via the binomial split."""
    if amp_b == 0:
        return quadrature_power("a", k).scaled(amp_a ** k)
    if amp_a == 0:
        return quadrature_power("b", k).scaled(amp_b ** k)
    total = LadderPolynomial()
    for m in range(k + 1):
        weight = math.comb(k, m) * amp_a ** m * amp_b ** (k - m)
        part = combine_modes(quadrature_power("a", m), quadrature_power("b", k - m))
        total = total + part.scaled(weight)
    return total


def cosine_expansion(energy: float, count: int, amp_a: float, amp_b: float, order: int,
                     bias: float = 0.0) -> LadderPolynomial:
    """
    Taylor expansion of -count * E * cos((φ + bias) / count), constant term dropped.

    φ = amp_a (a + a†) + amp_b (b + b†). Terms up to φ^order are kept.
    """
    validate_even_order(order)
    if count < 1:
        raise ValueError(f"Junction count must be >= 1, got {count}")
    total = LadderPolynomial()
    if energy == 0:
        return total
    shift = bias / count
    for j in range(1, order + 1):
        factor = _series_factor(shift, j)
        if factor == 0:
            continue
        coeff = -count * energy * factor / (count ** j * math.factorial(j))
        total = total + phase_power(amp_a, amp_b, j).scaled(coeff)
    return total


def taylor_potential(E: float, n_series: int, zpf: float, order: int,
                     mode: str = "a") -> LadderPolynomial:
    """
    Normal-ordered expansion of -n_series * E * cos(φ / n_series) with φ = zpf (x + x†).

    Args:
        E: Junction energy (GHz)
        n_series: Number of identical junctions in series
        zpf: Phase zero-point amplitude
        order: Even truncation order in {4, 6, 8, 10}
        mode: Mode carrying φ

    Raises:
        ValueError: On odd order or non-positive zpf
    """
    validate_positive("zpf", zpf)
    slot = validate_mode(mode)
    amp_a, amp_b = (zpf, 0.0) if slot == 0 else (0.0, zpf)
    return cosine_expansion(E, n_series, amp_a, amp_b, order)


def hermitian_function(matrix: np.ndarray, func: Callable[[np.ndarray], np.ndarray],
                       name: str = "operator") -> np.ndarray:
    """
    Apply a scalar function to a Hermitian matrix by spectral decomposition.

    Raises:
        HermiticityError: If the input is not Hermitian
    """
    check_hermitian(matrix, name)
    herm = 0.5 * (matrix + matrix.conj().T)
    values, vectors = np.linalg.eigh(herm)
    return (vectors * func(values)) @ vectors.conj().T


def matrix_cosine(phi_op: FockOperator) -> FockOperator:
    """cos of a Hermitian phase operator."""
    return FockOperator(phi_op.space, hermitian_function(phi_op.matrix, np.cos, "phase operator"))


def matrix_sine(phi_op: FockOperator) -> FockOperator:
    """sin of a Hermitian phase operator."""
    return FockOperator(phi_op.space, hermitian_function(phi_op.matrix, np.sin, "phase operator"))


def phase_matrix(dim: int, zpf: float) -> np.ndarray:
    """Single-mode φ = zpf (a + a†)."""
    a = annihilation_matrix(dim)
    return zpf * (a + a.T)


def charge_matrix(dim: int, zpf: float) -> np.ndarray:
    """Single-mode n = i n_zpf (a† - a), n_zpf = 1/(2 zpf)."""
    a = annihilation_matrix(dim)
    return 1j / (2.0 * zpf) * (a.T - a)
