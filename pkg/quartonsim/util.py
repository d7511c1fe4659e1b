"""
Unit conversions and small numerical helpers shared across modules.

Energies are frequencies in GHz (h = 1), times are in ns, capacitances in fF.
"""

import math
from typing import Tuple

import numpy as np
from scipy import constants
from scipy.stats import poisson


TWO_PI = 2.0 * math.pi

E_CHARGE = constants.e
H_PLANCK = constants.h
HBAR = constants.hbar
K_BOLTZMANN = constants.k
FLUX_QUANTUM = constants.physical_constants["mag. flux quantum"][0]

# e^2 / (2h) expressed in GHz * fF, so E_C[GHz] = CHARGING_GHZ_FF / C[fF]
CHARGING_GHZ_FF = E_CHARGE ** 2 / (2.0 * H_PLANCK) * 1e6

GHZ = 1e9
MHZ_PER_GHZ = 1e3


def charging_energy(capacitance_ff: float) -> float:
    """Charging energy e^2/2C in GHz for a capacitance in fF."""
    if capacitance_ff <= 0:
        raise ValueError(f"Capacitance must be positive, got {capacitance_ff}")
    return CHARGING_GHZ_FF / capacitance_ff


def capacitance_from_energy(e_c: float) -> float:
    """Inverse of charging_energy: capacitance in fF for E_C in GHz."""
    if e_c <= 0:
        raise ValueError(f"Charging energy must be positive, got {e_c}")
    return CHARGING_GHZ_FF / e_c


def harmonic_frequency(e_c: float, e_j: float) -> float:
    """Plasma frequency sqrt(8 E_C E_J) in GHz."""
    return math.sqrt(8.0 * e_c * e_j)


def harmonic_zpf(e_c: float, e_j: float) -> float:
    """Phase zero-point amplitude (2 E_C / E_J)^(1/4) of a harmonic mode."""
    return (2.0 * e_c / e_j) ** 0.25


def to_mhz(value_ghz: float) -> float:
    return value_ghz * MHZ_PER_GHZ


def to_angular_per_second(value_ghz: float) -> float:
    """Convert a frequency in GHz to an angular rate in rad/s."""
    return TWO_PI * value_ghz * GHZ


def thermal_ratio(frequency_ghz: float, temperature_mk: float) -> float:
    """h f / k_B T, returning inf at zero temperature."""
    if temperature_mk <= 0:
        return math.inf
    return H_PLANCK * frequency_ghz * GHZ / (K_BOLTZMANN * temperature_mk * 1e-3)


def bose_einstein(frequency_ghz: float, temperature_mk: float) -> float:
    """Thermal occupation of a mode at frequency f and temperature T."""
    x = thermal_ratio(frequency_ghz, temperature_mk)
    if math.isinf(x) or x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def emission_factor(frequency_ghz: float, temperature_mk: float) -> float:
    """coth(h f / 2 k_B T) + 1, which tends to 2 as T -> 0."""
    x = thermal_ratio(frequency_ghz, temperature_mk)
    if math.isinf(x) or x > 700:
        return 2.0
    return 1.0 / math.tanh(x / 2.0) + 1.0


def poisson_cutoff(n_bar: float, tail: float) -> int:
    """
    Smallest photon number n_max such that P(N > n_max) < tail for N ~ Poisson(n_bar).

    Args:
        n_bar: Mean photon number
        tail: Allowed tail population

    Returns:
        Cutoff photon number (0 when n_bar is 0)
    """
    if n_bar <= 0:
        return 0
    n_max = int(math.ceil(n_bar))
    while poisson.sf(n_max, n_bar) >= tail:
        n_max += 1
    return n_max


def coherent_amplitudes(n_bar: float, n_max: int) -> np.ndarray:
    """Fock amplitudes e^{-n/2} alpha^k / sqrt(k!) of a real coherent state, k = 0..n_max."""
    if n_bar <= 0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    k = np.arange(n_max + 1)
    return np.sqrt(poisson.pmf(k, n_bar))


def fit_quadratic(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """Least-squares y = c0 + c1 x + c2 x^2; returns (c0, c1, c2)."""
    c2, c1, c0 = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 2)
    return float(c0), float(c1), float(c2)
