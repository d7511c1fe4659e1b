"""
Shared fixtures: small analytic spectra and a reduced-truncation simulator.
"""

import pytest

from quartonsim.api import ReadoutSimulator
from quartonsim.config import parse_config
from quartonsim.operators import FockSpace, LadderPolynomial
from quartonsim.spectrum import eigensolve_and_label


SMALL_CONFIG_TEXT = """
# Reduced truncation of the design point for fast tests
name = small

solver.dims_a = 14
solver.dims_b = 8
solver.n_levels = 4
solver.optimize_tilt = false
solver.label_na = 12
solver.label_nb = 6
solver.n_star = 4

readout.i_star = 5
readout.j_star = 3
readout.pulse_len = 2 ns
readout.ringdown = 1 ns
readout.integration_time = 1 ns
readout.n_bar_target = 0.5
readout.eps0 = 50 MHz
readout.n_traj = 8
readout.chunk_size = 4
readout.substeps = 20
readout.n_times = 31

echo.n_series = 2
echo.series_len = 200 us
echo.segment = 100 us
echo.samples_per_segment = 100
echo.n_taus = 5
"""


def toy_spectrum(dims=(14, 3), omega_a=16.0, omega_b=7.5, chi=-0.25, kerr_a=0.0, kerr_b=0.0,
                 g=0.0):
    """ω_a n_a + ω_b n_b + χ n_a n_b + Kerr terms + g (a†b + a b†), labeled."""
    a = LadderPolynomial.ladder("a")
    ad = LadderPolynomial.ladder("a", dagger=True)
    b = LadderPolynomial.ladder("b")
    bd = LadderPolynomial.ladder("b", dagger=True)
    n_a, n_b = ad * a, bd * b
    poly = (n_a.scaled(omega_a) + n_b.scaled(omega_b) + (n_a * n_b).scaled(chi)
            + (ad * ad * a * a).scaled(kerr_a / 2.0) + (bd * bd * b * b).scaled(kerr_b / 2.0))
    if g:
        poly = poly + (ad * b + a * bd).scaled(g)
    return eigensolve_and_label(poly.to_matrix(FockSpace(tuple(dims))))


@pytest.fixture
def dispersive_spectrum():
    return toy_spectrum()


@pytest.fixture
def hybridized_spectrum():
    return toy_spectrum(g=0.05)


@pytest.fixture
def small_config_text():
    return SMALL_CONFIG_TEXT


@pytest.fixture(scope="session")
def small_config():
    return parse_config(SMALL_CONFIG_TEXT)


@pytest.fixture(scope="session")
def small_simulator(small_config):
    """One cached pipeline shared by the facade, decoherence and dynamics tests."""
    return ReadoutSimulator(small_config)


@pytest.fixture
def make_toy_spectrum():
    return toy_spectrum
