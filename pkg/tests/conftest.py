import numpy as np
import pytest

from erconvert.adiabatic import Ensemble
from erconvert.config import reference_device
from erconvert.model import AtomSite

# a small device with linear-frequency inputs and explicit mode volumes
BASIC_TEXT = """\
material.d31 = 2.13e-32 C*m
material.mu21 = 7.5 mu_B
material.rho = 1.87e23 m^-3
broadening.sigma_mu = 1 MHz
broadening.mean_mu = 3 MHz
broadening.eps_mu = 0.5 MHz
broadening.sigma_o = 500 MHz
broadening.mean_o = 1500 MHz
broadening.eps_o = 250 MHz
cavities.omega_a = 190 THz
cavities.omega_b = 5 GHz
cavities.Q_a = 1e7
cavities.Q_b = 2000
drive.Omega_peak = 10 MHz
geometry.crystal_radius = 2.5 mm
geometry.crystal_length = 10 mm
geometry.waist_diameter = 1 mm
geometry.refractive_index = 1.8
geometry.V_mu = 1.9634954084936207e-07 m^3
geometry.V_o = 3.9269908169872415e-09 m^3
ensemble.n_atoms = 1000
ensemble.seed = 7
"""


def atom(g_o=3.0, g_mu=2.0, Omega=1.0, delta_o=100.0, delta_mu=50.0, position=(0.0, 0.0, 0.0)):
    return AtomSite(position, g_o, g_mu, Omega, delta_o, delta_mu)


def random_ensemble(rng, n, ratio=0.05):
    d_o = rng.uniform(50, 150, n) * rng.choice([-1, 1], n)
    d_mu = rng.uniform(25, 75, n) * rng.choice([-1, 1], n)

    def cplx(scale):
        return scale * rng.uniform(0.1, 1, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))

    return Ensemble(np.zeros((n, 3)), cplx(ratio * np.abs(d_o)), cplx(ratio * np.abs(d_mu)),
                    cplx(ratio * np.sqrt(np.abs(d_o * d_mu))), d_o, d_mu)


@pytest.fixture(scope="session")
def ref_cfg():
    return reference_device()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
