import math

import pytest

from riscov.channel import RadioConfig, RisPanel
from riscov.coverage import SolverConfig
from riscov.geometry import SiteGeometry

# reference link budget; sigma^2 = -96 dBm, gamma_th = 8 dB + 28 dB
SIGMA2_W = 10 ** (-9.6) / 1000.0
GAMMA_TH = 10**3.6


@pytest.fixture
def radio():
    return RadioConfig.from_db(power_w=2.0)


@pytest.fixture
def radio_15():
    return RadioConfig.from_db(power_w=1.5)


@pytest.fixture
def panel():
    return RisPanel(25, 25, 0.04, 0.04)


@pytest.fixture
def site():
    return SiteGeometry(H_B=35.0, H_U=1.5, H_R=2.0, D_h=100.0, psi=math.pi / 2)


@pytest.fixture
def solver():
    return SolverConfig()


def direct_radius(radio: RadioConfig, H_B=35.0, H_U=1.5) -> float:
    eta_D = radio.P / radio.sigma2 * radio.wavelength**2 * radio.G / (4 * math.pi) ** 2
    return math.sqrt(eta_D / radio.gamma_th - (H_B - H_U) ** 2)
