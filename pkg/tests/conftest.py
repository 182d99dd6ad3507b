import numpy as np
import pytest

from opacavity import CavityParams, Drive


@pytest.fixture
def params():
    """Stock cavity: mirrors 0.2%/3.3%, internal loss 0.74%, geometric tau."""
    return CavityParams.default()


@pytest.fixture
def unit_tau_params():
    """Same losses with tau = 1 s, so detunings are tau*delta directly."""
    return CavityParams(tau_seconds=1.0)


@pytest.fixture
def gamma(params):
    return params.rates.gamma


def drive(r=0.0, phi=0.0, a_in=1.0, omega=0.0):
    return Drive(
        pump_ratio=r,
        seed_amplitude=a_in,
        seed_phase_rad=phi,
        pump_offset_rad_per_s=omega,
    )


@pytest.fixture(name="make_drive")
def _make_drive():
    return drive


def tau_delta_grid(gamma, span=10.0, n=21):
    """Symmetric tau*delta grid covering span*gamma on each side."""
    return np.linspace(-span * gamma, span * gamma, n)
