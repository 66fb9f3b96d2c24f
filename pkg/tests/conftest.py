import pytest

from etpa.molecule import MoleculeParams, SampleParams
from etpa.pdc import PdcParams


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long reproduction runs (deselect with -m 'not slow')")


@pytest.fixture
def pdc_params():
    return PdcParams(omega_p=100.0, bandwidth_m=10.0)


@pytest.fixture
def resonant_molecule():
    return MoleculeParams(omega_fg=100.0, gamma_fg=1.0)


@pytest.fixture
def sample():
    return SampleParams(m_0=2.0, delta_z=0.5)
