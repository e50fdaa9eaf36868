import numpy as np
import pytest

from kkcausal.catalog import catalog_get
from kkcausal.hilbert import spectrum_from_signal
from kkcausal.spectra import FrequencyGrid


@pytest.fixture(scope="session")
def grid_4096():
    return FrequencyGrid(-50.0, 50.0, 4096)


@pytest.fixture(scope="session")
def exp_spectrum(grid_4096):
    return spectrum_from_signal(catalog_get("exp-decay"), grid_4096)


@pytest.fixture(scope="session")
def dosc_spectrum(grid_4096):
    return spectrum_from_signal(catalog_get("damped-oscillator"), grid_4096)


def rel_l2(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b))
