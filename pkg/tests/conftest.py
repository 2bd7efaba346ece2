import warnings

import pytest
from hypothesis import HealthCheck, settings

from cuspdet.errors import IncompleteCutoff
from cuspdet.fuchsian import builtin_group, enumerate_spectrum

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def _enumerate(name, L, w):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteCutoff)
        return enumerate_spectrum(builtin_group(name), L, w)


@pytest.fixture(scope="session")
def torus_l10():
    return _enumerate("modular_torus", 10.0, 14)


@pytest.fixture(scope="session")
def torus_l12():
    return _enumerate("modular_torus", 12.0, 14)


@pytest.fixture(scope="session")
def torus_spectra(torus_l10):
    return {L: torus_l10.restrict(float(L)) for L in (6, 8, 10)}


@pytest.fixture(scope="session")
def gamma2_l6():
    return _enumerate("gamma2", 6.0, 12)
