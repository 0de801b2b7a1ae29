import numpy as np
import pytest

from orthospec.fuchsian import builtin_bolza, geodesic_frame, ortho_spectrum, pair_cosets


@pytest.fixture(scope="session")
def bolza():
    return builtin_bolza()


@pytest.fixture(scope="session")
def systole(bolza):
    return geodesic_frame(bolza, [1])


@pytest.fixture(scope="session")
def spec60(bolza, systole):
    return ortho_spectrum(bolza, systole, 60.0)


@pytest.fixture(scope="session")
def spec500(bolza, systole):
    return ortho_spectrum(bolza, systole, 500.0)


@pytest.fixture(scope="session")
def spec3000(bolza, systole):
    return ortho_spectrum(bolza, systole, 3000.0)


@pytest.fixture(scope="session")
def crossing_pair(bolza, systole):
    # the axes of g_1 and g_2 both pass through i at an angle of pi/4
    return pair_cosets(bolza, systole, [2], 60.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
