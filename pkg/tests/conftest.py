import numpy as np
import pytest

from benneylab.waves import make_wave

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def wave_q1():
    """omega=-2.5, c=2, beta=0 on L=2pi: sigma=1.5, q=1, E2 well away from 0."""
    return make_wave(-2.5, 2.0, 0.0, TWO_PI)


@pytest.fixture(scope="session")
def wave_q1_focusing():
    return make_wave(-2.5, 2.0, -0.5, TWO_PI)


@pytest.fixture(scope="session")
def wave_moderate():
    return make_wave(-3.0, 1.0, 0.0, TWO_PI)
