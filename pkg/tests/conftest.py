import numpy as np
import pytest

import sdebridge as sb

from helpers import make_ou_model


@pytest.fixture(scope="session")
def ou_model():
    return make_ou_model()


@pytest.fixture(scope="session")
def linear3d():
    return sb.get_model("linear3d")


@pytest.fixture(scope="session")
def trig2d():
    return sb.get_model("trig2d")


@pytest.fixture(scope="session")
def linear3d_path(linear3d):
    model = linear3d
    return sb.euler_simulate(model, model.reference_theta, np.ones(3), 400,
                             sb.high_freq_grid(400), sb.RngSpec(2024, 0))
