import numpy as np
import pytest

from critfield.models import cauchy_model, gaussian_model


@pytest.fixture(scope="session")
def gauss2():
    return gaussian_model(2)


@pytest.fixture(scope="session")
def gauss3():
    return gaussian_model(3)


@pytest.fixture(scope="session")
def gauss4():
    return gaussian_model(4)


@pytest.fixture(scope="session")
def cauchy3():
    return cauchy_model(3, ell=1.0, nu=2.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
