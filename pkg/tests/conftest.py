import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from abelint.bifurcation import classify
from abelint.hamiltonian import ParameterPoint, build_normal_form

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def exceptional_real():
    p = ParameterPoint.real(0.5, 0.25)
    return p, build_normal_form(p), classify(p).annulus("O1")


@pytest.fixture(scope="session")
def exceptional_complex():
    p = ParameterPoint.complex(-1 + 0.5j)
    return p, build_normal_form(p), classify(p).annulus("O1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
