import os
import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture(scope="session")
def arma11_series():
    from uwarma import ModelSpec, ParamVector, simulate

    spec = ModelSpec(p=1, q=1, rho=0.5)
    gamma = ParamVector(alpha=0.0, phi=[0.6], theta=[0.4], lam=5.0)
    return spec, gamma, simulate(spec, gamma, 1000, seed=11)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)
