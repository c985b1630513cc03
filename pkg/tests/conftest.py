"""
Shared fixtures.

SPMD programs used by the suites are module-level functions so they can
be shipped to workers under any multiprocessing start method.
"""

import numpy as np
import pytest

from pargrid.config.settings import Settings


@pytest.fixture
def settings() -> Settings:
    """Short timeouts so a hung collective fails the test instead of the run."""

    return Settings(timeout_s=20.0, grace_period_s=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(params=["inproc", pytest.param("socket", marks=pytest.mark.socket)])
def backend(request) -> str:
    return request.param
