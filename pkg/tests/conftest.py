"""Shared fixtures and hypothesis defaults."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from orchardrl.hydrology import derive_levels, testbed_profile

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def levels():
    return derive_levels(testbed_profile())


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
