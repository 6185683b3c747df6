import numpy as np
import pytest

import flatheat as fh


@pytest.fixture(scope="session")
def step_profile():
    return fh.StepProfile()


@pytest.fixture(scope="session")
def step_planner(step_profile):
    """The reference experiment: s=1.6, tau=0.3, R'=0.2, T=0.5, defaults."""
    return fh.FlatnessPlanner().fit(step_profile)


@pytest.fixture(scope="session")
def mode_planner():
    return fh.FlatnessPlanner().fit(fh.SingleModeProfile(1))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
