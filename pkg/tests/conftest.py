import numpy as np
import pytest

from triagelab.domain import (
    ArrivalProcess,
    DevClass,
    ScenarioProfile,
    ScheduleProcess,
)


def make_profile(**overrides) -> ScenarioProfile:
    """A small two-class / two-type world used across the unit tests."""
    defaults = dict(
        n_bug_types=2,
        dev_classes=(
            DevClass(cost=(2.0, 5.0), count=1, name="alpha"),
            DevClass(cost=(6.0, 3.0), count=1, name="beta"),
        ),
        horizon=10,
        deadline_cap=3,
        arrival_process=ArrivalProcess(
            kind="histogram",
            per_type=(((0, 0.5), (1, 0.5)), ((0, 0.75), (1, 0.25))),
        ),
        schedule_process=ScheduleProcess(change_prob=0.0),
        rejection_prob=0.0,
        discount=0.99,
    )
    defaults.update(overrides)
    profile = ScenarioProfile(**defaults)
    profile.validate()
    return profile


@pytest.fixture
def profile():
    return make_profile()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
