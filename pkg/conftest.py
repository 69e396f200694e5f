import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from config import AppConfig, Architecture, ScenarioConfig, SimParams
from models import Gnb, GnbKind, Scenario, Usage, User, sar_for_usage
from scenario import ground_station_grid

settings.register_profile("fast", max_examples=25, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


def build_scenario(
    users_xy,
    *,
    params: SimParams = None,
    usages=None,
    rate_ul: float = 50e6,
    rate_dl: float = 100e6,
    bystanders_xy=(),
    tuav_points=(),
    tuav_capacity: int = 6,
    bs_capacity: int = None,
    architecture: Architecture = Architecture.GREEN_TUAV,
    n_gs: int = 9,
    kind: GnbKind = GnbKind.TUAV,
) -> Scenario:
    """Hand-placed scenario: active users first, then inactive bystanders."""
    params = SimParams() if params is None else params
    usages = [Usage.DATA] * len(users_xy) if usages is None else usages
    residents = []
    for i, ((x, y), usage) in enumerate(zip(users_xy, usages)):
        rate = rate_ul if usage is Usage.DATA else 5e6
        residents.append(User(i, (float(x), float(y), 0.0), usage, True, rate, rate_dl, sar_for_usage(usage, params)))
    for j, (x, y) in enumerate(bystanders_xy, start=len(residents)):
        residents.append(User(j, (float(x), float(y), 0.0), Usage.DATA, False, 0.0, 0.0, params.sar_data))
    bs_capacity = len(residents) if bs_capacity is None else bs_capacity
    gnbs = [Gnb(0, GnbKind.BASE_STATION, (params.area_x / 2, params.area_y / 2, params.h_bs), bs_capacity)]
    for m, point in enumerate(tuav_points, start=1):
        gnbs.append(Gnb(m, kind, tuple(float(v) for v in point), tuav_capacity))
    return Scenario(
        params=params,
        residents=tuple(residents),
        gnbs=tuple(gnbs),
        ground_stations=ground_station_grid(n_gs, params),
        architecture=architecture,
        seed=0,
    )


@pytest.fixture
def params() -> SimParams:
    return SimParams()


@pytest.fixture
def make_scenario():
    return build_scenario


@pytest.fixture
def small_config() -> AppConfig:
    """A quick instance family: 2 tUAVs over 9 GSs, a handful of data users."""
    return AppConfig(
        scenario=ScenarioConfig(n_residents=40, active_count=6, voice_fraction=0.0, n_tuavs=2, n_gs=9),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
