import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from association import greedy_associate
from channel import LinkGeometry, avg_path_loss
from config import Architecture, EmfNetError, Objective, SimParams, noise_power
from exposure import (
    PowerPolicy,
    allocate_power,
    allocate_powers,
    dl_link_power,
    effective_aperture,
    exposure_index_dl,
    exposure_index_ul,
    satisfied_ratio,
)
from models import Usage, User

PARAMS = SimParams()


def _user(usage: Usage, rate: float = 50e6) -> User:
    sar = PARAMS.sar_voice if usage is Usage.VOICE else PARAMS.sar_data
    return User(0, (0.0, 0.0, 0.0), usage, True, rate, 100e6, sar)


def test_primal_meets_rate_target():
    power = allocate_power(_user(Usage.DATA), 1e10, PowerPolicy.primal(), PARAMS)
    assert power == pytest.approx(1.241e-2, rel=1e-3)


def test_primal_clamps_at_p_max():
    assert allocate_power(_user(Usage.DATA), 1e14, PowerPolicy.primal(), PARAMS) == PARAMS.p_max


def test_dual_reference_powers():
    policy = PowerPolicy.dual(0.0016)
    assert allocate_power(_user(Usage.DATA), 1e10, policy, PARAMS) == PARAMS.p_max
    assert allocate_power(_user(Usage.VOICE), 1e10, policy, PARAMS) == pytest.approx(0.0016 / 0.0047, rel=1e-12)


@given(
    st.floats(min_value=1e-9, max_value=1.0),
    st.floats(min_value=1e-4, max_value=1e-1),
)
def test_dual_never_exceeds_sar_limit(limit, sar):
    power = allocate_powers(np.array([sar]), np.array([0.0]), np.array([1e10]), PowerPolicy.dual(limit), PARAMS)
    assert sar * power[0] <= limit
    assert 0.0 <= power[0] <= PARAMS.p_max


def test_dual_policy_needs_positive_limit():
    with pytest.raises(EmfNetError):
        PowerPolicy.dual(0.0)


def test_powers_broadcast_over_gnbs():
    L = np.array([[1e10, 1e14], [2e10, 3e10]])
    powers = allocate_powers(
        np.array([[PARAMS.sar_data], [PARAMS.sar_voice]]),
        np.array([[50e6], [5e6]]),
        L,
        PowerPolicy.primal(),
        PARAMS,
    )
    assert powers.shape == (2, 2)
    assert powers[0, 1] == PARAMS.p_max


def _bs_assoc(scenario):
    return greedy_associate(scenario, scenario.bs_position[None, :], Objective.MIN_EXPOSURE, PowerPolicy.primal(),
                            capacities=scenario.capacities[:1])


def test_ul_index_reference_values(make_scenario):
    one = make_scenario([(100.0, 100.0)], architecture=Architecture.BS_ONLY)
    assert exposure_index_ul(_bs_assoc(one), [0.1], one.active) == pytest.approx(3.7e-4)
    assert exposure_index_ul(_bs_assoc(one), [0.0], one.active) == 0.0

    two = make_scenario([(100.0, 100.0), (200.0, 100.0)], usages=[Usage.VOICE, Usage.DATA])
    assert exposure_index_ul(_bs_assoc(two), [0.1, 0.2], two.active) == pytest.approx(1.21e-3)


def test_ul_index_needs_one_power_per_user(make_scenario):
    scenario = make_scenario([(100.0, 100.0), (200.0, 100.0)])
    with pytest.raises(EmfNetError):
        exposure_index_ul(_bs_assoc(scenario), [0.1], scenario.active)


def test_dl_index_without_users_is_zero(make_scenario):
    scenario = make_scenario([], bystanders_xy=[(10.0, 10.0)])
    assert exposure_index_dl(scenario, _bs_assoc(scenario), PARAMS) == 0.0


def test_dl_index_matches_scalar_oracle(make_scenario):
    scenario = make_scenario([(300.0, 400.0)], bystanders_xy=[(700.0, 100.0)])
    assoc = _bs_assoc(scenario)
    bs = scenario.bs_position
    user_loss = avg_path_loss(LinkGeometry.between((300.0, 400.0, 0.0), bs), PARAMS)
    bystander_loss = avg_path_loss(LinkGeometry.between((700.0, 100.0, 0.0), bs), PARAMS)
    power = noise_power(PARAMS) * user_loss * (2.0 ** (100e6 / PARAMS.bandwidth_B) - 1.0)
    aperture = PARAMS.c ** 2 / (4 * np.pi * PARAMS.fc ** 2)
    expected = PARAMS.sar_dl * (power / user_loss + power / bystander_loss) / aperture
    assert exposure_index_dl(scenario, assoc, PARAMS) == pytest.approx(expected, rel=1e-12)
    assert effective_aperture(PARAMS) == pytest.approx(aperture)
    assert dl_link_power(100e6, user_loss, PARAMS) == pytest.approx(power, rel=1e-12)


def test_dl_index_linear_in_sar_dl(make_scenario):
    scenario = make_scenario([(300.0, 400.0), (600.0, 650.0)], bystanders_xy=[(700.0, 100.0)])
    doubled = SimParams(sar_dl=2 * PARAMS.sar_dl)
    assoc = _bs_assoc(scenario)
    assert exposure_index_dl(scenario, assoc, doubled) == pytest.approx(2 * exposure_index_dl(scenario, assoc, PARAMS))


def test_satisfied_ratio_counts():
    assert satisfied_ratio([5, 5], [5, 5]) == 1.0
    assert satisfied_ratio([1, 1], [5, 5]) == 0.0
    assert satisfied_ratio([10, 10, 10, 1], [10, 10, 9.5, 5]) == 0.75
    # one bps of slack absorbs round-off in the rate inversion
    assert satisfied_ratio([49_999_999.5], [50e6]) == 1.0


def test_satisfied_ratio_errors():
    with pytest.raises(EmfNetError):
        satisfied_ratio([], [])
    with pytest.raises(EmfNetError):
        satisfied_ratio([1.0], [1.0, 2.0])


def test_ul_index_adds_over_disjoint_users(make_scenario):
    xy = [(100.0, 100.0), (200.0, 100.0), (800.0, 650.0)]
    usages = [Usage.VOICE, Usage.DATA, Usage.DATA]
    powers = [0.05, 0.2, 0.011]
    left = make_scenario(xy[:2], usages=usages[:2])
    right = make_scenario(xy[2:], usages=usages[2:])
    both = make_scenario(xy, usages=usages)
    total = exposure_index_ul(_bs_assoc(both), powers, both.active)
    parts = exposure_index_ul(_bs_assoc(left), powers[:2], left.active) + exposure_index_ul(
        _bs_assoc(right), powers[2:], right.active
    )
    assert total == pytest.approx(parts, rel=1e-12)
