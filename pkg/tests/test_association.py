import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from association import (
    Association,
    AssociationError,
    BudgetExceededError,
    CostModel,
    assign,
    associate_costs,
    brute_force_associate,
    enumerate_best_association,
    greedy_associate,
    random_associate,
)
from config import Objective, SimParams
from exposure import PowerPolicy

PRIMAL = PowerPolicy.primal()


def test_repair_moves_cheapest_increment():
    costs = np.array([[5.0, 1.0], [4.0, 2.0]])
    serving = associate_costs(costs, [2, 1])
    assert serving.tolist() == [1, 0]
    assert costs[[0, 1], serving].sum() == 5.0


def test_oracle_agrees_on_two_user_instance():
    costs = np.array([[5.0, 1.0], [4.0, 2.0]])
    serving = enumerate_best_association(costs, [2, 1], budget=1e7)
    assert costs[[0, 1], serving].sum() == 5.0


def test_no_repair_when_capacity_suffices():
    costs = np.array([[3.0, 1.0, 2.0], [1.0, 4.0, 0.5], [2.0, 0.1, 3.0]])
    assert associate_costs(costs, [3, 3, 3]).tolist() == [1, 2, 1]


def test_ties_go_to_lowest_gnb():
    assert associate_costs(np.array([[1.0, 1.0, 1.0]]), [1, 1, 1]).tolist() == [0]


def test_insufficient_capacity_is_infeasible():
    with pytest.raises(AssociationError):
        associate_costs(np.ones((3, 2)), [1, 1])


@st.composite
def instances(draw):
    n_users = draw(st.integers(min_value=1, max_value=6))
    n_gnbs = draw(st.integers(min_value=1, max_value=4))
    costs = draw(arrays(np.float64, (n_users, n_gnbs), elements=st.floats(min_value=0.0, max_value=10.0)))
    caps = draw(st.lists(st.integers(min_value=0, max_value=n_users), min_size=n_gnbs, max_size=n_gnbs))
    caps[0] = max(caps[0], n_users - sum(caps[1:]))
    return costs, np.array(caps)


@given(instances())
def test_greedy_is_feasible_and_oracle_is_no_worse(instance):
    costs, caps = instance
    rows = np.arange(len(costs))
    greedy = associate_costs(costs, caps)
    oracle = enumerate_best_association(costs, caps, budget=1e7)
    assert np.all(np.bincount(greedy, minlength=len(caps)) <= caps)
    assert np.all(np.bincount(oracle, minlength=len(caps)) <= caps)
    assert costs[rows, oracle].sum() <= costs[rows, greedy].sum() + 1e-12


def test_enumeration_budget_guard():
    with pytest.raises(BudgetExceededError) as exc:
        enumerate_best_association(np.ones((10, 5)), [10] * 5, budget=1e6)
    assert exc.value.size == 5 ** 10
    assert exc.value.budget == 1e6


def _tuav_scenario(make_scenario):
    users = [(150.0, 150.0), (170.0, 140.0), (820.0, 830.0), (500.0, 480.0)]
    tuavs = [(160.0, 160.0, 80.0), (830.0, 830.0, 80.0)]
    return make_scenario(users, tuav_points=tuavs, tuav_capacity=1)


def test_greedy_on_scenario(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    assoc = greedy_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL)
    assoc.validate()
    assert assoc.load.tolist() == [2, 1, 1]
    assert assoc.serving[2] == 2
    for j in (1, 2):
        members = assoc.users_of(j)
        expected = np.sum(assoc.per_link_cost[members, 0] - assoc.per_link_cost[members, j])
        assert assoc.tuav_gain[j - 1] == pytest.approx(expected)
        assert assoc.tuav_gain[j - 1] > 0


def test_bs_only_has_no_gains(make_scenario):
    scenario = make_scenario([(100.0, 100.0), (900.0, 900.0)])
    assoc = greedy_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL)
    assert assoc.serving.tolist() == [0, 0]
    assert assoc.tuav_gain.size == 0


def test_greedy_matches_oracle_on_scenario(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    greedy = greedy_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL)
    oracle = brute_force_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL)
    assert oracle.total_cost <= greedy.total_cost + 1e-15
    assert oracle.total_cost == pytest.approx(greedy.total_cost, rel=0.02)


def test_max_rate_costs_are_negative_rates(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    model = CostModel(Objective.MAX_RATE, PowerPolicy.dual(1e-3), scenario.params)
    costs = model.matrix(scenario.active, scenario.gnb_positions)
    assert np.all(costs < 0)
    assoc = greedy_associate(scenario, scenario.gnb_positions, Objective.MAX_RATE, PowerPolicy.dual(1e-3))
    assert np.all(assoc.tuav_gain >= 0)


def test_downlink_costs_are_link_powers(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    costs = CostModel(Objective.MIN_EXPOSURE, PRIMAL, scenario.params, downlink=True).matrix(
        scenario.active, scenario.gnb_positions
    )
    assert costs.shape == (4, 3)
    assert np.all(costs > 0)


def test_random_association_is_feasible_and_seeded(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    a = random_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL, np.random.default_rng(5))
    b = random_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL, np.random.default_rng(5))
    a.validate()
    np.testing.assert_array_equal(a.serving, b.serving)


def test_assign_keeps_serving_map(make_scenario):
    scenario = _tuav_scenario(make_scenario)
    moved = scenario.gnb_positions.copy()
    moved[1, 2] = 100.0
    assoc = assign(scenario, moved, [1, 0, 2, 0], Objective.MIN_EXPOSURE, PRIMAL)
    assert assoc.serving.tolist() == [1, 0, 2, 0]
    np.testing.assert_array_equal(assoc.gnb_positions, moved)


def test_validate_flags_overload():
    assoc = Association(
        serving=np.array([1, 1]),
        load=np.array([0, 2]),
        per_link_cost=np.ones((2, 2)),
        tuav_gain=np.zeros(1),
        gnb_positions=np.zeros((2, 3)),
        capacities=np.array([2, 1]),
    )
    with pytest.raises(AssociationError, match="exceed"):
        assoc.validate()


def test_brute_force_respects_budget(make_scenario):
    scenario = make_scenario(
        [(100.0 * k, 100.0, ) for k in range(1, 9)],
        params=SimParams(enum_budget=100.0),
        tuav_points=[(160.0, 160.0, 80.0)],
    )
    with pytest.raises(BudgetExceededError):
        brute_force_associate(scenario, scenario.gnb_positions, Objective.MIN_EXPOSURE, PRIMAL)
