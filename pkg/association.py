"""User-to-gNB association under per-gNB resource-block capacities.

The greedy rule first gives every user its cheapest gNB, then repairs
overloaded gNBs by repeatedly moving the (user, gNB) pair with the smallest
cost increment into a gNB that still has free resource blocks. Costs are the
per-user UL exposure SAR*P (min-exposure), minus the UL rate (max-rate), or the
DL link power when planning downlink-only nodes.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from channel import path_loss_matrix, ul_rate
from config import EmfNetError, Objective, SimParams
from exposure import PowerPolicy, allocate_powers, dl_link_power
from models import Scenario, UserArrays

logger = logging.getLogger(__name__)

ENUMERATION_CHUNK = 1 << 16


class AssociationError(EmfNetError):
    """No association satisfies the capacity constraints"""


class BudgetExceededError(EmfNetError):
    """Exhaustive search larger than the configured enumeration budget"""
    def __init__(self, what: str, size: float, budget: float):
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: {size:.3g} candidates exceed the enumeration budget of {budget:.3g}")


@dataclass(frozen=True)
class CostModel:
    """Per-link cost of serving user k from gNB j; lower is better."""

    objective: Objective
    policy: PowerPolicy
    params: SimParams
    downlink: bool = False

    def matrix(self, users: UserArrays, gnb_positions: np.ndarray) -> np.ndarray:
        loss = path_loss_matrix(users.positions, gnb_positions, self.params)
        if self.downlink:
            return dl_link_power(users.rate_dl[:, None], loss, self.params)
        power = allocate_powers(users.sar_ul[:, None], users.rate_ul[:, None], loss, self.policy, self.params)
        if self.objective is Objective.MIN_EXPOSURE:
            return users.sar_ul[:, None] * power
        return -ul_rate(power, loss, self.params)

    def at_point(self, users: UserArrays, point: np.ndarray) -> float:
        """Total cost of the given users when all are served from one position."""
        if len(users) == 0:
            return 0.0
        return float(np.sum(self.matrix(users, np.asarray(point, dtype=float).reshape(1, 3))))


@dataclass(frozen=True, eq=False)
class Association:
    serving: np.ndarray
    load: np.ndarray
    per_link_cost: np.ndarray
    tuav_gain: np.ndarray
    gnb_positions: np.ndarray
    capacities: np.ndarray

    @property
    def user_costs(self) -> np.ndarray:
        return self.per_link_cost[np.arange(len(self.serving)), self.serving]

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.user_costs))

    def users_of(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serving == j)

    def validate(self) -> None:
        """Check that every user has one server and no gNB exceeds its capacity.

        Raises:
            AssociationError: On any violation.
        """
        n_gnbs = len(self.capacities)
        if np.any(self.serving < 0) or np.any(self.serving >= n_gnbs):
            raise AssociationError("a user is served by a non-existent gNB")
        load = np.bincount(self.serving, minlength=n_gnbs)
        if not np.array_equal(load, self.load):
            raise AssociationError("recorded loads disagree with the serving map")
        over = np.flatnonzero(load > self.capacities)
        if len(over):
            raise AssociationError(f"gNBs {over.tolist()} exceed their resource blocks")


def _build(serving: np.ndarray, costs: np.ndarray, capacities: np.ndarray, gnb_positions: np.ndarray) -> Association:
    n_gnbs = costs.shape[1]
    gains = np.zeros(max(n_gnbs - 1, 0))
    for j in range(1, n_gnbs):
        members = serving == j
        gains[j - 1] = float(np.sum(costs[members, 0] - costs[members, j]))
    assoc = Association(
        serving=serving,
        load=np.bincount(serving, minlength=n_gnbs),
        per_link_cost=costs,
        tuav_gain=gains,
        gnb_positions=np.asarray(gnb_positions, dtype=float).reshape(-1, 3),
        capacities=np.asarray(capacities, dtype=int),
    )
    assoc.validate()
    return assoc


def associate_costs(costs: np.ndarray, capacities) -> np.ndarray:
    """Two-stage greedy association on a (users x gNBs) cost matrix.

    Returns:
        Serving gNB index per user.

    Raises:
        AssociationError: If the total capacity is below the number of users.
    """
    costs = np.asarray(costs, dtype=float)
    capacities = np.asarray(capacities, dtype=int)
    n_users, n_gnbs = costs.shape
    if capacities.sum() < n_users:
        raise AssociationError(f"{n_users} users but only {capacities.sum()} resource blocks in total")
    if n_users == 0:
        return np.zeros(0, dtype=int)

    serving = np.argmin(costs, axis=1)
    load = np.bincount(serving, minlength=n_gnbs)
    rows = np.arange(n_users)
    moves = 0
    while np.any(load > capacities):
        movable = (load > capacities)[serving]
        open_gnbs = load < capacities
        increment = costs - costs[rows, serving][:, None]
        masked = np.where(movable[:, None] & open_gnbs[None, :], increment, np.inf)
        k, j = divmod(int(np.argmin(masked)), n_gnbs)
        if not np.isfinite(masked[k, j]):
            raise AssociationError("overloaded gNB but no gNB with free resource blocks")
        load[serving[k]] -= 1
        serving[k] = j
        load[j] += 1
        moves += 1
    logger.debug(f"Greedy association: {n_users} users, {moves} repair moves")
    return serving


def assign(
    scenario: Scenario,
    gnb_positions: np.ndarray,
    serving,
    objective: Objective,
    policy: PowerPolicy,
    *,
    capacities: Optional[np.ndarray] = None,
    users: Optional[UserArrays] = None,
    downlink: bool = False,
) -> Association:
    """Re-cost a fixed serving map at new gNB positions."""
    users = scenario.active if users is None else users
    capacities = scenario.capacities if capacities is None else np.asarray(capacities, dtype=int)
    costs = CostModel(objective, policy, scenario.params, downlink).matrix(users, gnb_positions)
    return _build(np.asarray(serving, dtype=int).copy(), costs, capacities, gnb_positions)


def greedy_associate(
    scenario: Scenario,
    gnb_positions: np.ndarray,
    objective: Objective,
    policy: PowerPolicy,
    *,
    capacities: Optional[np.ndarray] = None,
    users: Optional[UserArrays] = None,
    downlink: bool = False,
) -> Association:
    """Associate active users with gNBs (index 0 = BS) at the given positions.

    Args:
        scenario: Scenario providing users, parameters and default capacities.
        gnb_positions: (J, 3) positions, BS first.
        objective: Cost used for the association.
        policy: Transmit power rule.
        capacities: Per-gNB resource blocks; defaults to the scenario's gNBs.
        users: Users to associate; defaults to the scenario's active users.
        downlink: Use DL link power as the cost.

    Returns:
        Association: Feasible association with per-tUAV gains.
    """
    users = scenario.active if users is None else users
    capacities = scenario.capacities if capacities is None else np.asarray(capacities, dtype=int)
    if len(capacities) != len(gnb_positions):
        raise AssociationError(f"{len(gnb_positions)} gNB positions but {len(capacities)} capacities")
    costs = CostModel(objective, policy, scenario.params, downlink).matrix(users, gnb_positions)
    return _build(associate_costs(costs, capacities), costs, capacities, gnb_positions)


def random_associate(
    scenario: Scenario,
    gnb_positions: np.ndarray,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    *,
    capacities: Optional[np.ndarray] = None,
    users: Optional[UserArrays] = None,
    downlink: bool = False,
) -> Association:
    """Baseline: each user in turn joins a uniformly drawn gNB that still has free resource blocks."""
    users = scenario.active if users is None else users
    capacities = scenario.capacities if capacities is None else np.asarray(capacities, dtype=int)
    if capacities.sum() < len(users):
        raise AssociationError(f"{len(users)} users but only {capacities.sum()} resource blocks in total")
    costs = CostModel(objective, policy, scenario.params, downlink).matrix(users, gnb_positions)
    load = np.zeros(len(capacities), dtype=int)
    serving = np.zeros(len(users), dtype=int)
    for k in range(len(users)):
        j = int(rng.choice(np.flatnonzero(load < capacities)))
        serving[k] = j
        load[j] += 1
    return _build(serving, costs, capacities, gnb_positions)


def enumerate_best_association(costs: np.ndarray, capacities, budget: float) -> np.ndarray:
    """Globally optimal feasible association by exhaustive enumeration of all J^K maps.

    Ties keep the lexicographically first assignment.

    Raises:
        BudgetExceededError: If J^K exceeds `budget`.
        AssociationError: If no assignment is feasible.
    """
    costs = np.asarray(costs, dtype=float)
    capacities = np.asarray(capacities, dtype=int)
    n_users, n_gnbs = costs.shape
    size = n_gnbs ** n_users
    if size > budget:
        raise BudgetExceededError("brute-force association", size, budget)
    if n_users == 0:
        return np.zeros(0, dtype=int)

    place = n_gnbs ** np.arange(n_users - 1, -1, -1, dtype=np.int64)
    rows = np.arange(n_users)
    best_value, best = np.inf, None
    for start in range(0, size, ENUMERATION_CHUNK):
        index = np.arange(start, min(start + ENUMERATION_CHUNK, size), dtype=np.int64)
        digits = (index[:, None] // place[None, :]) % n_gnbs
        loads = np.stack([(digits == j).sum(axis=1) for j in range(n_gnbs)], axis=1)
        values = costs[rows[None, :], digits].sum(axis=1)
        values = np.where(np.all(loads <= capacities, axis=1), values, np.inf)
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value, best = values[i], digits[i].astype(int)
    if best is None:
        raise AssociationError("no assignment satisfies the capacities")
    return best


def brute_force_associate(
    scenario: Scenario,
    gnb_positions: np.ndarray,
    objective: Objective,
    policy: PowerPolicy,
    *,
    capacities: Optional[np.ndarray] = None,
    users: Optional[UserArrays] = None,
    downlink: bool = False,
) -> Association:
    """Exhaustive oracle for greedy_associate."""
    users = scenario.active if users is None else users
    capacities = scenario.capacities if capacities is None else np.asarray(capacities, dtype=int)
    costs = CostModel(objective, policy, scenario.params, downlink).matrix(users, gnb_positions)
    serving = enumerate_best_association(costs, capacities, scenario.params.enum_budget)
    return _build(serving, costs, capacities, gnb_positions)
