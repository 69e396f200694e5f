"""tUAV-to-ground-station deployment: weighted K-means, 2D shrink-and-realign, baselines and an exhaustive oracle.

During the search every tUAV sits at the hover altitude of a vertical
half-length tether (h_gs + t_max/2) above a free 2D point; at the end each tUAV
is attached to the nearest unoccupied GS (then, with gs_polish, moved to a free GS
while that lowers the cost) and the users are re-associated with the tUAVs at
their GS-centred default placements.

Objective traces record the association cost (EI for min-exposure, minus the
sum rate for max-rate), so lower is always better.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, permutations
from typing import Optional

import numpy as np

from association import Association, BudgetExceededError, CostModel, associate_costs, greedy_associate
from config import EmfNetError, Objective, SimParams
from exposure import PowerPolicy
from geometry import default_placement, from_spherical
from models import Scenario, even_grid

logger = logging.getLogger(__name__)


class DeploymentError(EmfNetError):
    """More tUAVs than ground stations"""


class BaselineMode(str, Enum):
    RANDOM_GS = "random"
    UNIFORM_GRID = "grid"


@dataclass(frozen=True, eq=False)
class DeploymentResult:
    """Where the serving nodes ended up and the association they produce.

    gs_assignment holds -1 for nodes that are not tethered (fixed small cells).
    """

    gs_assignment: np.ndarray
    tuav_xy: np.ndarray
    positions: np.ndarray
    assoc: Association
    objective_trace: tuple[float, ...] = ()

    @property
    def objective(self) -> float:
        return self.assoc.total_cost

    def validate(self, n_gs: int) -> None:
        tethered = self.gs_assignment[self.gs_assignment >= 0]
        if np.any(tethered >= n_gs):
            raise DeploymentError(f"GS index out of range for {n_gs} ground stations")
        if len(np.unique(tethered)) != len(tethered):
            raise DeploymentError("a ground station hosts more than one tUAV")


def hover_points(ground_stations: np.ndarray, gs_assignment, params: SimParams) -> np.ndarray:
    """Default placement (vertical tether, T = t_max/2) above each assigned GS."""
    ground_stations = np.asarray(ground_stations, dtype=float).reshape(-1, 3)
    return np.array(
        [from_spherical(ground_stations[n], default_placement(int(n), params)) for n in gs_assignment],
        dtype=float,
    ).reshape(-1, 3)


def _lift(xy: np.ndarray, params: SimParams) -> np.ndarray:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return np.column_stack([xy, np.full(len(xy), params.hover_altitude)])


def _area_clip(xy: np.ndarray, params: SimParams) -> np.ndarray:
    return np.clip(xy, [0.0, 0.0], [params.area_x, params.area_y])


class _Associator:
    """Greedy association of the scenario's active users for candidate node positions."""

    def __init__(self, scenario: Scenario, objective: Objective, policy: PowerPolicy, downlink: bool):
        self.scenario = scenario
        self.objective = objective
        self.policy = policy
        self.downlink = downlink

    def __call__(self, points: np.ndarray) -> Association:
        gnb_positions = np.vstack([self.scenario.bs_position[None, :], np.asarray(points, dtype=float).reshape(-1, 3)])
        return greedy_associate(
            self.scenario,
            gnb_positions,
            self.objective,
            self.policy,
            capacities=self.scenario.capacities[: len(gnb_positions)],
            downlink=self.downlink,
        )


def _check_counts(scenario: Scenario) -> int:
    n_tuavs = scenario.n_tuavs
    if n_tuavs > len(scenario.ground_stations):
        raise DeploymentError(f"{n_tuavs} tUAVs but only {len(scenario.ground_stations)} ground stations")
    return n_tuavs


def _gs_cost_columns(scenario: Scenario, associate: _Associator) -> np.ndarray:
    """Costs with the BS in column 0 and a tUAV hovering over GS n in column n + 1."""
    everywhere = hover_points(scenario.ground_stations, range(len(scenario.ground_stations)), scenario.params)
    return CostModel(associate.objective, associate.policy, scenario.params, associate.downlink).matrix(
        scenario.active, np.vstack([scenario.bs_position[None, :], everywhere])
    )


def _subset_cost(costs: np.ndarray, gs_assignment: np.ndarray, capacities: np.ndarray) -> float:
    sub = costs[:, np.concatenate([[0], np.asarray(gs_assignment, dtype=int) + 1])]
    serving = associate_costs(sub, capacities)
    return float(np.sum(sub[np.arange(len(serving)), serving]))


def polish_gs_assignment(costs: np.ndarray, gs_assignment, capacities) -> np.ndarray:
    """Move single tUAVs to unoccupied GSs while that strictly lowers the association cost.

    Args:
        costs: (users x 1+N) matrix from the BS and a tUAV hovering over each GS.
        gs_assignment: Starting GS index per tUAV.
        capacities: Capacity of the BS followed by one entry per tUAV.

    Returns:
        The improved GS index per tUAV, still pairwise distinct.
    """
    best = np.asarray(gs_assignment, dtype=int).copy()
    capacities = np.asarray(capacities, dtype=int)
    best_cost = _subset_cost(costs, best, capacities)
    all_gs = np.arange(costs.shape[1] - 1)
    improved = True
    while improved:
        improved = False
        for m in range(len(best)):
            # GSs held by the other tUAVs stay fixed while tUAV m moves
            for n in np.setdiff1d(all_gs, np.delete(best, m)):
                if n == best[m]:
                    continue
                trial = best.copy()
                trial[m] = n
                cost = _subset_cost(costs, trial, capacities)
                if cost < best_cost:
                    best, best_cost, improved = trial, cost, True
    return best


def _finish(
    scenario: Scenario,
    associate: _Associator,
    xy: np.ndarray,
    trace: list[float],
) -> DeploymentResult:
    gs_assignment = attach_nearest_gs(xy, scenario.ground_stations)
    if scenario.params.gs_polish:
        nearest = gs_assignment
        gs_assignment = polish_gs_assignment(
            _gs_cost_columns(scenario, associate), nearest, scenario.capacities[: len(nearest) + 1]
        )
        if not np.array_equal(nearest, gs_assignment):
            logger.debug(f"GS polishing moved tUAVs from {nearest.tolist()} to {gs_assignment.tolist()}")
    positions = hover_points(scenario.ground_stations, gs_assignment, scenario.params)
    result = DeploymentResult(
        gs_assignment=gs_assignment,
        tuav_xy=np.asarray(xy, dtype=float).reshape(-1, 2),
        positions=positions,
        assoc=associate(positions),
        objective_trace=tuple(trace),
    )
    result.validate(len(scenario.ground_stations))
    logger.debug(f"Deployment on GSs {gs_assignment.tolist()}, cost {result.objective:.6g}")
    return result


def _bs_only(scenario: Scenario, associate: _Associator) -> DeploymentResult:
    assoc = associate(np.zeros((0, 3)))
    return DeploymentResult(
        gs_assignment=np.zeros(0, dtype=int),
        tuav_xy=np.zeros((0, 2)),
        positions=np.zeros((0, 3)),
        assoc=assoc,
        objective_trace=(assoc.total_cost,),
    )


def attach_nearest_gs(tuav_xy, ground_stations) -> np.ndarray:
    """Attach tUAVs in id order, each to the nearest GS not yet taken (ties to the lower GS index).

    Raises:
        DeploymentError: If there are more tUAVs than GSs.
    """
    tuav_xy = np.asarray(tuav_xy, dtype=float).reshape(-1, 2)
    stations = np.asarray(ground_stations, dtype=float).reshape(-1, 3)[:, :2]
    if len(tuav_xy) > len(stations):
        raise DeploymentError(f"{len(tuav_xy)} tUAVs but only {len(stations)} ground stations")
    free = np.ones(len(stations), dtype=bool)
    out = np.zeros(len(tuav_xy), dtype=int)
    for m, point in enumerate(tuav_xy):
        dist = np.hypot(stations[:, 0] - point[0], stations[:, 1] - point[1])
        dist[~free] = np.inf
        out[m] = int(np.argmin(dist))
        free[out[m]] = False
    return out


def _reseed_idle(assoc: Association, mid: np.ndarray, users_xy: np.ndarray) -> None:
    """Put memberless tUAVs on the users with the largest serving cost, one user per tUAV."""
    order = np.argsort(-assoc.user_costs, kind="stable")
    idle = [m for m in range(len(mid)) if len(assoc.users_of(m + 1)) == 0]
    for m, k in zip(idle, order):
        mid[m] = users_xy[k]


def deploy_kmeans(
    scenario: Scenario,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    *,
    downlink: bool = False,
) -> DeploymentResult:
    """Cost-weighted K-means over the tUAV 2D points.

    Each iteration moves every tUAV towards the barycenter of its users weighted
    by their link cost (exposure, or rate for max-rate), then keeps, per tUAV,
    whichever of the old point and the barycenter yields the larger gain. A tUAV
    with no users is re-seeded on the user with the largest serving cost.
    When the combined update would raise the total cost the moves are retried
    one tUAV at a time and only strict improvements are kept. The loop stops on
    a shift below tol_delta or after i_max iterations.
    """
    params = scenario.params
    associate = _Associator(scenario, objective, policy, downlink)
    n_tuavs = _check_counts(scenario)
    if n_tuavs == 0:
        return _bs_only(scenario, associate)

    users_xy = scenario.active.positions[:, :2]
    xy = rng.uniform([0.0, 0.0], [params.area_x, params.area_y], size=(n_tuavs, 2))
    assoc = associate(_lift(xy, params))
    trace = [assoc.total_cost]

    for i in range(params.i_max):
        mid = xy.copy()
        for m in range(n_tuavs):
            members = assoc.users_of(m + 1)
            weights = np.abs(assoc.per_link_cost[members, m + 1])
            if weights.sum() > 0:
                mid[m] = weights @ users_xy[members] / weights.sum()
        _reseed_idle(assoc, mid, users_xy)
        mid_assoc = associate(_lift(mid, params))

        keep = assoc.tuav_gain >= mid_assoc.tuav_gain
        new_xy = np.where(keep[:, None], xy, mid)
        new_assoc = mid_assoc if not keep.any() else associate(_lift(new_xy, params))
        if new_assoc.total_cost > assoc.total_cost:
            logger.debug(f"K-means iteration {i}: joint update raises the cost, moving tUAVs one at a time")
            new_xy, new_assoc = xy.copy(), assoc
            for m in np.flatnonzero(np.any(mid != xy, axis=1)):
                trial = new_xy.copy()
                trial[m] = mid[m]
                trial_assoc = associate(_lift(trial, params))
                if trial_assoc.total_cost < new_assoc.total_cost:
                    new_xy, new_assoc = trial, trial_assoc
        shift = float(np.max(np.hypot(*(new_xy - xy).T)))
        xy, assoc = new_xy, new_assoc
        trace.append(assoc.total_cost)
        if shift < params.tol_delta:
            break
    logger.debug(f"K-means converged after {len(trace) - 1} iterations, cost {trace[-1]:.6g}")
    return _finish(scenario, associate, xy, trace)


def deploy_sr2d(
    scenario: Scenario,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    *,
    downlink: bool = False,
) -> DeploymentResult:
    """2D shrink-and-realign: move tUAVs one by one to the best of sr_candidates_2d points on a circle."""
    params = scenario.params
    associate = _Associator(scenario, objective, policy, downlink)
    n_tuavs = _check_counts(scenario)
    if n_tuavs == 0:
        return _bs_only(scenario, associate)

    xy = rng.uniform([0.0, 0.0], [params.area_x, params.area_y], size=(n_tuavs, 2))
    best = associate(_lift(xy, params)).total_cost
    trace = [best]
    angles = 2.0 * math.pi * np.arange(params.sr_candidates_2d) / params.sr_candidates_2d
    ring = np.column_stack([np.cos(angles), np.sin(angles)])

    radius = params.sr_radius_init
    while radius >= params.sr_radius_min:
        for m in range(n_tuavs):
            candidates = _area_clip(xy[m] + radius * ring, params)
            move = None
            for candidate in candidates:
                trial = xy.copy()
                trial[m] = candidate
                cost = associate(_lift(trial, params)).total_cost
                if cost < best:
                    best, move = cost, candidate
            if move is not None:
                xy[m] = move
        trace.append(best)
        radius /= 2.0
    logger.debug(f"2D SR finished after {len(trace) - 1} rounds, cost {best:.6g}")
    return _finish(scenario, associate, xy, trace)


def deploy_baseline(
    scenario: Scenario,
    mode: BaselineMode,
    rng: Optional[np.random.Generator] = None,
    *,
    objective: Objective = Objective.MIN_EXPOSURE,
    policy: Optional[PowerPolicy] = None,
    downlink: bool = False,
) -> DeploymentResult:
    """Reference deployments: tUAVs on distinct random GSs, or fixed small cells on an even grid at h_gs."""
    params = scenario.params
    policy = PowerPolicy.primal() if policy is None else policy
    associate = _Associator(scenario, objective, policy, downlink)
    n_nodes = len(scenario.gnbs) - 1

    if BaselineMode(mode) is BaselineMode.UNIFORM_GRID:
        xy = even_grid(n_nodes, params.area_x, params.area_y)
        positions = np.column_stack([xy, np.full(len(xy), params.h_gs)])
        return DeploymentResult(
            gs_assignment=np.full(n_nodes, -1, dtype=int),
            tuav_xy=xy,
            positions=positions,
            assoc=associate(positions),
        )

    if rng is None:
        raise DeploymentError("random GS deployment needs a random generator")
    n_tuavs = _check_counts(scenario)
    gs_assignment = rng.choice(len(scenario.ground_stations), size=n_tuavs, replace=False).astype(int)
    positions = hover_points(scenario.ground_stations, gs_assignment, params)
    result = DeploymentResult(
        gs_assignment=gs_assignment,
        tuav_xy=positions[:, :2].copy(),
        positions=positions,
        assoc=associate(positions),
    )
    result.validate(len(scenario.ground_stations))
    return result


def brute_force_deploy(
    scenario: Scenario,
    objective: Objective,
    policy: PowerPolicy,
    *,
    downlink: bool = False,
) -> DeploymentResult:
    """Best GS assignment over all ordered GS subsets, each scored by greedy association.

    Raises:
        BudgetExceededError: If N!/(N-M)! exceeds the enumeration budget.
    """
    params = scenario.params
    associate = _Associator(scenario, objective, policy, downlink)
    n_tuavs = _check_counts(scenario)
    n_gs = len(scenario.ground_stations)
    size = math.perm(n_gs, n_tuavs)
    if size > params.enum_budget:
        raise BudgetExceededError("brute-force deployment", size, params.enum_budget)
    if n_tuavs == 0:
        return _bs_only(scenario, associate)

    # one cost column per GS-hovered tUAV, sliced per candidate subset
    costs = _gs_cost_columns(scenario, associate)
    capacities = scenario.capacities
    tuav_caps = capacities[1 : n_tuavs + 1]
    ordered = permutations if len(np.unique(tuav_caps)) > 1 else combinations
    best_cost, best = np.inf, None
    for subset in ordered(range(n_gs), n_tuavs):
        cost = _subset_cost(costs, subset, capacities)
        if cost < best_cost:
            best_cost, best = cost, np.asarray(subset, dtype=int)

    positions = hover_points(scenario.ground_stations, best, params)
    result = DeploymentResult(
        gs_assignment=best,
        tuav_xy=positions[:, :2].copy(),
        positions=positions,
        assoc=associate(positions),
        objective_trace=(best_cost,),
    )
    result.validate(n_gs)
    return result
