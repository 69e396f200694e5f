"""Fine 3D placement of one tUAV inside its hovering cone with the user association frozen."""
import logging
import math
from typing import Callable, Optional

import numpy as np

from association import BudgetExceededError, CostModel
from config import Objective, SimParams
from exposure import PowerPolicy
from geometry import (
    FEASIBILITY_TOL,
    TuavPlacement,
    clamp_to_hover,
    clamp_to_slice,
    default_placement,
    from_spherical,
    placement_from_point,
)
from models import UserArrays

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, int]:
    """Minimise a unimodal f on [lo, hi] until the bracket is narrower than tol.

    Returns:
        (midpoint of the final bracket, number of shrink steps)
    """
    a, b = lo, hi
    c, d = b - GOLDEN_RATIO * (b - a), a + GOLDEN_RATIO * (b - a)
    fc, fd = f(c), f(d)
    steps = 0
    while b - a >= tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_RATIO * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_RATIO * (b - a)
            fd = f(d)
        steps += 1
    return (a + b) / 2.0, steps


def placement_cost(
    users: UserArrays,
    point,
    objective: Objective,
    policy: PowerPolicy,
    params: SimParams,
    downlink: bool = False,
) -> float:
    """Summed link cost of `users` when served from `point`; lower is better."""
    return CostModel(objective, policy, params, downlink).at_point(users, point)


def _start_point(gs_index: int, gs: np.ndarray, start: Optional[TuavPlacement], params: SimParams) -> np.ndarray:
    return from_spherical(gs, start if start is not None else default_placement(gs_index, params))


def position_golden(
    tuav_id: int,
    gs_index: int,
    gs,
    users: UserArrays,
    objective: Objective,
    policy: PowerPolicy,
    params: SimParams,
    *,
    start: Optional[TuavPlacement] = None,
    downlink: bool = False,
) -> TuavPlacement:
    """Golden-section search over altitude with the horizontal point at the weighted barycenter.

    At every trial height the users' weights are their costs seen from the
    start point moved to that height; the barycenter is clamped into the cone
    cross-section. The start point is kept when the search ends up worse.
    """
    gs = np.asarray(gs, dtype=float)
    if len(users) == 0:
        return default_placement(gs_index, params)
    model = CostModel(objective, policy, params, downlink)
    origin = _start_point(gs_index, gs, start, params)
    users_xy = users.positions[:, :2]

    def barycenter(height: float) -> np.ndarray:
        seen_from = np.array([origin[0], origin[1], height])
        weights = np.abs(model.matrix(users, seen_from[None, :])[:, 0])
        if weights.sum() > 0:
            xy = weights @ users_xy / weights.sum()
        else:
            xy = origin[:2]
        return clamp_to_slice(gs, xy, height, params)

    height, steps = golden_section(
        lambda h: model.at_point(users, barycenter(h)),
        float(gs[2]),
        float(gs[2]) + params.t_max,
        params.h_min,
    )
    point = barycenter(height)
    if model.at_point(users, point) > model.at_point(users, origin):
        point = origin
    logger.debug(f"Golden search for tUAV {tuav_id}: {steps} steps, altitude {point[2]:.2f} m")
    return placement_from_point(gs_index, gs, point, params)


def polyhedron_directions(count: int) -> np.ndarray:
    """Unit search directions: the 14 cube directions (faces and corners), or a Fibonacci sphere for other counts."""
    if count == 14:
        axes = np.vstack([np.eye(3), -np.eye(3)])
        corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
        return np.vstack([axes, corners / math.sqrt(3.0)])
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    azimuth = math.pi * (1.0 + math.sqrt(5.0)) * k
    ring = np.sqrt(1.0 - z * z)
    return np.column_stack([ring * np.cos(azimuth), ring * np.sin(azimuth), z])


def _rotate_azimuth(directions: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return directions @ rotation.T


def position_sr3d(
    tuav_id: int,
    gs_index: int,
    gs,
    users: UserArrays,
    objective: Objective,
    policy: PowerPolicy,
    params: SimParams,
    *,
    start: Optional[TuavPlacement] = None,
    rng: Optional[np.random.Generator] = None,
    downlink: bool = False,
) -> TuavPlacement:
    """3D shrink-and-realign inside the hovering cone.

    Candidates on a polyhedron around the current point are projected into the
    cone; the best one is taken only if it strictly lowers the cost, then the
    radius halves until it drops below sr3d_radius_min. With `rng` the
    polyhedron is rotated by a random azimuth every round.
    """
    gs = np.asarray(gs, dtype=float)
    if len(users) == 0:
        return default_placement(gs_index, params)
    model = CostModel(objective, policy, params, downlink)
    point = clamp_to_hover(gs, _start_point(gs_index, gs, start, params), params)
    best = model.at_point(users, point)
    directions = polyhedron_directions(params.sr_candidates_3d)

    radius, rounds, moves = params.sr3d_radius_start, 0, 0
    while radius >= params.sr3d_radius_min:
        shell = directions if rng is None else _rotate_azimuth(directions, rng.uniform(0.0, 2.0 * math.pi))
        candidates = [clamp_to_hover(gs, point + radius * u, params) for u in shell]
        costs = [model.at_point(users, q) for q in candidates]
        i = int(np.argmin(costs))
        if costs[i] < best:
            best, point = costs[i], candidates[i]
            moves += 1
        radius /= 2.0
        rounds += 1
    logger.debug(f"3D SR for tUAV {tuav_id}: {rounds} rounds, {moves} moves, cost {best:.6g}")
    return placement_from_point(gs_index, gs, point, params)


def hover_grid(gs, resolution: float, params: SimParams) -> np.ndarray:
    """Feasible points of a GS-anchored regular grid with spacing `resolution`.

    Raises:
        BudgetExceededError: If the bounding grid exceeds the enumeration budget.
    """
    gs = np.asarray(gs, dtype=float)
    reach = params.t_max * math.cos(params.theta_min)
    n_xy = int(math.floor(reach / resolution + FEASIBILITY_TOL))
    n_z = int(math.floor(params.t_max / resolution + FEASIBILITY_TOL))
    size = (2 * n_xy + 1) ** 2 * (n_z + 1)
    if size > params.enum_budget:
        raise BudgetExceededError("hovering grid", size, params.enum_budget)

    side = np.arange(-n_xy, n_xy + 1) * resolution
    up = np.arange(n_z + 1) * resolution
    dx, dy, w = (a.ravel() for a in np.meshgrid(side, side, up, indexing="ij"))
    rho = np.hypot(dx, dy)
    tether = np.hypot(rho, w)
    feasible = (tether <= params.t_max + FEASIBILITY_TOL) & (
        (tether == 0) | (np.arctan2(w, rho) >= params.theta_min - FEASIBILITY_TOL)
    )
    return gs + np.column_stack([dx, dy, w])[feasible]


def position_grid_oracle(
    tuav_id: int,
    gs_index: int,
    gs,
    users: UserArrays,
    objective: Objective,
    policy: PowerPolicy,
    params: SimParams,
    resolution: float,
    *,
    downlink: bool = False,
) -> TuavPlacement:
    """Exhaustive search over hover_grid; the GS itself is always a grid point."""
    gs = np.asarray(gs, dtype=float)
    points = hover_grid(gs, resolution, params)
    if len(users) == 0:
        return default_placement(gs_index, params)
    costs = CostModel(objective, policy, params, downlink).matrix(users, points).sum(axis=0)
    best = points[int(np.argmin(costs))]
    logger.debug(f"Grid oracle for tUAV {tuav_id}: {len(points)} points, cost {costs.min():.6g}")
    return placement_from_point(gs_index, gs, best, params)
