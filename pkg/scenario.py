"""Random scenario generation and scenario files.

Residents are the superposition of a homogeneous Poisson point process and a
Poisson cluster process of hotspots; a share of them become active users with
a voice/data usage mix. Ground stations sit on an even grid over the area and
the base station in its middle.
"""
import json
import logging
import math
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from config import AppConfig, Architecture, ConfigError, SimParams
from models import Gnb, GnbKind, Scenario, ScenarioError, Usage, User, even_grid, sar_for_usage

logger = logging.getLogger(__name__)

SCENARIO_FORMAT = 1


def _split_evenly(total: int, parts: int) -> np.ndarray:
    counts = np.full(parts, total // parts, dtype=int)
    counts[: total % parts] += 1
    return counts


def _cluster_points(center: np.ndarray, count: int, radius: float, params: SimParams, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in a disk around `center`; points falling outside the area are redrawn."""
    points = np.zeros((0, 2))
    while len(points) < count:
        need = count - len(points)
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, need))
        angle = rng.uniform(0.0, 2.0 * math.pi, need)
        draw = center + np.column_stack([r * np.cos(angle), r * np.sin(angle)])
        inside = (draw[:, 0] >= 0) & (draw[:, 0] <= params.area_x) & (draw[:, 1] >= 0) & (draw[:, 1] <= params.area_y)
        points = np.vstack([points, draw[inside]])
    return points


def sample_residents(config: AppConfig, rng: np.random.Generator) -> np.ndarray:
    """2D resident positions from the PPP plus hotspot clusters."""
    params, sc = config.sim, config.scenario
    n = sc.n_residents
    if sc.fixed_counts:
        n_uniform = int(round(n * sc.ppp_share))
        n_clusters = int(round(sc.cluster_count_mean))
        per_cluster = _split_evenly(n - n_uniform, n_clusters) if n_clusters > 0 else np.zeros(0, dtype=int)
        if n_clusters == 0:
            n_uniform = n
    else:
        n_uniform = int(rng.poisson(n * sc.ppp_share))
        n_clusters = int(rng.poisson(sc.cluster_count_mean))
        per_cluster = rng.poisson(n * sc.cluster_share, n_clusters)

    high = [params.area_x, params.area_y]
    chunks = [rng.uniform([0.0, 0.0], high, size=(n_uniform, 2))]
    centers = rng.uniform([0.0, 0.0], high, size=(n_clusters, 2))
    for center, count in zip(centers, per_cluster):
        chunks.append(_cluster_points(center, int(count), sc.cluster_radius, params, rng))
    return np.vstack(chunks).reshape(-1, 2)


def ground_station_grid(n_gs: int, params: SimParams) -> np.ndarray:
    """GS rooftop anchors on an even grid at height h_gs."""
    if n_gs and math.isqrt(n_gs) ** 2 != n_gs:
        logger.warning(f"{n_gs} ground stations do not form a square grid; using a near-square layout")
    xy = even_grid(n_gs, params.area_x, params.area_y)
    return np.column_stack([xy, np.full(len(xy), params.h_gs)]).reshape(-1, 3)


def _serving_nodes(
    params: SimParams,
    arch: Architecture,
    n_nodes: int,
    ground_stations: np.ndarray,
    n_residents: int,
) -> tuple[Gnb, ...]:
    bs_capacity = params.w_bs_max if params.w_bs_max is not None else n_residents
    gnbs = [Gnb(0, GnbKind.BASE_STATION, (params.area_x / 2.0, params.area_y / 2.0, params.h_bs), bs_capacity)]

    if arch is Architecture.FIXED_SC:
        for m, (x, y) in enumerate(even_grid(n_nodes, params.area_x, params.area_y)):
            gnbs.append(Gnb(m + 1, GnbKind.SMALL_CELL, (float(x), float(y), params.h_gs), params.w_tuav_max))
    elif arch.has_tuavs:
        # a regular tUAV spends two resource blocks per user, one per direction
        capacity = params.w_tuav_max // 2 if arch is Architecture.REGULAR_TUAV else params.w_tuav_max
        for m in range(n_nodes):
            x, y, z = ground_stations[m]
            gnbs.append(Gnb(m + 1, GnbKind.TUAV, (float(x), float(y), float(z) + params.t_max / 2.0), capacity))
    return tuple(gnbs)


def generate_scenario(config: AppConfig, rng: np.random.Generator, seed: int = 0) -> Scenario:
    """Draw one static scenario.

    Args:
        config: Simulation constants and scenario controls.
        rng: Source of every random draw.
        seed: Recorded in the scenario for replay.

    Returns:
        Scenario: Residents (active users first drawn, then usage), GSs, BS and
        the serving nodes of the configured architecture.
    """
    params, sc = config.sim, config.scenario
    if sc.architecture.has_tuavs and sc.n_tuavs > sc.n_gs:
        raise ConfigError("scenario.n_tuavs", f"{sc.n_tuavs} tUAVs need as many ground stations, only {sc.n_gs} configured")

    xy = sample_residents(config, rng)
    n_res = len(xy)
    wanted = sc.active_count if sc.active_count is not None else int(round(sc.active_fraction * n_res))
    if wanted > n_res:
        logger.warning(f"{wanted} active users requested but only {n_res} residents drawn")
    n_active = min(wanted, n_res)
    active = np.zeros(n_res, dtype=bool)
    active[rng.choice(n_res, size=n_active, replace=False)] = True
    voice = np.zeros(n_res, dtype=bool)
    active_ids = np.flatnonzero(active)
    voice[rng.choice(active_ids, size=int(round(sc.voice_fraction * n_active)), replace=False)] = True

    residents = []
    for i, (x, y) in enumerate(xy):
        usage = Usage.VOICE if voice[i] else Usage.DATA
        if active[i]:
            rate_ul = sc.rate_ul_voice if voice[i] else sc.rate_ul_data
            rate_dl = sc.rate_dl_voice if voice[i] else sc.rate_dl_data
        else:
            rate_ul = rate_dl = 0.0
        residents.append(User(i, (float(x), float(y), 0.0), usage, bool(active[i]), float(rate_ul), float(rate_dl), sar_for_usage(usage, params)))

    ground_stations = ground_station_grid(sc.n_gs, params)
    scenario = Scenario(
        params=params,
        residents=tuple(residents),
        gnbs=_serving_nodes(params, sc.architecture, sc.n_tuavs, ground_stations, n_res),
        ground_stations=ground_stations,
        architecture=sc.architecture,
        seed=seed,
    )
    logger.debug(f"Scenario {seed}: {n_res} residents, {n_active} active, {len(scenario.gnbs)} gNBs")
    return scenario


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "format": SCENARIO_FORMAT,
        "seed": scenario.seed,
        "architecture": scenario.architecture.value,
        "params": asdict(scenario.params),
        "residents": [
            {
                "id": u.id,
                "position": list(u.position),
                "usage": u.usage.value,
                "active": u.active,
                "rate_req_ul": u.rate_req_ul,
                "rate_req_dl": u.rate_req_dl,
            }
            for u in scenario.residents
        ],
        "gnbs": [
            {"id": g.id, "kind": g.kind.value, "position": list(g.position), "capacity": g.capacity}
            for g in scenario.gnbs
        ],
        "ground_stations": scenario.ground_stations.tolist(),
    }


def scenario_from_dict(raw: dict) -> Scenario:
    """Rebuild a scenario written by scenario_to_dict.

    Raises:
        ScenarioError: On an unknown format or missing fields.
    """
    if raw.get("format") != SCENARIO_FORMAT:
        raise ScenarioError(f"unsupported scenario format {raw.get('format')!r}")
    try:
        params = SimParams(**raw["params"])
        residents = tuple(
            User(
                id=r["id"],
                position=tuple(r["position"]),
                usage=Usage(r["usage"]),
                active=r["active"],
                rate_req_ul=r["rate_req_ul"],
                rate_req_dl=r["rate_req_dl"],
                sar_ul=sar_for_usage(Usage(r["usage"]), params),
            )
            for r in raw["residents"]
        )
        gnbs = tuple(Gnb(g["id"], GnbKind(g["kind"]), tuple(g["position"]), g["capacity"]) for g in raw["gnbs"])
        return Scenario(
            params=params,
            residents=residents,
            gnbs=gnbs,
            ground_stations=np.asarray(raw["ground_stations"], dtype=float).reshape(-1, 3),
            architecture=Architecture(raw["architecture"]),
            seed=raw["seed"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"malformed scenario: {e}")


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(scenario_to_dict(scenario), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise ScenarioError(f"{path}: cannot write scenario: {e}")
    logger.info(f"Scenario written to {path}")
    return path


def load_scenario(path: Union[str, Path], params: Optional[SimParams] = None) -> Scenario:
    """Read a scenario file.

    When `params` is given it replaces the stored constants, and the BS, GS and
    serving-node heights and capacities are re-derived from it.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ScenarioError(f"{path}: cannot read scenario: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON: {e}")
    if params is None:
        return scenario_from_dict(raw)
    raw["params"] = asdict(params)
    scenario = scenario_from_dict(raw)
    ground_stations = scenario.ground_stations.copy()
    ground_stations[:, 2] = params.h_gs
    gnbs = _serving_nodes(
        params, scenario.architecture, len(scenario.gnbs) - 1, ground_stations, len(scenario.residents)
    )
    return replace(scenario, gnbs=gnbs, ground_stations=ground_stations)
