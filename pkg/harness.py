"""Planning pipeline, evaluation and Monte Carlo experiments.

A plan runs the three stages in turn: deployment (which associates users
internally), per-tUAV positioning with the association frozen, and a final
association. The architecture decides which links the serving nodes carry.
"""
import logging
import multiprocessing as mp
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from association import (
    Association,
    AssociationError,
    BudgetExceededError,
    assign,
    brute_force_associate,
    greedy_associate,
    random_associate,
)
from channel import path_loss_matrix, ul_rate
from config import (
    AppConfig,
    Architecture,
    ConfigError,
    EmfNetError,
    Objective,
    StrategyConfig,
    dbm_to_watt,
    worker_count,
)
from deployment import (
    BaselineMode,
    DeploymentResult,
    brute_force_deploy,
    deploy_baseline,
    deploy_kmeans,
    deploy_sr2d,
)
from exposure import PowerMode, PowerPolicy, allocate_powers, exposure_index_dl, exposure_index_ul, satisfied_ratio
from geometry import GeometryError, TuavPlacement, default_placement, from_spherical, is_in_hover
from models import METRICS, EvaluationReport, Scenario
from positioning import placement_cost, position_golden, position_grid_oracle, position_sr3d
from scenario import generate_scenario

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ("architecture", "sweep_name", "sweep_value", "metric", "mean", "std", "p05", "p95", "n_iters")
ORACLE_COLUMNS = ("stage", "method", "mean_cost", "oracle_mean_cost", "gap", "n_iters")


def policy_for(strategy: StrategyConfig) -> PowerPolicy:
    """Rate targets for min-exposure; the SAR-capped power rule for max-rate."""
    if strategy.objective is Objective.MAX_RATE:
        return PowerPolicy.dual(strategy.sar_limit)
    return PowerPolicy.primal()


@dataclass(frozen=True, eq=False)
class NetworkPlan:
    """UL and DL associations plus the tUAV placements they were computed for."""

    scenario: Scenario
    ul: Association
    dl: Association
    placements: tuple[TuavPlacement, ...] = ()


def _with_bs(scenario: Scenario, points) -> np.ndarray:
    return np.vstack([scenario.bs_position[None, :], np.asarray(points, dtype=float).reshape(-1, 3)])


def _associate(
    strategy: StrategyConfig,
    scenario: Scenario,
    gnb_positions: np.ndarray,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    downlink: bool = False,
) -> Association:
    options = dict(capacities=scenario.capacities[: len(gnb_positions)], downlink=downlink)
    if strategy.association == "random":
        return random_associate(scenario, gnb_positions, objective, policy, rng, **options)
    if strategy.association == "brute-force":
        return brute_force_associate(scenario, gnb_positions, objective, policy, **options)
    return greedy_associate(scenario, gnb_positions, objective, policy, **options)


def _deploy(
    strategy: StrategyConfig,
    scenario: Scenario,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    downlink: bool,
) -> DeploymentResult:
    if strategy.deployment == "sr2d":
        return deploy_sr2d(scenario, objective, policy, rng, downlink=downlink)
    if strategy.deployment == "random":
        return deploy_baseline(scenario, BaselineMode.RANDOM_GS, rng, objective=objective, policy=policy, downlink=downlink)
    if strategy.deployment == "brute-force":
        return brute_force_deploy(scenario, objective, policy, downlink=downlink)
    return deploy_kmeans(scenario, objective, policy, rng, downlink=downlink)


def _position(
    strategy: StrategyConfig,
    tuav_id: int,
    start: TuavPlacement,
    scenario: Scenario,
    users,
    objective: Objective,
    policy: PowerPolicy,
    downlink: bool,
) -> TuavPlacement:
    params = scenario.params
    gs = scenario.ground_stations[start.gs_index]
    common = (tuav_id, start.gs_index, gs, users, objective, policy, params)
    if strategy.positioning == "golden":
        return position_golden(*common, start=start, downlink=downlink)
    if strategy.positioning == "sr3d":
        return position_sr3d(*common, start=start, downlink=downlink)
    if strategy.positioning == "grid":
        return position_grid_oracle(*common, strategy.grid_resolution, downlink=downlink)
    return start


def _plan_tuavs(
    scenario: Scenario,
    strategy: StrategyConfig,
    objective: Objective,
    policy: PowerPolicy,
    rng: np.random.Generator,
    downlink: bool,
) -> tuple[Association, tuple[TuavPlacement, ...]]:
    params = scenario.params
    deployment = _deploy(strategy, scenario, objective, policy, rng, downlink)
    # a random map is drawn once and kept, never min-selected against redraws
    redraw = strategy.association != "random"
    placements = [default_placement(int(n), params) for n in deployment.gs_assignment]
    positions = deployment.positions
    if strategy.association == "greedy":
        assoc = deployment.assoc
    else:
        assoc = _associate(strategy, scenario, _with_bs(scenario, positions), objective, policy, rng, downlink)

    for round_ in range(strategy.alternate_rounds):
        if round_ > 0 and redraw:
            fresh = _associate(strategy, scenario, _with_bs(scenario, positions), objective, policy, rng, downlink)
            if fresh.total_cost < assoc.total_cost:
                assoc = fresh

        moved = []
        for m, start in enumerate(placements):
            users = scenario.active.subset(assoc.users_of(m + 1))
            candidate = _position(strategy, m + 1, start, scenario, users, objective, policy, downlink)
            gs = scenario.ground_stations[start.gs_index]
            before = placement_cost(users, from_spherical(gs, start), objective, policy, params, downlink)
            after = placement_cost(users, from_spherical(gs, candidate), objective, policy, params, downlink)
            moved.append(candidate if after <= before else start)
        placements = moved
        positions = np.array(
            [from_spherical(scenario.ground_stations[p.gs_index], p) for p in placements], dtype=float
        ).reshape(-1, 3)

        gnb_positions = _with_bs(scenario, positions)
        frozen = assign(
            scenario, gnb_positions, assoc.serving, objective, policy,
            capacities=scenario.capacities[: len(gnb_positions)], downlink=downlink,
        )
        assoc = frozen
        if redraw:
            fresh = _associate(strategy, scenario, gnb_positions, objective, policy, rng, downlink)
            if fresh.total_cost < frozen.total_cost:
                assoc = fresh
        logger.debug(f"Alternate round {round_ + 1}: cost {assoc.total_cost:.6g}")
    return assoc, tuple(placements)


def plan_network(
    scenario: Scenario,
    strategy: StrategyConfig,
    rng: np.random.Generator,
    objective: Optional[Objective] = None,
    policy: Optional[PowerPolicy] = None,
) -> NetworkPlan:
    """Plan UL and DL service for the scenario's architecture.

    Green tUAVs and fixed small cells carry UL only (DL stays on the BS), regular
    tUAVs carry both directions on one association, special tUAVs carry DL only
    and are placed against DL link power.
    """
    objective = strategy.objective if objective is None else objective
    policy = policy_for(strategy) if policy is None else policy
    bs = scenario.bs_position[None, :]
    arch = scenario.architecture

    def through_bs(downlink: bool) -> Association:
        return _associate(strategy, scenario, bs, objective, policy, rng, downlink)

    placements: tuple[TuavPlacement, ...] = ()
    if arch is Architecture.BS_ONLY:
        ul, dl = through_bs(False), through_bs(True)
    elif arch is Architecture.FIXED_SC:
        cells = deploy_baseline(scenario, BaselineMode.UNIFORM_GRID, objective=objective, policy=policy)
        ul = _associate(strategy, scenario, _with_bs(scenario, cells.positions), objective, policy, rng)
        dl = through_bs(True)
    elif arch is Architecture.SPECIAL_TUAV:
        ul = through_bs(False)
        dl, placements = _plan_tuavs(scenario, strategy, objective, policy, rng, downlink=True)
    else:
        ul, placements = _plan_tuavs(scenario, strategy, objective, policy, rng, downlink=False)
        if arch is Architecture.REGULAR_TUAV:
            dl = assign(
                scenario, ul.gnb_positions, ul.serving, objective, policy,
                capacities=ul.capacities, downlink=True,
            )
        else:
            dl = through_bs(True)
    return NetworkPlan(scenario=scenario, ul=ul, dl=dl, placements=placements)


def evaluate_plan(plan: NetworkPlan, policy: PowerPolicy) -> EvaluationReport:
    """Per-user UL power and rate and the UL/DL exposure of a plan."""
    scenario = plan.scenario
    params = scenario.params
    users = scenario.active
    rows = np.arange(len(users))
    loss = path_loss_matrix(users.positions, plan.ul.gnb_positions, params)[rows, plan.ul.serving]
    power = allocate_powers(users.sar_ul, users.rate_ul, loss, policy, params)
    rate = np.asarray(ul_rate(power, loss, params), dtype=float).reshape(-1)
    return EvaluationReport(
        ei_ul=exposure_index_ul(plan.ul, power, users),
        ei_dl=exposure_index_dl(scenario, plan.dl, params),
        per_user_power=power,
        per_user_rate=rate,
        per_user_exposure=users.sar_ul * power,
        satisfied_ratio=satisfied_ratio(rate, users.rate_ul) if len(users) else 1.0,
        sum_rate_ul=float(np.sum(rate)),
    )


def audit_plan(plan: NetworkPlan, policy: PowerPolicy) -> list[str]:
    """Every hard-constraint violation of a plan; an empty list means the plan is feasible."""
    scenario = plan.scenario
    params = scenario.params
    problems = []
    for name, assoc in (("UL", plan.ul), ("DL", plan.dl)):
        if len(assoc.serving) != len(scenario.active):
            problems.append(f"{name}: {len(assoc.serving)} servers for {len(scenario.active)} users")
        try:
            assoc.validate()
        except AssociationError as e:
            problems.append(f"{name}: {e.message}")

    hosts = [p.gs_index for p in plan.placements]
    if len(set(hosts)) != len(hosts):
        problems.append("a ground station hosts more than one tUAV")
    for m, placement in enumerate(plan.placements, start=1):
        try:
            placement.validate(params)
        except GeometryError as e:
            problems.append(f"tUAV {m}: {e.message}")
            continue
        gs = scenario.ground_stations[placement.gs_index]
        if not is_in_hover(gs, from_spherical(gs, placement), params):
            problems.append(f"tUAV {m}: outside the hovering area of GS {placement.gs_index}")

    if policy.mode is PowerMode.DUAL_SAR_CAP:
        report = evaluate_plan(plan, policy)
        over = np.flatnonzero(report.per_user_exposure > policy.sar_limit)
        if len(over):
            problems.append(f"users {scenario.active.ids[over].tolist()} exceed the SAR limit {policy.sar_limit:g}")
    return problems


def run_pipeline(
    scenario: Scenario,
    strategy: StrategyConfig,
    objective: Optional[Objective] = None,
    policy: Optional[PowerPolicy] = None,
    rng: Optional[np.random.Generator] = None,
) -> EvaluationReport:
    rng = np.random.default_rng(scenario.seed) if rng is None else rng
    policy = policy_for(strategy) if policy is None else policy
    return evaluate_plan(plan_network(scenario, strategy, rng, objective, policy), policy)


def iteration_rngs(master_seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (scenario, planning) generators for Monte Carlo iteration `index`."""
    scenario_seq, plan_seq = np.random.SeedSequence(master_seed, spawn_key=(index,)).spawn(2)
    return np.random.default_rng(scenario_seq), np.random.default_rng(plan_seq)


def run_iteration(
    config: AppConfig,
    master_seed: int,
    index: int,
    objective: Optional[Objective] = None,
    policy: Optional[PowerPolicy] = None,
) -> tuple[NetworkPlan, EvaluationReport]:
    scenario_rng, plan_rng = iteration_rngs(master_seed, index)
    scenario = generate_scenario(config, scenario_rng, seed=index)
    policy = policy_for(config.strategy) if policy is None else policy
    plan = plan_network(scenario, config.strategy, plan_rng, objective, policy)
    return plan, evaluate_plan(plan, policy)


def _iteration_metrics(task: tuple) -> dict[str, float]:
    _, report = run_iteration(*task)
    return report.metrics()


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float
    p05: float
    p95: float
    n_iters: int

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "MetricStats":
        values = np.asarray(samples, dtype=float)
        return cls(
            mean=float(np.mean(values)),
            std=float(np.std(values)),
            p05=float(np.percentile(values, 5)),
            p95=float(np.percentile(values, 95)),
            n_iters=len(values),
        )


def monte_carlo(
    config: AppConfig,
    n_iters: int,
    objective: Optional[Objective] = None,
    policy: Optional[PowerPolicy] = None,
    *,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> dict[str, MetricStats]:
    """Aggregate every report metric over `n_iters` independently seeded scenarios.

    Iteration i always uses the seeds derived from (master_seed, i), so the
    result does not depend on the worker count.
    """
    if n_iters < 1:
        raise EmfNetError(f"Monte Carlo needs at least one iteration, got {n_iters}")
    workers = worker_count() if workers is None else workers
    tasks = [(config, master_seed, i, objective, policy) for i in range(n_iters)]
    if workers > 1 and n_iters > 1:
        with mp.Pool(min(workers, n_iters)) as pool:
            samples = pool.map(_iteration_metrics, tasks)
    else:
        samples = [_iteration_metrics(task) for task in tasks]
    return {name: MetricStats.from_samples([s[name] for s in samples]) for name in METRICS}


def _sweep_overrides(sweep: str, value: float) -> dict:
    if sweep == "K":
        return {"scenario": {"active_count": int(value)}}
    if sweep == "rate_req":
        return {"scenario": {"rate_ul_data": float(value)}}
    if sweep == "sar_limit":
        return {"strategy": {"sar_limit": float(value)}}
    if sweep == "p_max":
        return {"sim": {"p_max": dbm_to_watt(value)}}
    if sweep == "N":
        return {"scenario": {"n_gs": int(value)}}
    if sweep == "alpha_nlos":
        return {"sim": {"alpha_nlos": float(value)}}
    raise ConfigError("sweep", f"unknown sweep {sweep!r}; expected one of {', '.join(SWEEPS)}")


# rate_req sweeps the data users' UL rate in bps; p_max is swept in dBm
SWEEPS = ("K", "rate_req", "sar_limit", "p_max", "N", "alpha_nlos")


@dataclass(frozen=True)
class Variant:
    """One curve of a comparison: an architecture plus strategy overrides."""

    label: str
    architecture: Architecture
    strategy: dict = field(default_factory=dict)

    def apply(self, config: AppConfig) -> AppConfig:
        return config.with_overrides(scenario={"architecture": self.architecture}, strategy=self.strategy)


def compare_variants(
    config: AppConfig,
    variants: Sequence[Variant],
    sweep: str,
    values: Sequence[float],
    n_iters: int,
    *,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Monte Carlo grid over (variant, sweep value) in long format, one row per metric.

    All variants share the master seed, so they see the same residents.
    """
    rows = []
    for variant in variants:
        for value in values:
            run_config = variant.apply(config.with_overrides(**_sweep_overrides(sweep, value)))
            try:
                stats = monte_carlo(run_config, n_iters, master_seed=master_seed, workers=workers)
            except BudgetExceededError as e:
                logger.warning(f"Skipping {variant.label} at {sweep}={value:g}: {e.message}")
                continue
            for metric in METRICS:
                s = stats[metric]
                rows.append({
                    "architecture": variant.label,
                    "sweep_name": sweep,
                    "sweep_value": float(value),
                    "metric": metric,
                    "mean": s.mean,
                    "std": s.std,
                    "p05": s.p05,
                    "p95": s.p95,
                    "n_iters": s.n_iters,
                })
            logger.info(f"{variant.label} {sweep}={value:g}: EI {stats['ei_total'].mean:.4g} W/kg over {n_iters} runs")
    return pd.DataFrame(rows, columns=list(RESULT_COLUMNS))


def compare_architectures(
    config: AppConfig,
    architectures: Sequence[Architecture],
    sweep: str,
    values: Sequence[float],
    n_iters: int,
    *,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    variants = [Variant(Architecture(a).value, Architecture(a)) for a in architectures]
    return compare_variants(config, variants, sweep, values, n_iters, master_seed=master_seed, workers=workers)


@dataclass(frozen=True)
class FigurePreset:
    name: str
    title: str
    sweep: str
    values: tuple[float, ...]
    variants: tuple[Variant, ...]
    overrides: dict = field(default_factory=dict)


def _archs(*archs: Architecture) -> tuple[Variant, ...]:
    return tuple(Variant(a.value, a) for a in archs)


_SMALL_FAMILY = {"n_residents": 60, "n_tuavs": 2, "n_gs": 9, "voice_fraction": 0.0}
_DENSE_DATA = {"n_residents": 240, "active_count": 60, "n_tuavs": 4, "n_gs": 36, "voice_fraction": 0.0}
_DUAL_LIMITS = (1e-3, 1e-2)

FIGURES = {
    preset.name: preset
    for preset in (
        FigurePreset(
            "fig3", "UL exposure of the association strategies", "K", (4, 6, 8, 10, 12),
            (
                Variant("bs-only", Architecture.BS_ONLY),
                Variant("greedy", Architecture.GREEN_TUAV, {"association": "greedy"}),
                Variant("brute-force", Architecture.GREEN_TUAV, {"association": "brute-force"}),
                Variant("random", Architecture.GREEN_TUAV, {"association": "random"}),
            ),
            {"scenario": _SMALL_FAMILY, "sim": {"w_tuav_max": 2}, "strategy": {"deployment": "random", "positioning": "none"}},
        ),
        FigurePreset(
            "fig4", "UL exposure of the deployment strategies", "K", (4, 6, 8, 10, 12),
            (Variant("bs-only", Architecture.BS_ONLY),)
            + tuple(Variant(d, Architecture.GREEN_TUAV, {"deployment": d}) for d in ("kmeans", "sr2d", "random", "brute-force")),
            {"scenario": _SMALL_FAMILY, "strategy": {"positioning": "none"}},
        ),
        FigurePreset(
            "fig5", "UL exposure of the positioning strategies", "K", (6, 12, 18, 24, 30),
            tuple(
                Variant("center" if p == "none" else p, Architecture.GREEN_TUAV, {"positioning": p})
                for p in ("none", "golden", "sr3d", "grid")
            ),
            {"scenario": {"n_residents": 120, "n_tuavs": 4, "n_gs": 25}},
        ),
        FigurePreset(
            "fig6", "UL and DL exposure per architecture", "K", (6, 12, 18, 24, 30, 36, 42, 48),
            _archs(Architecture.BS_ONLY, Architecture.GREEN_TUAV, Architecture.REGULAR_TUAV, Architecture.SPECIAL_TUAV),
            {"scenario": {"n_residents": 120, "n_tuavs": 4, "n_gs": 25}},
        ),
        FigurePreset(
            "fig7", "Satisfied-users ratio versus UL rate requirement", "rate_req",
            (10e6, 25e6, 50e6, 75e6, 100e6, 125e6),
            _archs(Architecture.BS_ONLY, Architecture.FIXED_SC, Architecture.GREEN_TUAV),
            {"scenario": _DENSE_DATA},
        ),
        FigurePreset(
            "fig8", "UL exposure versus UL rate requirement", "rate_req",
            tuple(r * 1e6 for r in range(25, 275, 25)),
            _archs(Architecture.BS_ONLY, Architecture.FIXED_SC, Architecture.GREEN_TUAV),
            {"scenario": _DENSE_DATA},
        ),
        FigurePreset(
            "users", "UL exposure versus number of active users", "K", (12, 24, 36, 48, 60, 72, 84, 96),
            _archs(Architecture.BS_ONLY, Architecture.FIXED_SC, Architecture.GREEN_TUAV),
            {"scenario": {"n_residents": 240, "n_tuavs": 4, "n_gs": 36}},
        ),
        FigurePreset(
            "gs-count", "UL exposure versus number of ground stations", "N", (4, 9, 16, 25, 36, 49, 64),
            _archs(Architecture.GREEN_TUAV, Architecture.REGULAR_TUAV),
            {"scenario": {"n_residents": 240, "active_count": 96, "n_tuavs": 4}},
        ),
        FigurePreset(
            "fig9", "Average UL rate versus SAR limit", "sar_limit", tuple(2.0 * 10.0 ** e for e in range(-8, 0)),
            _archs(Architecture.BS_ONLY, Architecture.FIXED_SC, Architecture.GREEN_TUAV),
            {"scenario": {"n_residents": 120, "n_gs": 25}, "strategy": {"objective": Objective.MAX_RATE}},
        ),
        FigurePreset(
            "alpha-nlos", "Average UL rate versus NLoS path-loss exponent", "alpha_nlos", (2.0, 2.5, 3.0, 3.5),
            _archs(Architecture.BS_ONLY, Architecture.GREEN_TUAV),
            {"scenario": {"n_residents": 120, "n_gs": 25}, "strategy": {"objective": Objective.MAX_RATE, "sar_limit": 2e-3}},
        ),
        FigurePreset(
            "fig10", "Average UL rate versus maximum transmit power (dBm)", "p_max", (20, 22, 24, 26, 28, 30, 32, 34, 36),
            tuple(
                Variant(f"{a.value}@{limit:g}", a, {"sar_limit": limit})
                for limit in _DUAL_LIMITS
                for a in (Architecture.BS_ONLY, Architecture.GREEN_TUAV)
            ),
            {"scenario": {"n_residents": 120, "n_gs": 25}, "strategy": {"objective": Objective.MAX_RATE}},
        ),
    )
}


def figure_config(name: str, config: AppConfig) -> AppConfig:
    """The base config of a figure preset applied on top of `config`."""
    if name not in FIGURES:
        raise ConfigError("figure", f"unknown figure {name!r}; expected one of {', '.join(FIGURES)}")
    return config.with_overrides(**FIGURES[name].overrides)


def run_figure(
    name: str,
    config: AppConfig,
    n_iters: int,
    *,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    base = figure_config(name, config)
    preset = FIGURES[name]
    logger.info(f"Figure {name}: {preset.title}, {len(preset.variants)} curves x {len(preset.values)} points")
    return compare_variants(base, preset.variants, preset.sweep, preset.values, n_iters, master_seed=master_seed, workers=workers)


def oracle_check(config: AppConfig, n_iters: int, *, master_seed: int = 0) -> pd.DataFrame:
    """Heuristic versus exhaustive-search cost on small instances (2 tUAVs, 9 GSs, 4 to 8 users).

    gap is (mean_cost - oracle_mean_cost) / |oracle_mean_cost|; positive means
    the heuristic is worse.
    """
    if n_iters < 1:
        raise EmfNetError(f"oracle check needs at least one iteration, got {n_iters}")
    base = config.with_overrides(
        scenario={**_SMALL_FAMILY, "architecture": Architecture.GREEN_TUAV},
        sim={"w_tuav_max": 2},
    )
    objective = base.strategy.objective
    policy = policy_for(base.strategy)
    params = base.sim
    samples = defaultdict(list)

    for i in range(n_iters):
        scenario_rng, plan_rng = iteration_rngs(master_seed, i)
        scenario = generate_scenario(base.with_overrides(scenario={"active_count": 4 + i % 5}), scenario_rng, seed=i)

        spread = deploy_baseline(scenario, BaselineMode.RANDOM_GS, plan_rng, objective=objective, policy=policy)
        gnb_positions = _with_bs(scenario, spread.positions)
        samples["association", "greedy"].append(greedy_associate(scenario, gnb_positions, objective, policy).total_cost)
        samples["association", "random"].append(
            random_associate(scenario, gnb_positions, objective, policy, plan_rng).total_cost
        )
        samples["association", "brute-force"].append(
            brute_force_associate(scenario, gnb_positions, objective, policy).total_cost
        )

        best = brute_force_deploy(scenario, objective, policy)
        samples["deployment", "kmeans"].append(deploy_kmeans(scenario, objective, policy, plan_rng).objective)
        samples["deployment", "sr2d"].append(deploy_sr2d(scenario, objective, policy, plan_rng).objective)
        samples["deployment", "random"].append(spread.objective)
        samples["deployment", "brute-force"].append(best.objective)

        gs_index = int(best.gs_assignment[0])
        gs = scenario.ground_stations[gs_index]
        users = scenario.active.subset(best.assoc.users_of(1))
        placements = {
            "center": default_placement(gs_index, params),
            "golden": position_golden(1, gs_index, gs, users, objective, policy, params),
            "sr3d": position_sr3d(1, gs_index, gs, users, objective, policy, params),
            "grid": position_grid_oracle(1, gs_index, gs, users, objective, policy, params, base.strategy.grid_resolution),
        }
        for method, placement in placements.items():
            samples["positioning", method].append(
                placement_cost(users, from_spherical(gs, placement), objective, policy, params)
            )

    oracle = {"association": "brute-force", "deployment": "brute-force", "positioning": "grid"}
    rows = []
    for (stage, method), values in samples.items():
        mean = float(np.mean(values))
        reference = float(np.mean(samples[stage, oracle[stage]]))
        gap = (mean - reference) / abs(reference) if reference != 0 else 0.0
        rows.append({
            "stage": stage,
            "method": method,
            "mean_cost": mean,
            "oracle_mean_cost": reference,
            "gap": gap,
            "n_iters": n_iters,
        })
    logger.info(f"Oracle check finished over {n_iters} instances")
    return pd.DataFrame(rows, columns=list(ORACLE_COLUMNS))
