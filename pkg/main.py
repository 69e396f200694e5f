"""Command-line entry point for the tUAV exposure planner."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from config import AppConfig, Architecture, EmfNetError, Objective, dbm_to_watt
from harness import (
    FIGURES,
    SWEEPS,
    audit_plan,
    compare_architectures,
    evaluate_plan,
    figure_config,
    iteration_rngs,
    oracle_check,
    plan_network,
    policy_for,
    run_figure,
    run_iteration,
)
from results import emit_results
from scenario import generate_scenario, load_scenario, save_scenario

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler(sys.stdout)]
)
logger = logging.getLogger(__name__)

DEFAULT_ITERS = 100


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _arch_list(text: str) -> list[Architecture]:
    try:
        return [Architecture(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError:
        choices = ", ".join(a.value for a in Architecture)
        raise argparse.ArgumentTypeError(f"unknown architecture in {text!r}; choose from {choices}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (default: $EMFNET_CONFIG or built-in defaults)")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--objective", choices=[o.value for o in Objective], help="emf: minimise exposure, rate: maximise UL rate under a SAR cap")
    common.add_argument("--sar-limit", type=float, help="per-user SAR cap in W/kg for the rate objective")
    common.add_argument("--p-max-dbm", type=float, help="maximum user transmit power in dBm")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="emfnet", description="EMF-aware planning of tethered-UAV small cells")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="plan and evaluate one scenario")
    run.add_argument("--arch", type=_arch_list, help="architecture (one value)")
    run.add_argument("--scenario", help="scenario file written by `gen` instead of a random draw")

    sweep = sub.add_parser("sweep", parents=[common], help="compare architectures over a parameter sweep")
    sweep.add_argument("--arch", type=_arch_list, default=[a for a in Architecture], help="comma-separated architectures")
    sweep.add_argument("--sweep", choices=SWEEPS, default="K")
    sweep.add_argument("--values", type=_float_list, required=True, help="comma-separated sweep values")
    sweep.add_argument("--iters", type=int, default=DEFAULT_ITERS)

    check = sub.add_parser("oracle-check", parents=[common], help="heuristics against exhaustive search")
    check.add_argument("--iters", type=int, default=DEFAULT_ITERS)

    gen = sub.add_parser("gen", parents=[common], help="write a random scenario file")
    gen.add_argument("--arch", type=_arch_list, help="architecture (one value)")

    figure = sub.add_parser("figure", parents=[common], help="plot-ready data for a named figure")
    figure.add_argument("name", choices=list(FIGURES))
    figure.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    return parser


def _configure(args: argparse.Namespace) -> AppConfig:
    config = AppConfig.load(args.config)
    strategy, sim, scenario = {}, {}, {}
    if args.objective:
        strategy["objective"] = Objective(args.objective)
    if args.sar_limit is not None:
        strategy["sar_limit"] = args.sar_limit
    if args.p_max_dbm is not None:
        sim["p_max"] = dbm_to_watt(args.p_max_dbm)
    arch = getattr(args, "arch", None)
    if arch and args.command in ("run", "gen"):
        if len(arch) != 1:
            raise EmfNetError(f"{args.command} takes a single architecture, got {len(arch)}")
        scenario["architecture"] = arch[0]
    return config.with_overrides(sim=sim, scenario=scenario, strategy=strategy)


def cmd_run(args: argparse.Namespace, config: AppConfig) -> None:
    if args.scenario:
        # stored constants win unless the command line supplies its own
        override = args.config is not None or args.p_max_dbm is not None
        scenario = load_scenario(args.scenario, params=config.sim if override else None)
        policy = policy_for(config.strategy)
        plan = plan_network(scenario, config.strategy, iteration_rngs(args.seed, 0)[1], policy=policy)
        report = evaluate_plan(plan, policy)
    else:
        policy = policy_for(config.strategy)
        plan, report = run_iteration(config, args.seed, 0, policy=policy)
    violations = audit_plan(plan, policy)
    for problem in violations:
        logger.error(f"Constraint violated: {problem}")
    summary = {
        "architecture": plan.scenario.architecture.value,
        "seed": args.seed,
        "metrics": report.metrics(),
        "placements": [
            {"gs": p.gs_index, "T": p.tether_T, "theta": p.elevation_theta, "phi": p.azimuth_phi}
            for p in plan.placements
        ],
        "violations": violations,
    }
    print(json.dumps(summary, indent=2))


def cmd_sweep(args: argparse.Namespace, config: AppConfig) -> None:
    table = compare_architectures(config, args.arch, args.sweep, args.values, args.iters, master_seed=args.seed)
    emit_results(
        table, args.out, f"sweep_{args.sweep}",
        config=config, master_seed=args.seed,
        extra={"architectures": [a.value for a in args.arch], "values": args.values},
    )


def cmd_oracle_check(args: argparse.Namespace, config: AppConfig) -> None:
    table = oracle_check(config, args.iters, master_seed=args.seed)
    emit_results(table, args.out, "oracle_check", config=config, master_seed=args.seed)
    for row in table.itertuples():
        logger.info(f"{row.stage:12s} {row.method:12s} gap {row.gap:+.2%}")


def cmd_gen(args: argparse.Namespace, config: AppConfig) -> None:
    scenario = generate_scenario(config, iteration_rngs(args.seed, 0)[0], seed=args.seed)
    save_scenario(scenario, Path(args.out) / f"scenario_{args.seed}.json")


def cmd_figure(args: argparse.Namespace, config: AppConfig) -> None:
    table = run_figure(args.name, config, args.iters, master_seed=args.seed)
    emit_results(table, args.out, args.name, config=figure_config(args.name, config), master_seed=args.seed, extra={"figure": args.name})


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "gen": cmd_gen,
    "figure": cmd_figure,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        config = _configure(args)
        COMMANDS[args.command](args, config)
    except EmfNetError as e:
        logger.error(e.message)
        return 1
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        sys.exit(1)
