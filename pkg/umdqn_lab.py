"""
UMDQN lab - command-line front end

    train              train one agent and write the training log, learning curve, checkpoints and manifest
    eval               run greedy evaluation episodes from a checkpoint
    dump-dist          write the learnt PDF / CDF / QF curve of one (state, action)
    compare-oracle     compare learnt grid-world distributions with Monte Carlo ground truth
    probe-contraction  measure operator contraction ratios on random discrete MDPs

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from agents import AgentFactory, evaluate_policy, run_training
from config import Config, TrainConfig, load_train_config, setup_logging
from engine.checkpoint import load_checkpoint
from envs import EnvironmentFactory
from envs.base import Environment
from envs.gridworld import StochasticGridWorld, parse_state
from oracle import Metric, compare_with_oracle, contraction_probe, kl_expansion_witness
from utils.artifacts import (
    eval_summary,
    write_comparison,
    write_contraction,
    write_distribution,
    write_eval_returns,
    write_eval_summary,
    write_manifest,
    write_oracle_atoms,
)
from utils.errors import ConfigValidationError, OutOfRangeError, UmdqnError, UnsupportedEnvironmentError
from utils.seeding import spawn_streams
from utils.training_monitor import TrainingMonitor

logger = logging.getLogger("umdqn_lab")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

EVAL_RETURNS = "eval_returns.csv"
EVAL_SUMMARY = "eval_summary.csv"
ORACLE_ATOMS = "oracle_atoms.csv"
ORACLE_COMPARISON = "oracle_comparison.csv"
CONTRACTION = "contraction.csv"


# ----------------------------------------------------------------- helpers
def _cli_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags that map onto TrainConfig fields; --set key=value adds any other field"""
    settings = {
        "algorithm": getattr(args, "algo", None),
        "env": getattr(args, "env", None),
        "seed": getattr(args, "seed", None),
        "total_steps": getattr(args, "total_steps", None),
        "output_dir": getattr(args, "output_dir", None),
        "z_min": getattr(args, "z_min", None),
        "z_max": getattr(args, "z_max", None),
    }
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigValidationError("set", f"expected key=value, got '{item}'", item)
        key, value = item.split("=", 1)
        settings[key.strip().lower().replace("-", "_")] = value
    return {k: v for k, v in settings.items() if v is not None}


def _resolve_config(args: argparse.Namespace, checkpoint: Optional[Path] = None) -> TrainConfig:
    base = None
    if checkpoint is not None:
        _, metadata = load_checkpoint(checkpoint)
        base = metadata.get("config")
    return load_train_config(_cli_settings(args), getattr(args, "config", None), base=base)


def _make_env(config: TrainConfig, rng: np.random.Generator) -> Environment:
    return EnvironmentFactory.create_environment(config.env, rng, {"gamma": config.gamma})


def _make_agent(config: TrainConfig, env: Environment, checkpoint: Optional[Path] = None):
    streams = spawn_streams(config.seed)
    agent = AgentFactory.create_agent(config, env.state_dim, env.n_actions, streams.init, streams.grid, streams.replay)
    if checkpoint is not None:
        agent.load_checkpoint(checkpoint)
        logger.info(f"Loaded {agent.algorithm} checkpoint {checkpoint} (step {agent.steps})")
    return agent


def _parse_state_spec(env: Environment, spec: str):
    if isinstance(env, StochasticGridWorld):
        return parse_state(spec, env.config)
    try:
        values = [float(part) for part in spec.split(",")]
    except ValueError as e:
        raise OutOfRangeError(f"cannot parse state '{spec}' as {env.state_dim} comma-separated numbers") from e
    if len(values) != env.state_dim:
        raise OutOfRangeError(f"{env.name} states have {env.state_dim} components, got {len(values)}")
    return np.array(values)


def _output_dir(args: argparse.Namespace, config: TrainConfig) -> Path:
    path = Path(getattr(args, "output_dir", None) or config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- commands
def run_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out = _output_dir(args, config)
    setup_logging(out, args.log_level)
    logger.info(f"Starting {config.algorithm} on {config.env} (seed {config.seed}) -> {out}")

    streams = spawn_streams(config.seed)
    env = _make_env(config, streams.env)
    eval_env = _make_env(config, streams.eval_env)
    agent = AgentFactory.create_agent(config, env.state_dim, env.n_actions, streams.init, streams.grid, streams.replay)
    monitor = TrainingMonitor()

    log = run_training(
        agent, env, eval_env, streams.acting, streams.evaluation,
        monitor=monitor, checkpoint_dir=out / Config.CHECKPOINT_DIR,
    )
    artifacts = [
        log.to_csv(out / Config.TRAINING_LOG),
        log.learning_curve_to_csv(out / Config.LEARNING_CURVE, config.smoothing_window),
        agent.save_checkpoint(out / Config.CHECKPOINT_DIR / Config.FINAL_CHECKPOINT),
    ]
    write_manifest(out / Config.MANIFEST, "train", config.to_dict(), artifacts, resources=monitor.export_metrics())
    status, _ = monitor.get_health_status()
    logger.info(f"Training complete: {len(log)} episodes, health {status}")
    return EXIT_OK


def run_eval(args: argparse.Namespace) -> int:
    config = _resolve_config(args, args.checkpoint)
    out = _output_dir(args, config)
    setup_logging(out, args.log_level)
    if args.episodes < 0:
        raise ConfigValidationError("episodes", "must be non-negative", args.episodes)

    streams = spawn_streams(config.seed)
    env = _make_env(config, streams.eval_env)
    agent = _make_agent(config, env, args.checkpoint)
    returns = evaluate_policy(agent, env, args.episodes, config.eps_test, streams.evaluation)
    artifacts = [write_eval_returns(out / EVAL_RETURNS, returns), write_eval_summary(out / EVAL_SUMMARY, returns)]
    summary = eval_summary(returns)
    write_manifest(out / "eval_manifest.json", "eval", config.to_dict(), artifacts,
                   extra={"checkpoint": str(args.checkpoint), "summary": summary})
    logger.info(f"Evaluation over {args.episodes} episodes: mean return {summary['mean_return']}")
    return EXIT_OK


def run_dump_distribution(args: argparse.Namespace) -> int:
    config = _resolve_config(args, args.checkpoint)
    out = _output_dir(args, config)
    setup_logging(out, args.log_level)

    env = _make_env(config, spawn_streams(config.seed).env)
    raw = _parse_state_spec(env, args.state)
    if not 0 <= args.action < env.n_actions:
        raise OutOfRangeError(f"action {args.action} outside [0, {env.n_actions})")
    agent = _make_agent(config, env, args.checkpoint)
    x, values = agent.view.curve(env.encode_state(raw), args.action, args.points)
    path = out / (args.output or f"dist_{config.representation.value}_{args.state.replace(',', '_')}_a{args.action}.csv")
    write_distribution(path, x, values, config.representation.value, args.state, args.action)
    return EXIT_OK


def run_compare_oracle(args: argparse.Namespace) -> int:
    config = _resolve_config(args, args.checkpoint)
    out = _output_dir(args, config)
    setup_logging(out, args.log_level)
    if config.env != "gridworld":
        raise UnsupportedEnvironmentError(f"oracle comparison is only available on the grid world, not '{config.env}'")

    streams = spawn_streams(config.seed)
    env = _make_env(config, streams.eval_env)
    cells = [parse_state(spec, env.config) for spec in args.states]
    agent = _make_agent(config, env, args.checkpoint)
    comparison = compare_with_oracle(
        agent, env, cells, args.n_rollouts, np.random.default_rng(args.oracle_seed), actions=args.actions,
    )
    artifacts = [
        write_oracle_atoms(out / ORACLE_ATOMS, comparison.oracles),
        write_comparison(out / ORACLE_COMPARISON, comparison.rows),
    ]
    write_manifest(out / "oracle_manifest.json", "compare-oracle", config.to_dict(), artifacts,
                   extra={"checkpoint": str(args.checkpoint), "n_rollouts": args.n_rollouts,
                          "oracle_seed": args.oracle_seed})
    for metric in Metric:
        logger.info(f"Mean {metric.value} distance to the optimal-policy oracle: "
                    f"{comparison.mean_distance(metric):.6f}")
    return EXIT_OK


def run_probe_contraction(args: argparse.Namespace) -> int:
    out = Path(args.output_dir or Config.OUTPUT_ROOT / "contraction")
    setup_logging(out, args.log_level)
    if args.trials < 1:
        raise ConfigValidationError("trials", "must be at least 1", args.trials)
    if not 0.0 < args.gamma < 1.0:
        raise ConfigValidationError("gamma", "must lie in (0, 1)", args.gamma)

    metrics = [Metric(m) for m in args.metric] if args.metric else list(Metric)
    rng = np.random.default_rng(args.seed)
    reports = [contraction_probe(None, metric, args.trials, rng, gamma=args.gamma) for metric in metrics]
    witness = next((r.witness_ratio for r in reports if r.metric is Metric.KL), None)
    if witness is None:
        witness = kl_expansion_witness(args.gamma)
    artifacts = [write_contraction(out / CONTRACTION, reports)]
    write_manifest(out / "contraction_manifest.json", "probe-contraction",
                   {"seed": args.seed, "trials": args.trials, "gamma": args.gamma}, artifacts,
                   extra={"kl_witness_ratio": witness})
    for report in reports:
        logger.info(f"{report.metric.value}: max ratio {report.max_ratio:.6f} (gamma {args.gamma})")
    return EXIT_OK


COMMANDS = {
    "train": run_train,
    "eval": run_eval,
    "dump-dist": run_dump_distribution,
    "compare-oracle": run_compare_oracle,
    "probe-contraction": run_probe_contraction,
}


# ------------------------------------------------------------------ parser
def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value settings file")
    parser.add_argument("--algo", choices=Config.ALGORITHMS)
    parser.add_argument("--env", choices=Config.ENVIRONMENTS)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--z-min", dest="z_min")
    parser.add_argument("--z-max", dest="z_max")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any TrainConfig field")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="umdqn_lab", description="Distributional RL with unconstrained monotonic networks")
    parser.add_argument("--log-level", dest="log_level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train an agent")
    _add_run_options(train)
    train.add_argument("--total-steps", dest="total_steps", type=int)

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint")
    _add_run_options(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, required=True)
    evaluate.add_argument("--episodes", type=int, default=100)

    dump = sub.add_parser("dump-dist", help="dump a learnt distribution curve")
    _add_run_options(dump)
    dump.add_argument("--checkpoint", type=Path, required=True)
    dump.add_argument("--state", required=True, help="grid world: x,y; cartpole: four comma-separated numbers")
    dump.add_argument("--action", type=int, required=True)
    dump.add_argument("--points", type=int, default=500)
    dump.add_argument("--output", help="file name inside the output directory")

    compare = sub.add_parser("compare-oracle", help="compare with Monte Carlo ground truth")
    _add_run_options(compare)
    compare.add_argument("--checkpoint", type=Path, required=True)
    compare.add_argument("--states", nargs="+", required=True, help="grid cells as x,y")
    compare.add_argument("--actions", type=int, nargs="*")
    compare.add_argument("--n-rollouts", dest="n_rollouts", type=int, default=1000)
    compare.add_argument("--oracle-seed", dest="oracle_seed", type=int, default=0)

    contraction = sub.add_parser("probe-contraction", help="contraction ratios on random MDPs")
    contraction.add_argument("--metric", action="append", choices=[m.value for m in Metric])
    contraction.add_argument("--trials", type=int, default=100)
    contraction.add_argument("--gamma", type=float, default=0.9)
    contraction.add_argument("--seed", type=int, default=0)
    contraction.add_argument("--output-dir", dest="output_dir")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigValidationError, UnsupportedEnvironmentError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    except UmdqnError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
