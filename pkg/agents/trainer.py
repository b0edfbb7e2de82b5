"""
Training loop: acting, learning, target refreshes, evaluation episodes
"""
import logging
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from agents.replay_memory import Experience
from agents.umdqn import UmdqnAgent
from envs.base import Environment
from utils.errors import EnvironmentUsageError, NumericError
from utils.artifacts import write_csv
from utils.training_monitor import TrainingMonitor

logger = logging.getLogger(__name__)

LEARNING_CURVE_COLUMNS = ("episode", "env_steps", "episode_return", "episode_return_smoothed",
                          "eval_return_mean", "eval_return_smoothed")


@dataclass
class EpisodeRecord:
    episode: int
    env_steps: int
    episode_return: float
    train_loss_mean: float
    eval_return_mean: float
    epsilon: float


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over the last `window` values (fewer at the start); NaNs are skipped"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return values
    finite = np.isfinite(values)
    kernel = np.ones(window)
    sums = np.convolve(np.where(finite, values, 0.0), kernel)[:len(values)]
    counts = np.convolve(finite.astype(np.float64), kernel)[:len(values)]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / counts, np.nan)


@dataclass
class TrainingLog:
    records: List[EpisodeRecord]

    COLUMNS = tuple(f.name for f in fields(EpisodeRecord))

    def __len__(self) -> int:
        return len(self.records)

    def returns(self) -> np.ndarray:
        return np.array([r.episode_return for r in self.records])

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, self.COLUMNS, (astuple(record) for record in self.records))

    def learning_curve_to_csv(self, path: Union[str, Path], window: int) -> Path:
        """Raw and smoothed episode and evaluation returns"""
        returns = self.returns()
        evals = np.array([r.eval_return_mean for r in self.records])
        eval_rows = np.isfinite(evals)
        smoothed_eval = np.full(len(evals), np.nan)
        smoothed_eval[eval_rows] = moving_average(evals[eval_rows], window)
        smoothed = moving_average(returns, window)
        rows = (
            (r.episode, r.env_steps, r.episode_return, float(s), r.eval_return_mean, float(se))
            for r, s, se in zip(self.records, smoothed, smoothed_eval)
        )
        return write_csv(path, LEARNING_CURVE_COLUMNS, rows)


def run_episode(agent: UmdqnAgent, env: Environment, eps: float, rng: np.random.Generator) -> float:
    """Undiscounted return of one episode acted by `agent` without learning; every draw comes from rng"""
    state = env.reset()
    total = 0.0
    while True:
        result = env.step(agent.select_action(state, eps, rng, expectation_rng=rng))
        total += result.reward
        if result.terminal or result.truncated:
            return total
        state = result.state


def evaluate_policy(agent: UmdqnAgent, env: Environment, episodes: int, eps: float,
                    rng: np.random.Generator) -> List[float]:
    return [run_episode(agent, env, eps, rng) for _ in range(episodes)]


def run_training(
    agent: UmdqnAgent,
    env: Environment,
    eval_env: Environment,
    acting_rng: np.random.Generator,
    evaluation_rng: np.random.Generator,
    total_steps: Optional[int] = None,
    monitor: Optional[TrainingMonitor] = None,
    checkpoint_dir: Optional[Union[str, Path]] = None,
) -> TrainingLog:
    """
    Interleave acting (every step), learning (every train_every steps) and
    target refreshes (every target_update steps); evaluate every
    eval_every_episodes completed episodes with eps_test.
    """
    config = agent.config
    total_steps = config.total_steps if total_steps is None else total_steps
    if env.n_actions != agent.n_actions or env.state_dim != agent.state_dim:
        raise EnvironmentUsageError(
            f"{env.name} has {env.n_actions} actions / {env.state_dim} features, "
            f"agent expects {agent.n_actions} / {agent.state_dim}"
        )
    monitor = monitor or TrainingMonitor()
    records: List[EpisodeRecord] = []
    state = env.reset()
    episode_return = 0.0
    episode_losses: List[float] = []

    logger.info(f"Training {agent.algorithm} on {env.name} for {total_steps} steps")
    for _ in range(total_steps):
        monitor.record_step_start()
        eps = agent.epsilon
        action = agent.select_action(state, eps, acting_rng)
        try:
            result = env.step(action)
        except Exception as e:
            logger.error(f"Environment {env.name} failed at step {agent.steps}: {e}")
            raise
        experience = Experience(state, action, result.reward, result.state, result.terminal)
        updates_before = agent.target_updates
        try:
            loss = agent.observe(experience)
        except NumericError as e:
            monitor.record_error("train_step", str(e))
            raise
        if loss is None and agent.steps % config.train_every == 0:
            monitor.record_skipped_learning()
        if agent.target_updates > updates_before:
            monitor.record_target_update()
        monitor.record_step_end(loss)
        if loss is not None:
            episode_losses.append(loss)
        episode_return += result.reward

        if checkpoint_dir is not None and agent.steps % config.checkpoint_every == 0:
            agent.save_checkpoint(Path(checkpoint_dir) / f"step_{agent.steps:08d}.json")
            monitor.record_checkpoint()

        if result.terminal or result.truncated:
            episode = len(records) + 1
            eval_mean = math.nan
            if config.eval_episodes > 0 and episode % config.eval_every_episodes == 0:
                eval_mean = float(np.mean(evaluate_policy(agent, eval_env, config.eval_episodes,
                                                          config.eps_test, evaluation_rng)))
            records.append(EpisodeRecord(
                episode=episode,
                env_steps=agent.steps,
                episode_return=episode_return,
                train_loss_mean=float(np.mean(episode_losses)) if episode_losses else math.nan,
                eval_return_mean=eval_mean,
                epsilon=eps,
            ))
            monitor.record_episode(episode_return)
            if episode % config.log_every_episodes == 0:
                logger.info(
                    f"Episode {episode} | steps {agent.steps} | return {episode_return:.3f} | "
                    f"eps {eps:.3f} | eval {eval_mean:.3f}"
                )
            state = env.reset()
            episode_return = 0.0
            episode_losses = []
        else:
            state = result.state

    logger.info(f"Training finished: {len(records)} episodes, {agent.learn_steps} learning steps")
    return TrainingLog(records)
