"""
Monte Carlo estimates of the random return
"""
import logging
from typing import Any, Callable, Tuple

import numpy as np

from envs.base import Environment
from oracle.empirical import EmpiricalDistribution
from utils.errors import DomainError

logger = logging.getLogger(__name__)

ROLLOUT_CAP = 1000

# policy(raw_state) -> action
Policy = Callable[[Any], int]


def rollout_return(env: Environment, policy: Policy, state: Any, action: int, gamma: float,
                   cap: int = ROLLOUT_CAP) -> Tuple[float, bool]:
    """Discounted return of one rollout starting with (state, action); second item flags truncation"""
    env.reset_to(state)
    total, discount = 0.0, 1.0
    for t in range(cap):
        result = env.step(action)
        total += discount * result.reward
        discount *= gamma
        if result.terminal:
            return total, False
        if result.truncated:
            break
        action = policy(env.state)
    return total, True


def mc_return_distribution(
    env: Environment,
    policy: Policy,
    state: Any,
    action: int,
    n_rollouts: int,
    gamma: float,
    rng: np.random.Generator,
    cap: int = ROLLOUT_CAP,
) -> EmpiricalDistribution:
    """n_rollouts independent returns from (state, action) then policy, as equal-weight atoms"""
    if n_rollouts < 1:
        raise DomainError(f"n_rollouts must be at least 1, got {n_rollouts}")
    env.reseed(rng)
    samples = np.empty(n_rollouts)
    truncated = 0
    for i in range(n_rollouts):
        samples[i], cut = rollout_return(env, policy, state, action, gamma, cap)
        truncated += cut
    if truncated:
        logger.warning(f"{truncated}/{n_rollouts} rollouts from {state} truncated after {cap} steps")
    return EmpiricalDistribution.from_samples(samples)
