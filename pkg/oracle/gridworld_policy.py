"""
Optimal grid-world policy by value iteration on expected rewards
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from distributional.bellman import greedy_action
from envs.gridworld import Action, GridWorldConfig, GridWorldState, transition_distribution

logger = logging.getLogger(__name__)

VALUE_TOLERANCE = 1e-12
MAX_SWEEPS = 10_000


@dataclass
class GridWorldPolicy:
    actions: Dict[GridWorldState, int]
    values: Dict[GridWorldState, float]
    sweeps: int

    def __call__(self, state) -> int:
        return self.actions[GridWorldState(*state)]


def _action_values(config: GridWorldConfig, cells, index, values: np.ndarray) -> np.ndarray:
    """Q(s, a) = sum_s' p(s'|s,a) [mu(s') + gamma V(s')], with V = 0 on terminal cells"""
    q = np.zeros((len(cells), len(Action)))
    for i, cell in enumerate(cells):
        for a in Action:
            for landing, prob in transition_distribution(cell, a, config):
                future = 0.0 if config.is_terminal(landing) else values[index[landing]]
                q[i, int(a)] += prob * (config.reward_mean(landing) + config.gamma * future)
    return q


def optimal_policy_gridworld(
    config: Optional[GridWorldConfig] = None,
    tol: float = VALUE_TOLERANCE,
    max_sweeps: int = MAX_SWEEPS,
) -> GridWorldPolicy:
    """
    Synchronous value iteration until the largest value change drops below
    tol, then the greedy policy (ties to the lowest action index). Reward
    noise is mean-zero and does not enter.
    """
    config = config or GridWorldConfig()
    cells = config.non_terminal_states()
    index: Dict[Tuple[int, int], int] = {cell: i for i, cell in enumerate(cells)}
    values = np.zeros(len(cells))

    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        updated = _action_values(config, cells, index, values).max(axis=1)
        delta = np.max(np.abs(updated - values))
        values = updated
        if delta < tol:
            break
    else:
        logger.warning(f"Value iteration stopped after {max_sweeps} sweeps (last change {delta:.3g})")

    actions = greedy_action(_action_values(config, cells, index, values))
    logger.debug(f"Value iteration converged in {sweeps} sweeps")
    return GridWorldPolicy(
        actions={cell: int(a) for cell, a in zip(cells, actions)},
        values={cell: float(v) for cell, v in zip(cells, values)},
        sweeps=sweeps,
    )
