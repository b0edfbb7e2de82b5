"""
Stochastic 7x7 grid world

Each move goes one or two cells (50/50) in the chosen direction, clipped to
the grid. Rewards are Normal(mu, 0.1^2) with mu = 1 on the target, -1 on the
trap and 0 elsewhere; target and trap are terminal.
"""
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from envs.base import Environment, StepResult
from utils.errors import ConfigValidationError, EnvironmentUsageError, OutOfRangeError

logger = logging.getLogger(__name__)


class Action(IntEnum):
    RIGHT = 0
    UP = 1
    LEFT = 2
    DOWN = 3


MOVES = {
    Action.RIGHT: (1, 0),
    Action.UP: (0, 1),
    Action.LEFT: (-1, 0),
    Action.DOWN: (0, -1),
}


class GridWorldState(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GridWorldConfig:
    size: int = 7
    target: Tuple[int, int] = (6, 6)
    trap: Tuple[int, int] = (3, 3)
    reward_noise: float = 0.1
    double_move_prob: float = 0.5
    gamma: float = 0.5
    step_cap: int = 1000

    def __post_init__(self):
        if self.size < 2:
            raise ConfigValidationError("size", "grid needs at least 2 cells per side", self.size)
        for field_name in ("target", "trap"):
            cell = getattr(self, field_name)
            if not all(0 <= v < self.size for v in cell):
                raise ConfigValidationError(field_name, f"outside the {self.size}x{self.size} grid", cell)
        if tuple(self.target) == tuple(self.trap):
            raise ConfigValidationError("trap", "must differ from the target", self.trap)
        if not 0.0 <= self.double_move_prob <= 1.0:
            raise ConfigValidationError("double_move_prob", "must lie in [0, 1]", self.double_move_prob)
        if self.reward_noise < 0:
            raise ConfigValidationError("reward_noise", "must be non-negative", self.reward_noise)
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigValidationError("gamma", "must lie in [0, 1)", self.gamma)

    def is_terminal(self, state: Tuple[int, int]) -> bool:
        return tuple(state) in (tuple(self.target), tuple(self.trap))

    def reward_mean(self, state: Tuple[int, int]) -> float:
        if tuple(state) == tuple(self.target):
            return 1.0
        if tuple(state) == tuple(self.trap):
            return -1.0
        return 0.0

    def non_terminal_states(self) -> List[GridWorldState]:
        return [
            GridWorldState(x, y)
            for x in range(self.size)
            for y in range(self.size)
            if not self.is_terminal((x, y))
        ]


def _move(state: Tuple[int, int], action: int, distance: int, size: int) -> GridWorldState:
    dx, dy = MOVES[Action(action)]
    return GridWorldState(
        int(np.clip(state[0] + distance * dx, 0, size - 1)),
        int(np.clip(state[1] + distance * dy, 0, size - 1)),
    )


def transition_distribution(state: Tuple[int, int], action: int, config: GridWorldConfig) -> List[Tuple[GridWorldState, float]]:
    """Landing cells with their probabilities; coinciding landings are merged"""
    outcomes = {}
    for distance, prob in ((1, 1.0 - config.double_move_prob), (2, config.double_move_prob)):
        if prob == 0.0:
            continue
        landing = _move(state, action, distance, config.size)
        outcomes[landing] = outcomes.get(landing, 0.0) + prob
    return list(outcomes.items())


def grid_reset(config: GridWorldConfig, rng: np.random.Generator) -> GridWorldState:
    """Uniform over the non-terminal cells"""
    cells = config.non_terminal_states()
    return cells[int(rng.integers(len(cells)))]


def grid_step(
    state: Tuple[int, int],
    action: int,
    config: GridWorldConfig,
    rng: np.random.Generator,
) -> Tuple[GridWorldState, float, bool]:
    if config.is_terminal(state):
        raise EnvironmentUsageError(f"cannot step from terminal cell {tuple(state)}")
    if int(action) not in MOVES:
        raise OutOfRangeError(f"unknown grid-world action {action}")
    distance = 2 if rng.uniform() < config.double_move_prob else 1
    landing = _move(state, action, distance, config.size)
    reward = float(rng.normal(config.reward_mean(landing), config.reward_noise))
    return landing, reward, config.is_terminal(landing)


def parse_state(spec: str, config: GridWorldConfig) -> GridWorldState:
    """'x,y' -> GridWorldState, rejecting cells outside the grid"""
    try:
        x, y = (int(part) for part in spec.replace("(", "").replace(")", "").split(","))
    except ValueError as e:
        raise OutOfRangeError(f"cannot parse grid cell '{spec}' (expected 'x,y')") from e
    if not (0 <= x < config.size and 0 <= y < config.size):
        raise OutOfRangeError(f"cell ({x},{y}) is outside the {config.size}x{config.size} grid")
    return GridWorldState(x, y)


class StochasticGridWorld(Environment):
    name = "gridworld"
    n_actions = len(Action)
    state_dim = 2

    def __init__(self, config: Optional[GridWorldConfig] = None, rng: Optional[np.random.Generator] = None):
        super().__init__(rng)
        self.config = config or GridWorldConfig()
        self.state: Optional[GridWorldState] = None
        self.done = True

    @property
    def gamma(self) -> float:
        return self.config.gamma

    def encode_state(self, raw) -> np.ndarray:
        return np.asarray(raw, dtype=np.float64) / (self.config.size - 1)

    def reset(self) -> np.ndarray:
        return self.reset_to(grid_reset(self.config, self.rng))

    def reset_to(self, raw) -> np.ndarray:
        self.state = GridWorldState(*raw)
        self.steps = 0
        self.done = self.config.is_terminal(self.state)
        return self.encode_state(self.state)

    def step(self, action: int) -> StepResult:
        if self.state is None or self.done:
            raise EnvironmentUsageError("step() called on a finished episode; call reset() first")
        self.state, reward, terminal = grid_step(self.state, action, self.config, self.rng)
        self.steps += 1
        truncated = not terminal and self.steps >= self.config.step_cap
        self.done = terminal or truncated
        return StepResult(self.encode_state(self.state), reward, terminal, truncated)
