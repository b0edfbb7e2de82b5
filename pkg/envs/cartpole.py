"""
Cart-pole balancing with the classic Euler-integrated dynamics
"""
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Tuple

import numpy as np

from envs.base import Environment, StepResult
from utils.errors import ConfigValidationError, EnvironmentUsageError, OutOfRangeError

logger = logging.getLogger(__name__)


class CartAction(IntEnum):
    LEFT = 0
    RIGHT = 1


@dataclass(frozen=True)
class CartPoleConfig:
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    force: float = 10.0
    tau: float = 0.02
    angle_limit: float = 12 * 2 * math.pi / 360
    position_limit: float = 2.4
    max_steps: int = 200
    gamma: float = 0.99
    init_range: float = 0.05

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigValidationError("max_steps", "must be positive", self.max_steps)
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigValidationError("gamma", "must lie in [0, 1)", self.gamma)


def cartpole_reset(config: CartPoleConfig, rng: np.random.Generator) -> np.ndarray:
    """(x, x_dot, theta, theta_dot) drawn uniformly in +/- init_range"""
    return rng.uniform(-config.init_range, config.init_range, size=4)


def cartpole_step(state: np.ndarray, action: int, config: CartPoleConfig) -> Tuple[np.ndarray, float, bool]:
    if int(action) not in (CartAction.LEFT, CartAction.RIGHT):
        raise OutOfRangeError(f"unknown cart-pole action {action}")
    x, x_dot, theta, theta_dot = state
    force = config.force if action == CartAction.RIGHT else -config.force
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    total_mass = config.cart_mass + config.pole_mass
    pole_moment = config.pole_mass * config.half_length
    temp = (force + pole_moment * theta_dot ** 2 * sin_t) / total_mass
    theta_acc = (config.gravity * sin_t - cos_t * temp) / (
        config.half_length * (4.0 / 3.0 - config.pole_mass * cos_t ** 2 / total_mass)
    )
    x_acc = temp - pole_moment * theta_acc * cos_t / total_mass

    x = x + config.tau * x_dot
    x_dot = x_dot + config.tau * x_acc
    theta = theta + config.tau * theta_dot
    theta_dot = theta_dot + config.tau * theta_acc

    next_state = np.array([x, x_dot, theta, theta_dot])
    terminal = bool(abs(x) > config.position_limit or abs(theta) > config.angle_limit)
    return next_state, 1.0, terminal


class CartPole(Environment):
    name = "cartpole"
    n_actions = len(CartAction)
    state_dim = 4

    def __init__(self, config: Optional[CartPoleConfig] = None, rng: Optional[np.random.Generator] = None):
        super().__init__(rng)
        self.config = config or CartPoleConfig()
        self.state: Optional[np.ndarray] = None
        self.done = True

    @property
    def gamma(self) -> float:
        return self.config.gamma

    def encode_state(self, raw) -> np.ndarray:
        return np.asarray(raw, dtype=np.float64).copy()

    def reset(self) -> np.ndarray:
        return self.reset_to(cartpole_reset(self.config, self.rng))

    def reset_to(self, raw) -> np.ndarray:
        self.state = np.asarray(raw, dtype=np.float64).copy()
        self.steps = 0
        self.done = False
        return self.encode_state(self.state)

    def step(self, action: int) -> StepResult:
        if self.state is None or self.done:
            raise EnvironmentUsageError("step() called on a finished episode; call reset() first")
        self.state, reward, terminal = cartpole_step(self.state, action, self.config)
        self.steps += 1
        truncated = not terminal and self.steps >= self.config.max_steps
        self.done = terminal or truncated
        return StepResult(self.encode_state(self.state), reward, terminal, truncated)
