"""
Benchmark environments
"""
from .base import Environment, StepResult
from .gridworld import (
    Action,
    GridWorldState,
    GridWorldConfig,
    StochasticGridWorld,
    transition_distribution,
    grid_reset,
    grid_step,
    parse_state,
)
from .cartpole import CartAction, CartPoleConfig, CartPole, cartpole_reset, cartpole_step
from .registry import EnvironmentFactory

__all__ = [
    'Environment',
    'StepResult',
    'Action',
    'GridWorldState',
    'GridWorldConfig',
    'StochasticGridWorld',
    'transition_distribution',
    'grid_reset',
    'grid_step',
    'parse_state',
    'CartAction',
    'CartPoleConfig',
    'CartPole',
    'cartpole_reset',
    'cartpole_step',
    'EnvironmentFactory',
]
