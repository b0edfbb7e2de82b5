"""
Environment selection by name
"""
import logging
from typing import Any, Dict, Optional

import numpy as np

from envs.base import Environment
from envs.cartpole import CartPole, CartPoleConfig
from envs.gridworld import GridWorldConfig, StochasticGridWorld
from utils.errors import UnsupportedEnvironmentError

logger = logging.getLogger(__name__)


class EnvironmentFactory:
    """Factory for creating environment instances"""

    ENVIRONMENTS = {
        "gridworld": (StochasticGridWorld, GridWorldConfig),
        "cartpole": (CartPole, CartPoleConfig),
    }

    @staticmethod
    def names():
        return sorted(EnvironmentFactory.ENVIRONMENTS)

    @staticmethod
    def create_environment(
        name: str,
        rng: Optional[np.random.Generator] = None,
        options: Optional[Dict[str, Any]] = None,
    ) -> Environment:
        """Create the named environment; options override its config fields"""
        entry = EnvironmentFactory.ENVIRONMENTS.get(name)
        if not entry:
            raise UnsupportedEnvironmentError(f"Unknown environment: {name}")
        env_class, config_class = entry
        config = config_class(**(options or {}))
        return env_class(config, rng)
