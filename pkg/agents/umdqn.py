"""
UMDQN agents: one per (representation, probability metric) pairing

    umdqn-kl  PDF view, Kullback-Leibler divergence
    umdqn-c   CDF view, Cramer distance
    umdqn-w   QF view,  Wasserstein distance through the quantile Huber loss
"""
import copy
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from agents.replay_memory import Experience, ExperienceBatch, ReplayMemory
from config import TrainConfig
from distributional.bellman import bellman_targets, greedy_action
from distributional.losses import (
    cramer_loss,
    kl_loss,
    pairwise_td_errors,
    reverse_kl_loss,
    wasserstein_loss,
)
from distributional.umnn import UmnnModel
from distributional.views import Representation, ReturnDistributionView, sample_grid
from engine.checkpoint import load_checkpoint, save_checkpoint
from engine.optim import Adam, clip_grad_norm
from engine.tensor import Tensor
from utils.errors import CheckpointError, ConfigValidationError, NumericError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.01
    decay: float = 10_000.0


def epsilon(t: int, schedule: EpsilonSchedule) -> float:
    """end + (start - end) * exp(-t / decay)"""
    if t < 0:
        raise ConfigValidationError("t", "step counter must be non-negative", t)
    return schedule.end + (schedule.start - schedule.end) * math.exp(-t / schedule.decay)


class UmdqnAgent(ABC):
    """Abstract base class for the UMDQN variants"""

    algorithm: str = ""
    representation: Representation

    def __init__(
        self,
        config: TrainConfig,
        state_dim: int,
        n_actions: int,
        init_rng: np.random.Generator,
        learn_rng: np.random.Generator,
        replay_rng: np.random.Generator,
    ):
        self.config = config
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.learn_rng = learn_rng
        self.replay_rng = replay_rng

        self.model = UmnnModel(
            state_dim,
            n_actions,
            dnn_hidden=config.dnn_hidden,
            umnn_hidden=config.umnn_hidden,
            n_cc=config.n_cc,
            rng=init_rng,
        )
        self.target_model = copy.deepcopy(self.model)
        domain = config.domain()
        self.view = ReturnDistributionView(
            self.representation, self.model, domain, config.latent, config.simpson_points
        )
        self.target_view = ReturnDistributionView(
            self.representation, self.target_model, domain, config.latent, config.simpson_points
        )
        self.optimizer = Adam(self.model.parameters(), lr=config.learning_rate, eps=config.adam_eps)
        self.memory = ReplayMemory(config.replay_capacity)
        self.schedule = EpsilonSchedule(config.eps_start, config.eps_end, config.eps_decay)
        self.steps = 0
        self.learn_steps = 0
        self.target_updates = 0

    # -------------------------------------------------------------- acting
    @property
    def epsilon(self) -> float:
        return epsilon(self.steps, self.schedule)

    def greedy_action(self, state, rng: Optional[np.random.Generator] = None) -> int:
        """Greedy on the main view; expectation draws come from rng, else the learning stream"""
        rng = self.learn_rng if rng is None else rng
        expectations = self.view.action_expectations(np.atleast_2d(state), self.config.n_mc, rng)
        return int(greedy_action(expectations)[0])

    def select_action(self, state, eps: float, rng: np.random.Generator,
                      expectation_rng: Optional[np.random.Generator] = None) -> int:
        """Uniform random action with probability eps, otherwise greedy on the main view"""
        if not 0.0 <= eps <= 1.0:
            raise ConfigValidationError("epsilon", "must lie in [0, 1]", eps)
        if rng.uniform() < eps:
            return int(rng.integers(self.n_actions))
        return self.greedy_action(state, expectation_rng)

    # ------------------------------------------------------------ learning
    def remember(self, experience: Experience) -> None:
        self.memory.push(experience)

    def observe(self, experience: Experience) -> Optional[float]:
        """
        Store the experience and advance the step counter; learns every
        train_every steps and refreshes the target every target_update steps.
        Returns the loss when a learning step ran.
        """
        self.remember(experience)
        self.steps += 1
        loss = None
        if self.steps % self.config.train_every == 0:
            loss = self.learn()
        if self.steps % self.config.target_update == 0:
            self.update_target()
        return loss

    def learn(self) -> Optional[float]:
        batch = self.memory.sample(self.config.batch_size, self.replay_rng)
        if batch is None:
            return None
        return self.train_step(batch)

    def sample_points(self) -> Tuple[np.ndarray, ...]:
        return sample_grid(self.view.domain, self.representation, self.learn_rng)

    def targets(self, batch: ExperienceBatch, points: np.ndarray) -> np.ndarray:
        """Bellman targets under the frozen target parameters"""
        return bellman_targets(
            self.target_view,
            batch.rewards,
            batch.next_states,
            batch.terminals,
            np.tile(points, (len(batch), 1)),
            self.config.gamma,
            self.config.n_mc,
            self.learn_rng,
        )

    @abstractmethod
    def compute_loss(self, batch: ExperienceBatch, points: Tuple[np.ndarray, ...], targets: Optional[np.ndarray] = None) -> Tensor:
        """Loss Tensor of a minibatch; targets are computed when not given"""
        pass

    def train_step(self, batch: ExperienceBatch, points: Optional[Tuple[np.ndarray, ...]] = None,
                   targets: Optional[np.ndarray] = None) -> float:
        """One optimiser step on a minibatch; returns the loss value"""
        points = points if points is not None else self.sample_points()
        loss = self.compute_loss(batch, points, targets)
        value = loss.item()
        if not np.isfinite(value):
            self.model.zero_grad()
            raise NumericError(
                f"non-finite {self.algorithm} loss at step {self.steps} "
                f"(rewards in [{batch.rewards.min():.3g}, {batch.rewards.max():.3g}], "
                f"{int(batch.terminals.sum())} terminal transitions)"
            )
        self.model.zero_grad()
        loss.backward()
        clip_grad_norm(self.optimizer.params, self.config.grad_clip)
        self.optimizer.step()
        self.learn_steps += 1
        return value

    def update_target(self) -> None:
        """theta^- <- theta"""
        self.target_model.load_state_dict(self.model.state_dict())
        self.target_updates += 1
        logger.debug(f"Target network updated at step {self.steps}")

    def _riemann_weight(self) -> float:
        if not self.config.riemann_weight:
            return 1.0
        domain = self.view.domain
        return domain.width / domain.n_z

    # --------------------------------------------------------- checkpoints
    def checkpoint_metadata(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "representation": self.representation.value,
            "env": self.config.env,
            "architecture": self.model.architecture(),
            "latent": self.config.latent,
            "steps": self.steps,
            "config": self.config.to_dict(),
        }

    def save_checkpoint(self, path: Union[str, Path]) -> Path:
        parameters = {f"main.{k}": v for k, v in self.model.state_dict().items()}
        parameters.update({f"target.{k}": v for k, v in self.target_model.state_dict().items()})
        return save_checkpoint(path, parameters, self.checkpoint_metadata())

    def load_checkpoint(self, path: Union[str, Path]) -> Dict[str, Any]:
        parameters, metadata = load_checkpoint(path)
        expected = self.checkpoint_metadata()
        for key in ("algorithm", "env", "architecture", "latent"):
            if metadata.get(key) != expected[key]:
                raise CheckpointError(
                    f"checkpoint {key} {metadata.get(key)!r} does not match the configured {expected[key]!r}"
                )
        self.model.load_state_dict({k[5:]: v for k, v in parameters.items() if k.startswith("main.")})
        target = {k[7:]: v for k, v in parameters.items() if k.startswith("target.")}
        self.target_model.load_state_dict(target or self.model.state_dict())
        self.steps = int(metadata.get("steps", 0))
        return metadata


class KlAgent(UmdqnAgent):
    """PDF view trained on the KL divergence"""

    algorithm = "umdqn-kl"
    representation = Representation.PDF

    def compute_loss(self, batch, points, targets=None):
        (z,) = points
        z = np.tile(z, (len(batch), 1))
        if targets is None:
            targets = self.targets(batch, z[0])
        model = self.view.values(batch.states, batch.actions, z)
        if self.config.kl_direction == "model_target":
            return reverse_kl_loss(targets, model, weight=self._riemann_weight())
        return kl_loss(targets, model, weight=self._riemann_weight(), mass_correction=self.config.kl_mass_correction)


class CramerAgent(UmdqnAgent):
    """CDF view trained on the Cramer distance"""

    algorithm = "umdqn-c"
    representation = Representation.CDF

    def compute_loss(self, batch, points, targets=None):
        (z,) = points
        z = np.tile(z, (len(batch), 1))
        if targets is None:
            targets = self.targets(batch, z[0])
        model = self.view.values(batch.states, batch.actions, z)
        return cramer_loss(targets, model, weight=self._riemann_weight())


class WassersteinAgent(UmdqnAgent):
    """QF view trained with the quantile Huber loss over pairwise TD errors"""

    algorithm = "umdqn-w"
    representation = Representation.QF

    def compute_loss(self, batch, points, targets=None):
        tau_i, tau_j = points
        if targets is None:
            targets = self.targets(batch, tau_j)
        tau_i = np.tile(tau_i, (len(batch), 1))
        model = self.view.values(batch.states, batch.actions, tau_i)
        delta = pairwise_td_errors(targets, model)
        return wasserstein_loss(delta, tau_i, self.config.kappa)


class AgentFactory:
    """Factory for creating UMDQN agents"""

    AGENTS = {
        "umdqn-kl": KlAgent,
        "umdqn-c": CramerAgent,
        "umdqn-w": WassersteinAgent,
    }

    @staticmethod
    def create_agent(
        config: TrainConfig,
        state_dim: int,
        n_actions: int,
        init_rng: np.random.Generator,
        learn_rng: np.random.Generator,
        replay_rng: np.random.Generator,
    ) -> UmdqnAgent:
        """Create the agent matching config.algorithm"""
        agent_class = AgentFactory.AGENTS.get(config.algorithm)
        if not agent_class:
            raise ConfigValidationError("algorithm", f"Unknown algorithm: {config.algorithm}", config.algorithm)
        return agent_class(config, state_dim, n_actions, init_rng, learn_rng, replay_rng)
