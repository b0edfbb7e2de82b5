"""
Distributional Bellman targets computed with the target network
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from distributional.views import Representation, ReturnDistributionView, ReturnDomain
from engine.tensor import no_grad
from utils.errors import DegenerateDiscountError, DimensionError

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


@dataclass
class OperatorInput:
    """
    Batched inputs of the operator for non-terminal transitions.
    points holds returns z (PDF/CDF) or fractions tau (QF), one row per transition.
    """
    view: ReturnDistributionView
    rewards: np.ndarray
    next_states: np.ndarray
    next_actions: np.ndarray
    points: np.ndarray
    gamma: float

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
        self.next_states = np.atleast_2d(np.asarray(self.next_states, dtype=np.float64))
        self.next_actions = np.asarray(self.next_actions, dtype=np.int64).reshape(-1)
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        rows = len(self.rewards)
        if not (len(self.next_states) == len(self.next_actions) == len(self.points) == rows):
            raise DimensionError("rewards, next states, next actions and points must have one row per transition")


def greedy_action(expectations) -> np.ndarray:
    """Row-wise argmax; values within TIE_TOLERANCE of the max resolve to the lowest index"""
    expectations = np.atleast_2d(np.asarray(expectations, dtype=np.float64))
    best = expectations.max(axis=1, keepdims=True)
    return np.argmax(expectations >= best - TIE_TOLERANCE, axis=1)


def next_action(view: ReturnDistributionView, next_states, n_mc: int, rng: np.random.Generator) -> np.ndarray:
    return greedy_action(view.action_expectations(next_states, n_mc, rng))


def operator_target(inp: OperatorInput) -> np.ndarray:
    """
    PDF: (1/gamma) p((z - r)/gamma | s', a')
    CDF: F((z - r)/gamma | s', a')
    QF:  r + gamma q(tau | s', a')
    """
    view = inp.view
    r = inp.rewards[:, None]
    with no_grad():
        c = view.model.condition(inp.next_states, inp.next_actions)
        if view.representation is Representation.QF:
            return r + inp.gamma * view.model.quantile(inp.points, c).data
        if inp.gamma <= 0.0:
            raise DegenerateDiscountError(f"{view.representation.value.upper()} targets need gamma > 0")
        shifted = (inp.points - r) / inp.gamma
        if view.representation is Representation.PDF:
            return view.model.pdf(shifted, c, view.latent).data / inp.gamma
        return view.model.cdf(shifted, c, view.latent).data


def terminal_target(representation: Representation, rewards, points, domain: ReturnDomain) -> np.ndarray:
    """
    Smoothed Dirac at r: Gaussian density (PDF), steep logistic step (CDF), constant (QF)
    """
    representation = Representation(representation)
    r = np.asarray(rewards, dtype=np.float64).reshape(-1, 1)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if representation is Representation.QF:
        return np.broadcast_to(r, points.shape).copy()
    if representation is Representation.PDF:
        return norm.pdf(points, loc=r, scale=domain.width / domain.n_z)
    slope = 4.0 * domain.n_z / domain.width
    return expit(slope * (points - r))


def bellman_targets(
    view: ReturnDistributionView,
    rewards,
    next_states,
    terminals,
    points,
    gamma: float,
    n_mc: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Targets for a whole batch: operator rows for live transitions, smoothed Diracs for terminal ones"""
    rewards = np.asarray(rewards, dtype=np.float64).reshape(-1)
    terminals = np.asarray(terminals, dtype=bool).reshape(-1)
    next_states = np.atleast_2d(np.asarray(next_states, dtype=np.float64))
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(points) == 1 and len(rewards) > 1:
        points = np.tile(points, (len(rewards), 1))

    targets = terminal_target(view.representation, rewards, points, view.domain)
    live = ~terminals
    if np.any(live):
        actions = next_action(view, next_states[live], n_mc, rng)
        targets[live] = operator_target(OperatorInput(
            view=view,
            rewards=rewards[live],
            next_states=next_states[live],
            next_actions=actions,
            points=points[live],
            gamma=gamma,
        ))
    return targets
