"""
Small discrete MDPs with finite reward supports, and the exact and
quantile-averaging distributional Bellman operators acting on atom tables
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from envs.base import Environment, StepResult
from oracle.empirical import EmpiricalDistribution
from utils.errors import DomainError, EnvironmentUsageError, OutOfRangeError, ResourceLimitError

logger = logging.getLogger(__name__)

ATOM_CAP = 1_000_000
ROW_TOLERANCE = 1e-12

# AtomTable[s][a] is the return distribution of (s, a)
AtomTable = List[List[EmpiricalDistribution]]


@dataclass
class DiscreteMdp:
    transitions: np.ndarray                       # (S, A, S)
    rewards: List[List[EmpiricalDistribution]]    # rewards[s][a]
    gamma: float
    terminal: np.ndarray                          # (S,) bool

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.terminal = np.asarray(self.terminal, dtype=bool)
        if self.transitions.ndim != 3 or self.transitions.shape[0] != self.transitions.shape[2]:
            raise DomainError(f"transition table must be (S, A, S), got {self.transitions.shape}")
        if np.any(self.transitions < 0) or not np.allclose(self.transitions.sum(axis=2), 1.0, atol=ROW_TOLERANCE):
            raise DomainError("transition rows must be probability vectors")
        if self.terminal.shape != (self.n_states,):
            raise DomainError(f"terminal mask needs {self.n_states} entries")
        if len(self.rewards) != self.n_states or any(len(row) != self.n_actions for row in self.rewards):
            raise DomainError(f"reward table must be {self.n_states} x {self.n_actions}")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma}")

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    def non_terminal_pairs(self):
        for s in range(self.n_states):
            if not self.terminal[s]:
                for a in range(self.n_actions):
                    yield s, a


def random_atoms(rng: np.random.Generator, max_atoms: int = 4, low: float = -1.0, high: float = 1.0) -> EmpiricalDistribution:
    count = int(rng.integers(1, max_atoms + 1))
    return EmpiricalDistribution(rng.uniform(low, high, count), rng.dirichlet(np.ones(count)))


def random_mdp(
    rng: np.random.Generator,
    n_states: int = 5,
    n_actions: int = 2,
    max_reward_atoms: int = 4,
    gamma: float = 0.9,
    n_terminal: int = 1,
) -> DiscreteMdp:
    """Dirichlet transition rows; the last n_terminal states are terminal"""
    if not 0 <= n_terminal < n_states:
        raise DomainError(f"need at least one non-terminal state, got {n_terminal} terminal of {n_states}")
    transitions = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    rewards = [[random_atoms(rng, max_reward_atoms) for _ in range(n_actions)] for _ in range(n_states)]
    terminal = np.zeros(n_states, dtype=bool)
    terminal[n_states - n_terminal:] = True
    return DiscreteMdp(transitions, rewards, gamma, terminal)


def random_atom_table(mdp: DiscreteMdp, rng: np.random.Generator, max_atoms: int = 4, scale: float = 2.0) -> AtomTable:
    """Random return distributions; terminal rows hold a point mass at 0"""
    return [
        [
            EmpiricalDistribution.point_mass(0.0) if mdp.terminal[s] else random_atoms(rng, max_atoms, -scale, scale)
            for _ in range(mdp.n_actions)
        ]
        for s in range(mdp.n_states)
    ]


def zero_atom_table(mdp: DiscreteMdp) -> AtomTable:
    return [[EmpiricalDistribution.point_mass(0.0) for _ in range(mdp.n_actions)] for _ in range(mdp.n_states)]


def random_policy(mdp: DiscreteMdp, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(mdp.n_actions, size=mdp.n_states)


def _check_policy(mdp: DiscreteMdp, policy: Sequence[int]) -> np.ndarray:
    policy = np.asarray(policy, dtype=int)
    if policy.shape != (mdp.n_states,) or np.any(policy < 0) or np.any(policy >= mdp.n_actions):
        raise OutOfRangeError(f"policy must map {mdp.n_states} states to actions in [0, {mdp.n_actions})")
    return policy


def exact_operator(mdp: DiscreteMdp, table: AtomTable, policy: Sequence[int], atom_cap: int = ATOM_CAP) -> AtomTable:
    """
    (T Z)(s, a) = mixture over (r, s') of r + gamma * Z(s', pi(s')), where a
    terminal s' contributes r alone. Terminal rows are carried over unchanged.
    """
    policy = _check_policy(mdp, policy)
    out = [list(row) for row in table]
    for s, a in mdp.non_terminal_pairs():
        reward = mdp.rewards[s][a]
        values, probs = [], []
        for s_next in np.flatnonzero(mdp.transitions[s, a] > 0):
            p = mdp.transitions[s, a, s_next]
            if mdp.terminal[s_next]:
                values.append(reward.values)
                probs.append(p * reward.probs)
                continue
            z = table[s_next][policy[s_next]]
            values.append((reward.values[:, None] + mdp.gamma * z.values[None, :]).ravel())
            probs.append((p * reward.probs[:, None] * z.probs[None, :]).ravel())
        count = sum(len(v) for v in values)
        if count > atom_cap:
            raise ResourceLimitError(f"operator on ({s}, {a}) would create {count} atoms (cap {atom_cap})")
        out[s][a] = EmpiricalDistribution(np.concatenate(values), np.concatenate(probs))
    return out


def qf_approx_operator(mdp: DiscreteMdp, table: AtomTable, policy: Sequence[int], atom_cap: int = ATOM_CAP) -> AtomTable:
    """
    Quantile-averaging target q(tau) = E_(r,s')[r + gamma * q_(s',pi(s'))(tau)].
    The averaged quantile function is constant between the cumulative levels
    of the successor distributions, so it is evaluated exactly on their union.
    """
    policy = _check_policy(mdp, policy)
    out = [list(row) for row in table]
    for s, a in mdp.non_terminal_pairs():
        reward_mean = mdp.rewards[s][a].mean()
        successors = [
            (mdp.transitions[s, a, s_next], table[s_next][policy[s_next]])
            for s_next in np.flatnonzero(mdp.transitions[s, a] > 0)
            if not mdp.terminal[s_next]
        ]
        levels = np.unique(np.concatenate([[0.0, 1.0]] + [z.cumulative for _, z in successors]))
        if len(levels) > atom_cap:
            raise ResourceLimitError(f"operator on ({s}, {a}) would create {len(levels)} atoms (cap {atom_cap})")
        widths = np.diff(levels)
        keep = widths > 0
        mid = 0.5 * (levels[:-1] + levels[1:])[keep]
        values = np.full(len(mid), reward_mean)
        for p, z in successors:
            values = values + mdp.gamma * p * z.quantile(mid)
        out[s][a] = EmpiricalDistribution(values, widths[keep] / widths[keep].sum())
    return out


class MdpEnvironment(Environment):
    """Samples episodes from a DiscreteMdp; states are one-hot encoded"""

    name = "discrete-mdp"

    def __init__(self, mdp: DiscreteMdp, rng: Optional[np.random.Generator] = None, step_cap: int = 1000):
        super().__init__(rng)
        self.mdp = mdp
        self.n_actions = mdp.n_actions
        self.state_dim = mdp.n_states
        self.step_cap = step_cap
        self.state: Optional[int] = None
        self.done = True

    @property
    def gamma(self) -> float:
        return self.mdp.gamma

    def encode_state(self, raw) -> np.ndarray:
        return np.eye(self.mdp.n_states)[int(raw)]

    def reset(self) -> np.ndarray:
        candidates = np.flatnonzero(~self.mdp.terminal)
        return self.reset_to(int(self.rng.choice(candidates)))

    def reset_to(self, raw) -> np.ndarray:
        if not 0 <= int(raw) < self.mdp.n_states:
            raise OutOfRangeError(f"state {raw} outside [0, {self.mdp.n_states})")
        self.state = int(raw)
        self.steps = 0
        self.done = bool(self.mdp.terminal[self.state])
        return self.encode_state(self.state)

    def step(self, action: int) -> StepResult:
        if self.state is None or self.done:
            raise EnvironmentUsageError("step() called on a finished episode; call reset() first")
        if not 0 <= int(action) < self.mdp.n_actions:
            raise OutOfRangeError(f"action {action} outside [0, {self.mdp.n_actions})")
        reward_dist = self.mdp.rewards[self.state][int(action)]
        reward = float(self.rng.choice(reward_dist.values, p=reward_dist.probs))
        self.state = int(self.rng.choice(self.mdp.n_states, p=self.mdp.transitions[self.state, int(action)]))
        self.steps += 1
        terminal = bool(self.mdp.terminal[self.state])
        truncated = not terminal and self.steps >= self.step_cap
        self.done = terminal or truncated
        return StepResult(self.encode_state(self.state), reward, terminal, truncated)
