"""
Learnt return distributions against Monte Carlo ground truth on the grid world
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from distributional.views import Representation, ReturnDistributionView
from envs.gridworld import Action, GridWorldState, StochasticGridWorld
from oracle.empirical import EmpiricalDistribution
from oracle.gridworld_policy import GridWorldPolicy, optimal_policy_gridworld
from oracle.metrics import Metric, distance
from oracle.monte_carlo import mc_return_distribution
from utils.errors import OutOfRangeError, UnsupportedEnvironmentError

logger = logging.getLogger(__name__)

DISCRETISATION_POINTS = 500
ORACLE_POLICIES = ("optimal", "learnt")


def discretise_view(view: ReturnDistributionView, state, action: int, points: int = DISCRETISATION_POINTS) -> EmpiricalDistribution:
    """
    Atom approximation of a learnt distribution:
        QF  -> quantiles at the tau cell midpoints, equal weights
        CDF -> CDF increments over a fine grid; mass outside the domain sits on its edges
        PDF -> density times cell width at the midpoints, renormalised
    """
    if view.representation is Representation.QF:
        tau = (np.arange(points) + 0.5) / points
        quantiles = view.values(np.atleast_2d(state), [action], tau[None, :], record=False).data[0]
        return EmpiricalDistribution(quantiles)

    lo, hi = view.support
    edges = np.linspace(lo, hi, points + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    if view.representation is Representation.CDF:
        cdf = np.maximum.accumulate(np.clip(view.cdf_values(state, action, edges), 0.0, 1.0))
        values = np.concatenate([[lo], mid, [hi]])
        probs = np.concatenate([[cdf[0]], np.diff(cdf), [1.0 - cdf[-1]]])
        return EmpiricalDistribution(values, probs)

    density = view.values(np.atleast_2d(state), [action], mid[None, :], record=False).data[0]
    masses = np.clip(density, 0.0, None) * (hi - lo) / points
    if masses.sum() <= 0:
        raise OutOfRangeError(f"learnt density at {state} has no mass inside [{lo}, {hi}]")
    return EmpiricalDistribution(mid, masses / masses.sum())


def state_id(cell) -> str:
    return f"{cell[0]},{cell[1]}"


@dataclass
class ComparisonRow:
    state_id: str
    action: int
    oracle_policy: str
    metric: str
    learnt_vs_oracle_distance: float
    learnt_mean: float
    oracle_mean: float


@dataclass
class OracleComparison:
    rows: List[ComparisonRow] = field(default_factory=list)
    # (state_id, action, oracle_policy) -> MC distribution
    oracles: Dict[Tuple[str, int, str], EmpiricalDistribution] = field(default_factory=dict)

    def mean_distance(self, metric, oracle_policy: str = "optimal") -> float:
        values = [r.learnt_vs_oracle_distance for r in self.rows
                  if r.metric == Metric(metric).value and r.oracle_policy == oracle_policy]
        return float(np.mean(values)) if values else float("nan")


def learnt_greedy_policy(agent, env: StochasticGridWorld) -> GridWorldPolicy:
    """Tabulates the agent's greedy action on every non-terminal cell"""
    actions = {cell: agent.greedy_action(env.encode_state(cell)) for cell in env.config.non_terminal_states()}
    return GridWorldPolicy(actions=actions, values={}, sweeps=0)


def compare_with_oracle(
    agent,
    env,
    cells: Sequence,
    n_rollouts: int,
    rng: np.random.Generator,
    actions: Optional[Iterable[int]] = None,
    metrics: Sequence[Metric] = tuple(Metric),
    points: int = DISCRETISATION_POINTS,
) -> OracleComparison:
    """
    For every requested (cell, action): MC returns under the optimal policy and
    under the agent's greedy policy, the agent's discretised distribution, and
    their distance per metric. The optimal-policy oracle draws from its own
    stream so it does not depend on the agent.
    """
    if not isinstance(env, StochasticGridWorld):
        raise UnsupportedEnvironmentError(f"oracle comparison needs the grid world, got '{env.name}'")
    optimal_rng, learnt_rng = rng.spawn(2)
    policies = {
        "optimal": (optimal_policy_gridworld(env.config), optimal_rng),
        "learnt": (learnt_greedy_policy(agent, env), learnt_rng),
    }
    actions = list(Action) if actions is None else [Action(a) for a in actions]

    result = OracleComparison()
    for cell in cells:
        cell = GridWorldState(*cell)
        if env.config.is_terminal(cell):
            raise OutOfRangeError(f"cell {tuple(cell)} is terminal; returns start from non-terminal cells")
        for action in actions:
            learnt = discretise_view(agent.view, env.encode_state(cell), int(action), points)
            for name in ORACLE_POLICIES:
                policy, stream = policies[name]
                oracle = mc_return_distribution(env, policy, cell, int(action), n_rollouts, env.gamma, stream)
                result.oracles[(state_id(cell), int(action), name)] = oracle
                for metric in metrics:
                    d = distance(learnt, oracle, metric)
                    result.rows.append(ComparisonRow(
                        state_id=state_id(cell),
                        action=int(action),
                        oracle_policy=name,
                        metric=Metric(metric).value,
                        learnt_vs_oracle_distance=d,
                        learnt_mean=learnt.mean(),
                        oracle_mean=oracle.mean(),
                    ))
            logger.info(
                f"Cell {state_id(cell)} action {action.name}: learnt mean {learnt.mean():.4f}, "
                f"optimal oracle mean {result.oracles[(state_id(cell), int(action), 'optimal')].mean():.4f}"
            )
    return result
