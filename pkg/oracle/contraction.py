"""
Empirical contraction checks of the distributional Bellman operator
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from oracle.discrete_mdp import (
    AtomTable,
    DiscreteMdp,
    exact_operator,
    random_atom_table,
    random_mdp,
    random_policy,
)
from oracle.empirical import EmpiricalDistribution
from oracle.metrics import Metric, distance
from utils.errors import DomainError

logger = logging.getLogger(__name__)

MIN_DISTANCE = 1e-12


@dataclass
class ContractionReport:
    metric: Metric
    gamma: float
    trials: int
    ratios: List[float] = field(default_factory=list)
    skipped: int = 0
    witness_ratio: Optional[float] = None

    @property
    def search_max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else float("nan")

    @property
    def max_ratio(self) -> float:
        """Largest ratio over the random trials and the constructed witness, if any"""
        candidates = self.ratios + ([self.witness_ratio] if self.witness_ratio is not None else [])
        return max(candidates) if candidates else float("nan")

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else float("nan")

    def summary(self) -> dict:
        return {
            "metric": self.metric.value,
            "gamma": self.gamma,
            "trials": self.trials,
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "search_max_ratio": self.search_max_ratio,
            "witness_ratio": self.witness_ratio if self.witness_ratio is not None else float("nan"),
        }


def sup_distance(mdp: DiscreteMdp, first: AtomTable, second: AtomTable, metric) -> float:
    """Largest distance over the non-terminal (s, a) pairs"""
    return max(distance(first[s][a], second[s][a], metric) for s, a in mdp.non_terminal_pairs())


def contraction_probe(
    mdp: Optional[DiscreteMdp],
    metric,
    trials: int,
    rng: np.random.Generator,
    gamma: float = 0.9,
) -> ContractionReport:
    """
    Ratio sup d(TZ1, TZ2) / sup d(Z1, Z2) over random atom-table pairs under a
    random fixed policy. With mdp=None every trial draws a fresh 5-state,
    2-action MDP.

    Exact KL between atom tables is invariant under z -> r + gamma z and
    jointly convex, so random pairs do not push it past 1. The KL report also
    carries the ratio of the constructed witness pair, which exceeds 1
    through the kernel smoothing that gives atom distributions a density.
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    metric = Metric(metric)
    report = ContractionReport(metric, mdp.gamma if mdp is not None else gamma, trials)
    for trial in range(trials):
        current = mdp if mdp is not None else random_mdp(rng, gamma=gamma)
        policy = random_policy(current, rng)
        first = random_atom_table(current, rng)
        second = random_atom_table(current, rng)
        before = sup_distance(current, first, second, metric)
        if before < MIN_DISTANCE:
            report.skipped += 1
            continue
        after = sup_distance(current, exact_operator(current, first, policy), exact_operator(current, second, policy), metric)
        report.ratios.append(after / before)
    if metric is Metric.KL:
        report.witness_ratio = kl_expansion_witness(report.gamma)
    logger.info(
        f"Contraction check ({metric.value}): max ratio {report.max_ratio:.6f} over "
        f"{len(report.ratios)} trials at gamma={report.gamma}"
    )
    return report


def kl_witness_mdp(gamma: float = 0.9, reward_step: float = 0.01) -> DiscreteMdp:
    """One self-looping state with reward +-reward_step, plus an unreachable terminal state"""
    transitions = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
    reward = EmpiricalDistribution([-reward_step, reward_step], [0.5, 0.5])
    rewards = [[reward], [EmpiricalDistribution.point_mass(0.0)]]
    return DiscreteMdp(transitions, rewards, gamma, np.array([False, True]))


def kl_expansion_witness(gamma: float = 0.9) -> float:
    """
    KL ratio of a fixed pair on the witness MDP. Convolution with the reward
    doubles the atom count, so the smoothed densities sharpen and the
    divergence grows although the underlying atom weights are unchanged.
    """
    mdp = kl_witness_mdp(gamma)
    first = [[EmpiricalDistribution([0.0, 1.0], [0.5, 0.5])], [EmpiricalDistribution.point_mass(0.0)]]
    second = [[EmpiricalDistribution([0.0, 1.0], [0.3, 0.7])], [EmpiricalDistribution.point_mass(0.0)]]
    policy = [0, 0]
    before = sup_distance(mdp, first, second, Metric.KL)
    after = sup_distance(mdp, exact_operator(mdp, first, policy), exact_operator(mdp, second, policy), Metric.KL)
    ratio = after / before
    logger.info(f"KL witness: {before:.6g} -> {after:.6g} (ratio {ratio:.4f})")
    return ratio
