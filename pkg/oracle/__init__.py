"""
Ground truth: Monte Carlo returns, exact operators on small MDPs, metrics
"""
from .empirical import EmpiricalDistribution
from .metrics import Metric, distance, cramer_distance, wasserstein_distance, kl_divergence
from .discrete_mdp import (
    DiscreteMdp,
    MdpEnvironment,
    exact_operator,
    qf_approx_operator,
    random_atom_table,
    random_mdp,
    random_policy,
    zero_atom_table,
)
from .monte_carlo import mc_return_distribution
from .gridworld_policy import GridWorldPolicy, optimal_policy_gridworld
from .contraction import ContractionReport, contraction_probe, kl_expansion_witness, sup_distance
from .comparison import OracleComparison, compare_with_oracle, discretise_view

__all__ = [
    'EmpiricalDistribution',
    'Metric',
    'distance',
    'cramer_distance',
    'wasserstein_distance',
    'kl_divergence',
    'DiscreteMdp',
    'MdpEnvironment',
    'exact_operator',
    'qf_approx_operator',
    'random_atom_table',
    'random_mdp',
    'random_policy',
    'zero_atom_table',
    'mc_return_distribution',
    'GridWorldPolicy',
    'optimal_policy_gridworld',
    'ContractionReport',
    'contraction_probe',
    'kl_expansion_witness',
    'sup_distance',
    'OracleComparison',
    'compare_with_oracle',
    'discretise_view',
]
