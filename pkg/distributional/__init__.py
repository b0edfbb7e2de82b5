"""
UMNN return distributions, training losses and Bellman targets
"""
from .quadrature import ClenshawCurtisRule, clenshaw_curtis_rule, clenshaw_curtis, DEFAULT_NODE_COUNT
from .umnn import UmnnModel, ConditionedIntegrand, LATENTS, latent_cdf, latent_density
from .views import Representation, ReturnDomain, ReturnDistributionView, sample_grid
from .losses import kl_loss, reverse_kl_loss, cramer_loss, quantile_huber, wasserstein_loss, pairwise_td_errors
from .bellman import OperatorInput, greedy_action, next_action, operator_target, terminal_target, bellman_targets

__all__ = [
    'ClenshawCurtisRule',
    'clenshaw_curtis_rule',
    'clenshaw_curtis',
    'DEFAULT_NODE_COUNT',
    'UmnnModel',
    'ConditionedIntegrand',
    'LATENTS',
    'latent_cdf',
    'latent_density',
    'Representation',
    'ReturnDomain',
    'ReturnDistributionView',
    'sample_grid',
    'kl_loss',
    'reverse_kl_loss',
    'cramer_loss',
    'quantile_huber',
    'wasserstein_loss',
    'pairwise_td_errors',
    'OperatorInput',
    'greedy_action',
    'next_action',
    'operator_target',
    'terminal_target',
    'bellman_targets',
]
