"""
Clenshaw-Curtis quadrature on [-1, 1], mapped to arbitrary intervals
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_NODE_COUNT = 32


@dataclass(frozen=True)
class ClenshawCurtisRule:
    """
    nodes   = Chebyshev extreme points cos(pi k / (count - 1)) in [-1, 1]
    weights = integration weights, summing to 2
    Exact for polynomials of degree < count.
    """
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=16)
def clenshaw_curtis_rule(count: int = DEFAULT_NODE_COUNT) -> ClenshawCurtisRule:
    if count < 2:
        raise DomainError(f"Clenshaw-Curtis needs at least 2 nodes, got {count}")
    n = count - 1
    theta = np.pi * np.arange(count) / n
    nodes = np.cos(theta)
    weights = np.zeros(count)
    inner = theta[1:-1]
    v = np.ones(n - 1)
    if n % 2 == 0:
        weights[0] = weights[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(n * inner) / (n * n - 1)
    else:
        weights[0] = weights[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
    weights[1:-1] = 2.0 * v / n
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return ClenshawCurtisRule(nodes=nodes, weights=weights)


def clenshaw_curtis(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rule: ClenshawCurtisRule = None,
) -> float:
    """Approximate the integral of f over [a, b]; f is called once with every node"""
    if a > b:
        raise DomainError(f"integration bounds out of order: a={a} > b={b}")
    rule = rule or clenshaw_curtis_rule()
    half = 0.5 * (b - a)
    points = a + half * (rule.nodes + 1.0)
    values = np.asarray(f(points), dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NumericError(f"integrand is not finite on [{a}, {b}]")
    return float(half * np.dot(rule.weights, values))
