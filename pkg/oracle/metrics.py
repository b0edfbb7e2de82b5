"""
Probability metrics between atom distributions
"""
import logging
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import xlogy
from scipy import stats

from oracle.empirical import EmpiricalDistribution
from utils.errors import DomainError

logger = logging.getLogger(__name__)

KDE_GRID_POINTS = 512
KDE_MIN_BANDWIDTH = 1e-3
KDE_SPAN = 4.0
DENSITY_FLOOR = 1e-300


class Metric(str, Enum):
    KL = "kl"
    CRAMER = "cramer"
    WASSERSTEIN = "wasserstein"


def cramer_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """sqrt of the integral of (F_A - F_B)^2; scipy's energy distance is sqrt(2) times this"""
    energy = stats.energy_distance(a.values, b.values, u_weights=a.probs, v_weights=b.probs)
    return float(energy / np.sqrt(2.0))


def wasserstein_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Integral of |F_A - F_B|, equal to the integral over tau of |F_A^-1 - F_B^-1|"""
    return float(stats.wasserstein_distance(a.values, b.values, u_weights=a.probs, v_weights=b.probs))


def silverman_bandwidth(dist: EmpiricalDistribution) -> float:
    """0.9 * min(std, IQR / 1.34) * n_eff^(-1/5), floored at KDE_MIN_BANDWIDTH"""
    spread = dist.std()
    iqr = float(dist.quantile(0.75) - dist.quantile(0.25))
    if iqr > 0:
        spread = min(spread, iqr / 1.34)
    return max(0.9 * spread * dist.effective_size() ** -0.2, KDE_MIN_BANDWIDTH)


def kernel_density(dist: EmpiricalDistribution, grid: np.ndarray, bandwidth: float) -> np.ndarray:
    return stats.norm.pdf((grid[:, None] - dist.values[None, :]) / bandwidth) @ dist.probs / bandwidth


def kl_divergence(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """KL(p_A || p_B) between Gaussian kernel smoothings on a shared grid"""
    h_a, h_b = silverman_bandwidth(a), silverman_bandwidth(b)
    low = min(a.values[0] - KDE_SPAN * h_a, b.values[0] - KDE_SPAN * h_b)
    high = max(a.values[-1] + KDE_SPAN * h_a, b.values[-1] + KDE_SPAN * h_b)
    grid = np.linspace(low, high, KDE_GRID_POINTS)
    p = np.maximum(kernel_density(a, grid, h_a), DENSITY_FLOOR)
    q = np.maximum(kernel_density(b, grid, h_b), DENSITY_FLOOR)
    return float(max(trapezoid(xlogy(p, p) - xlogy(p, q), grid), 0.0))


_DISTANCES = {
    Metric.KL: kl_divergence,
    Metric.CRAMER: cramer_distance,
    Metric.WASSERSTEIN: wasserstein_distance,
}


def distance(a: EmpiricalDistribution, b: EmpiricalDistribution, metric) -> float:
    if a is None or b is None or len(a) == 0 or len(b) == 0:
        raise DomainError("distance needs two non-empty distributions")
    try:
        metric = Metric(metric)
    except ValueError as e:
        raise DomainError(f"unknown metric '{metric}' (expected one of {[m.value for m in Metric]})") from e
    return _DISTANCES[metric](a, b)
