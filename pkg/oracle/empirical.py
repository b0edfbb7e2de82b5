"""
Finite atom distributions used as ground truth
"""
import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from utils.errors import DomainError

logger = logging.getLogger(__name__)

MERGE_TOLERANCE = 1e-12
MASS_TOLERANCE = 1e-12


class EmpiricalDistribution:
    """
    Sorted atoms (value, probability). Atoms closer than MERGE_TOLERANCE are
    merged; probabilities are renormalised after checking they sum to 1.
    """

    def __init__(self, values: Sequence[float], probs: Sequence[float] = None):
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise DomainError("an empirical distribution needs at least one atom")
        if probs is None:
            probs = np.full(values.size, 1.0 / values.size)
        probs = np.asarray(probs, dtype=np.float64).reshape(-1)
        if probs.shape != values.shape:
            raise DomainError(f"{values.size} values but {probs.size} probabilities")
        if np.any(probs < 0) or not np.all(np.isfinite(values)):
            raise DomainError("atoms need finite values and non-negative probabilities")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"probabilities sum to {total}, not 1")

        order = np.argsort(values, kind="stable")
        values, probs = values[order], probs[order] / total
        starts = np.concatenate([[True], np.diff(values) > MERGE_TOLERANCE])
        index = np.flatnonzero(starts)
        self.values = values[index]
        self.probs = np.add.reduceat(probs, index)
        keep = self.probs > 0
        if np.any(keep):
            self.values, self.probs = self.values[keep], self.probs[keep]

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "EmpiricalDistribution":
        return cls(np.fromiter(samples, dtype=np.float64))

    @classmethod
    def point_mass(cls, value: float) -> "EmpiricalDistribution":
        return cls([value], [1.0])

    @classmethod
    def mixture(cls, components: Sequence[Tuple[float, "EmpiricalDistribution"]]) -> "EmpiricalDistribution":
        values = np.concatenate([d.values for _, d in components])
        probs = np.concatenate([w * d.probs for w, d in components])
        return cls(values, probs)

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"EmpiricalDistribution(atoms={len(self)}, mean={self.mean():.6g})"

    @property
    def cumulative(self) -> np.ndarray:
        levels = np.cumsum(self.probs)
        levels[-1] = 1.0
        return levels

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def variance(self) -> float:
        return float(np.dot((self.values - self.mean()) ** 2, self.probs))

    def std(self) -> float:
        return float(np.sqrt(self.variance()))

    def effective_size(self) -> float:
        return float(1.0 / np.sum(self.probs ** 2))

    def cdf(self, x) -> np.ndarray:
        """P(Z <= x)"""
        index = np.searchsorted(self.values, np.asarray(x, dtype=np.float64), side="right")
        return np.concatenate([[0.0], self.cumulative])[index]

    def quantile(self, tau) -> np.ndarray:
        """inf {z : F(z) >= tau}"""
        tau = np.asarray(tau, dtype=np.float64)
        if np.any(tau < 0) or np.any(tau > 1):
            raise DomainError("quantile fractions must lie in [0, 1]")
        index = np.searchsorted(self.cumulative, tau - MASS_TOLERANCE, side="left")
        return self.values[np.minimum(index, len(self.values) - 1)]

    def affine(self, shift: float, scale: float) -> "EmpiricalDistribution":
        """Distribution of shift + scale * Z"""
        return EmpiricalDistribution(shift + scale * self.values, self.probs)

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def same_as(self, other: "EmpiricalDistribution", tol: float = 1e-10) -> bool:
        return (
            len(self) == len(other)
            and np.allclose(self.values, other.values, atol=tol, rtol=0)
            and np.allclose(self.probs, other.probs, atol=tol, rtol=0)
        )
