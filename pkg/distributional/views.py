"""
Return-distribution views over a UMNN: PDF, CDF or QF, plus expectations
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_simpson

from distributional.umnn import LATENTS, UmnnModel, latent_cdf, latent_density
from engine.tensor import Tensor, no_grad
from utils.errors import ConfigValidationError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_SIMPSON_POINTS = 201
DEFAULT_MC_SAMPLES = 256


class Representation(str, Enum):
    PDF = "pdf"
    CDF = "cdf"
    QF = "qf"


@dataclass(frozen=True)
class ReturnDomain:
    """Support [z_min, z_max] of the returns plus grid sizes"""
    z_min: float
    z_max: float
    n_z: int = 200
    n_tau: int = 200

    def __post_init__(self):
        if not (np.isfinite(self.z_min) and np.isfinite(self.z_max)):
            raise ConfigValidationError("z_min", "domain bounds must be finite", (self.z_min, self.z_max))
        if self.z_min >= self.z_max:
            raise ConfigValidationError("z_max", f"must exceed z_min={self.z_min}", self.z_max)
        if self.n_z < 2:
            raise ConfigValidationError("n_z", "must be at least 2", self.n_z)
        if self.n_tau < 2:
            raise ConfigValidationError("n_tau", "must be at least 2", self.n_tau)

    @property
    def width(self) -> float:
        return self.z_max - self.z_min


def sample_grid(domain: ReturnDomain, representation: Representation, rng: np.random.Generator) -> Tuple[np.ndarray, ...]:
    """
    PDF/CDF: (z,) with N_z uniform returns on [z_min, z_max]
    QF:      (tau_i, tau_j), two independent sets of N_tau uniform fractions
    """
    representation = Representation(representation)
    if representation is Representation.QF:
        return rng.uniform(0.0, 1.0, domain.n_tau), rng.uniform(0.0, 1.0, domain.n_tau)
    return (rng.uniform(domain.z_min, domain.z_max, domain.n_z),)


def _stratified(n: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw in each of n equal strata of [0, 1)"""
    return (np.arange(n) + rng.uniform(0.0, 1.0, n)) / n


def _interpolate_rows(grid: np.ndarray, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Linear interpolation of every row of `values` (sampled on the shared `grid`) at `points`"""
    right = np.clip(np.searchsorted(grid, points, side="right"), 1, len(grid) - 1)
    left = right - 1
    frac = (points - grid[left]) / (grid[right] - grid[left])
    return values[:, left] * (1.0 - frac) + values[:, right] * frac


class ReturnDistributionView:
    """A UMNN read as the PDF, CDF or QF of the random return"""

    def __init__(
        self,
        representation: Representation,
        model: UmnnModel,
        domain: ReturnDomain,
        latent: str = "logistic",
        simpson_points: int = DEFAULT_SIMPSON_POINTS,
    ):
        if latent not in LATENTS:
            raise ConfigValidationError("latent", f"must be one of {LATENTS}", latent)
        if simpson_points < 3 or simpson_points % 2 == 0:
            raise ConfigValidationError("simpson_points", "must be odd and at least 3", simpson_points)
        self.representation = Representation(representation)
        self.model = model
        self.domain = domain
        self.latent = latent
        self.simpson_points = simpson_points

    @property
    def n_actions(self) -> int:
        return self.model.n_actions

    @property
    def support(self) -> Tuple[float, float]:
        if self.representation is Representation.QF:
            return 0.0, 1.0
        return self.domain.z_min, self.domain.z_max

    def evaluate(self, x, c: Tensor) -> Tensor:
        """View values at points x (B, K) for conditioning rows c (B, d)"""
        if self.representation is Representation.PDF:
            return self.model.pdf(x, c, self.latent)
        if self.representation is Representation.CDF:
            return self.model.cdf(x, c, self.latent)
        return self.model.quantile(x, c)

    def values(self, states, actions, x, record: bool = True) -> Tensor:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if not record:
            with no_grad():
                return self.evaluate(x, self.model.condition(states, actions))
        return self.evaluate(x, self.model.condition(states, actions))

    # ------------------------------------------------------------ expectations
    def _grid_map(self, c: Tensor, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        g and G on a shared even grid: g is evaluated once per node, G is
        G(grid[0]) plus the cumulative composite-Simpson integral of g.
        """
        rows = c.shape[0]
        g = self.model.integrand(np.tile(grid, (rows, 1)), c).data
        start = self.model.forward(np.full((rows, 1), grid[0]), c).data
        G = start + cumulative_simpson(g, x=grid, axis=-1, initial=0.0)
        return g, G

    def conditioned_expectation(self, c: Tensor, n_mc: int, rng: np.random.Generator) -> np.ndarray:
        if n_mc < 1:
            raise DomainError(f"n_mc must be at least 1, got {n_mc}")
        with no_grad():
            c = Tensor(c.data)
            if self.representation is Representation.QF:
                tau = rng.uniform(0.0, 1.0, n_mc)
                return self.model.quantile(np.tile(tau, (c.shape[0], 1)), c).data.mean(axis=1)

            grid = np.linspace(self.domain.z_min, self.domain.z_max, self.simpson_points)
            g, G = self._grid_map(c, grid)
            density = g * latent_density(Tensor(G), self.latent).data
            z = self.domain.z_min + self.domain.width * _stratified(n_mc, rng)
            return self.domain.width * (z * _interpolate_rows(grid, density, z)).mean(axis=1)

    def expectation(self, states, actions, n_mc: int, rng: np.random.Generator) -> np.ndarray:
        with no_grad():
            c = self.model.condition(states, actions)
        return self.conditioned_expectation(c, n_mc, rng)

    def action_expectations(self, states, n_mc: int, rng: np.random.Generator) -> np.ndarray:
        """(B, n_actions) expected returns"""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        with no_grad():
            c = self.model.condition_all_actions(states)
        return self.conditioned_expectation(c, n_mc, rng).reshape(len(states), self.n_actions)

    def curve(self, state, action, points: int = 500) -> Tuple[np.ndarray, np.ndarray]:
        """Evenly spaced (x, value) curve over the view's support"""
        lo, hi = self.support
        x = np.linspace(lo, hi, points)
        values = self.values(np.atleast_2d(state), [action], x[None, :], record=False)
        return x, values.data[0]

    def cdf_values(self, state, action, z: np.ndarray) -> np.ndarray:
        """CDF of the modelled return at z, whatever the representation"""
        z = np.asarray(z, dtype=np.float64)
        with no_grad():
            c = self.model.condition(np.atleast_2d(state), [action])
            if self.representation is Representation.QF:
                tau = np.linspace(0.0, 1.0, self.simpson_points)
                quantiles = self.model.quantile(tau[None, :], c).data[0]
                return np.interp(z, quantiles, tau, left=0.0, right=1.0)
            return latent_cdf(self.model.forward(z[None, :], c), self.latent).data[0]
