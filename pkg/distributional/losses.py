"""
Training losses in their discretised forms

All functions take the Bellman target as a constant array and the model
values as a Tensor; only the model side receives gradients. Each returns a
scalar Tensor summed over the batch.
"""
import logging

import numpy as np
from scipy.special import xlogy

from engine.tensor import Tensor, where
from utils.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)

KL_FLOOR = 1e-12
DEFAULT_KAPPA = 1.0


def _check_pair(target: np.ndarray, model: Tensor) -> np.ndarray:
    target = np.asarray(target, dtype=np.float64)
    if target.shape != model.shape:
        raise DimensionError(f"target shape {target.shape} != model shape {model.shape}")
    return target


def kl_loss(
    target,
    model: Tensor,
    floor: float = KL_FLOOR,
    weight: float = 1.0,
    mass_correction: bool = False,
) -> Tensor:
    """
    sum y log(y / max(G, floor)). With mass_correction the term (G - y) is
    added, which keeps the value unchanged when both sides integrate to the
    same mass and makes the gradient vanish wherever G = y.
    """
    y = _check_pair(target, model)
    if np.any(y < 0):
        raise DomainError("KL targets must be non-negative")
    log_model = model.clamp_min(floor).log()
    loss = float(np.sum(xlogy(y, y))) - (log_model * y).sum()
    if mass_correction:
        loss = loss + (model - y).sum()
    return loss * weight


def reverse_kl_loss(target, model: Tensor, floor: float = KL_FLOOR, weight: float = 1.0) -> Tensor:
    """sum G log(max(G, floor) / max(y, floor)); model-to-target direction"""
    y = _check_pair(target, model)
    if np.any(y < 0):
        raise DomainError("KL targets must be non-negative")
    log_ratio = model.clamp_min(floor).log() - np.log(np.maximum(y, floor))
    return (model * log_ratio).sum() * weight


def cramer_loss(target, model: Tensor, weight: float = 1.0) -> Tensor:
    """Per-row root of the summed squared CDF differences, summed over rows"""
    y = _check_pair(target, model)
    squared = (model - y) ** 2
    return (squared.sum(axis=-1) * weight).sqrt().sum()


def quantile_huber(x, tau, kappa: float = DEFAULT_KAPPA) -> Tensor:
    """|tau - 1{x < 0}| * H_kappa(x) / kappa with the Huber function H_kappa"""
    if kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    x = Tensor.lift(x)
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau < 0) or np.any(tau > 1):
        raise DomainError("quantile fractions must lie in [0, 1]")
    magnitude = x.abs()
    huber = where(magnitude.data <= kappa, x * x * 0.5, (magnitude - 0.5 * kappa) * kappa)
    asymmetry = np.abs(tau - (x.data < 0))
    return huber * asymmetry * (1.0 / kappa)


def wasserstein_loss(delta: Tensor, tau, kappa: float = DEFAULT_KAPPA) -> Tensor:
    """
    delta: (B, N_i, N_j) pairwise TD errors target_j - model_i
    tau:   (B, N_i) fractions at which the model quantiles were taken
    Sum over i of the mean over j of the quantile Huber loss, summed over the batch.
    """
    delta = Tensor.lift(delta)
    tau = np.asarray(tau, dtype=np.float64)
    if delta.ndim != 3 or tau.shape != delta.shape[:2]:
        raise DimensionError(f"delta {delta.shape} and tau {tau.shape} do not pair up")
    return quantile_huber(delta, tau[:, :, None], kappa).mean(axis=2).sum()


def pairwise_td_errors(target, model: Tensor) -> Tensor:
    """(B, N_j) targets and (B, N_i) model quantiles -> (B, N_i, N_j)"""
    target = np.asarray(target, dtype=np.float64)
    rows, n_i = model.shape
    if target.shape[0] != rows:
        raise DimensionError(f"{target.shape[0]} target rows but {rows} model rows")
    return target[:, None, :] - model.reshape(rows, n_i, 1)
