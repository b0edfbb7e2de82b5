"""
Minimal reverse-mode autodiff engine for small fully connected networks
"""
from .tensor import Tensor, Parameter, no_grad, enable_grad, is_grad_enabled, concatenate, where, backward
from .layers import Module, Linear, Mlp, xavier_init, apply_activation, ACTIVATIONS, POSITIVITY_DELTA
from .optim import Adam, AdamState, adam_step, clip_grad_norm, global_grad_norm, zero_grad
from .checkpoint import save_checkpoint, load_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION

__all__ = [
    'Tensor',
    'Parameter',
    'no_grad',
    'enable_grad',
    'is_grad_enabled',
    'concatenate',
    'where',
    'backward',
    'Module',
    'Linear',
    'Mlp',
    'xavier_init',
    'apply_activation',
    'ACTIVATIONS',
    'POSITIVITY_DELTA',
    'Adam',
    'AdamState',
    'adam_step',
    'clip_grad_norm',
    'global_grad_norm',
    'zero_grad',
    'save_checkpoint',
    'load_checkpoint',
    'CHECKPOINT_FORMAT',
    'CHECKPOINT_VERSION',
]
