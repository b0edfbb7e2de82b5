"""
Utility modules for the UMDQN lab
"""
from .errors import (
    UmdqnError,
    DimensionError,
    NumericError,
    GradientUsageError,
    DomainError,
    DegenerateDiscountError,
    OutOfRangeError,
    ResourceLimitError,
    EnvironmentUsageError,
    UnsupportedEnvironmentError,
    CheckpointError,
    ConfigValidationError,
)
from .seeding import SeedStreams, spawn_streams

__all__ = [
    'UmdqnError',
    'DimensionError',
    'NumericError',
    'GradientUsageError',
    'DomainError',
    'DegenerateDiscountError',
    'OutOfRangeError',
    'ResourceLimitError',
    'EnvironmentUsageError',
    'UnsupportedEnvironmentError',
    'CheckpointError',
    'ConfigValidationError',
    'SeedStreams',
    'spawn_streams',
]
