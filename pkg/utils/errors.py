"""
Error hierarchy for the UMDQN lab
Every error also derives from the closest builtin exception
"""
from typing import Optional


class UmdqnError(Exception):
    """Base class for all errors raised by the lab"""


class DimensionError(UmdqnError, ValueError):
    """Array or layer widths do not agree"""


class NumericError(UmdqnError, ArithmeticError):
    """A non-finite value showed up where a finite one was required"""


class GradientUsageError(UmdqnError, RuntimeError):
    """Backward requested on a value that carries no computation record"""


class DomainError(UmdqnError, ValueError):
    """Argument outside the domain of the operation"""


class DegenerateDiscountError(DomainError):
    """PDF/CDF Bellman targets need a strictly positive discount"""


class OutOfRangeError(UmdqnError, ValueError):
    """Search left the admissible range (e.g. inversion bracket)"""


class ResourceLimitError(UmdqnError, RuntimeError):
    """A configured size cap would be exceeded"""


class EnvironmentUsageError(UmdqnError, RuntimeError):
    """Environment used out of protocol (e.g. stepping a terminal state)"""


class UnsupportedEnvironmentError(UmdqnError, ValueError):
    """Unknown environment name, or operation unavailable for it"""


class CheckpointError(UmdqnError, ValueError):
    """Checkpoint file malformed, wrong version, or incompatible with a config"""


class ConfigValidationError(UmdqnError, ValueError):
    """Invalid configuration value"""

    def __init__(self, field: str, message: str, value: Optional[object] = None):
        self.field = field
        self.value = value
        super().__init__(f"{field}: {message}")
