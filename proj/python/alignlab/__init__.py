from ._alignlab import *  # noqa: F401,F403
from ._alignlab import (
    BudgetError,
    ConfigError,
    DimensionError,
    DomainError,
    Error,
    PreconditionError,
)

__version__ = "0.1.0"
