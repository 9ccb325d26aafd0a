"""
Core module - wspólna infrastruktura procedury.

Zawiera:
- StreamRNG: Deterministyczne strumienie losowości z kluczy (seed, *indeksy)
- ConfigLoader: Wczytywanie konfiguracji z defaults
- errors: Hierarchia wyjątków domenowych
"""

from .rng import StreamRNG
from .config_loader import ConfigLoader
from .errors import (
    SplitProcedureError,
    InvalidArgumentError,
    ModelMismatchError,
    NumericOverflowError,
    InvalidPartitionError,
    RatingsParseError,
    RatingsValidationError,
)

__all__ = [
    "StreamRNG", "ConfigLoader",
    "SplitProcedureError", "InvalidArgumentError", "ModelMismatchError",
    "NumericOverflowError", "InvalidPartitionError",
    "RatingsParseError", "RatingsValidationError",
]
