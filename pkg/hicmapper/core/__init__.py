"""
Core configuration and error types.
"""

from .config import Settings, settings
from .errors import (
    HicMapperError,
    InputParseError,
    ParameterRangeError,
    PositionRangeError,
    DegenerateInputError,
    DegenerateFilterError,
    RankDeficiencyError,
    EmptyInputError,
    DimensionError,
)

__all__ = [
    "Settings",
    "settings",
    "HicMapperError",
    "InputParseError",
    "ParameterRangeError",
    "PositionRangeError",
    "DegenerateInputError",
    "DegenerateFilterError",
    "RankDeficiencyError",
    "EmptyInputError",
    "DimensionError",
]
