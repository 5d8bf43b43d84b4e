"""
Error hierarchy for the hicmapper pipeline.

Every error carries the process exit code the CLI uses when it is raised
out of a stage.
"""

from typing import Optional, Sequence


class HicMapperError(Exception):
    """Base class for pipeline errors."""
    exit_code = 1


class InputParseError(HicMapperError):
    """Malformed input file or record."""
    exit_code = 3

    def __init__(self, message: str, line_number: Optional[int] = None, source: Optional[str] = None):
        self.line_number = line_number
        self.source = source
        location = ""
        if source:
            location += f"{source}"
        if line_number is not None:
            location += f"{':' if source else 'line '}{line_number}"
        super().__init__(f"{location}: {message}" if location else message)


class ParameterRangeError(HicMapperError, ValueError):
    """A parameter lies outside its documented range."""
    exit_code = 4


class PositionRangeError(ParameterRangeError):
    """A fragment position falls outside the binned coordinate range."""
    pass


class DegenerateInputError(HicMapperError):
    """Input is well formed but the requested statistic is undefined on it."""
    exit_code = 5


class DegenerateFilterError(DegenerateInputError):
    """A filter coordinate is constant on every δ-neighbour pair."""
    pass


class RankDeficiencyError(DegenerateInputError):
    """Fewer positive Gram eigenvalues than requested filter coordinates."""

    def __init__(self, message: str, spectrum: Sequence[float] = ()):
        self.spectrum = [float(v) for v in spectrum]
        super().__init__(message)


class EmptyInputError(DegenerateInputError):
    """An empty graph or collection where at least one element is required."""
    pass


class DimensionError(HicMapperError, ValueError):
    """Shapes or coordinate counts do not match."""
    exit_code = 6
