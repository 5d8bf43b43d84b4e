"""
Pydantic models for extended persistence diagrams and bootstrap reports.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator


class PointKind(str, Enum):
    """Extended persistence point types."""
    ORD0 = "Ord0"
    EXT0 = "Ext0"
    EXT1 = "Ext1"
    REL1 = "Rel1"


class DiagramPoint(BaseModel):
    """A typed point of an extended persistence diagram."""
    kind: PointKind
    birth: float
    death: float

    @computed_field
    @property
    def size(self) -> float:
        """L∞ distance to the diagonal."""
        return abs(self.death - self.birth) / 2.0


class ExtendedDiagram(BaseModel):
    """Extended diagram of one filter coordinate."""
    filter_coordinate: int = Field(ge=0)
    points: List[DiagramPoint] = Field(default_factory=list)

    def of_kind(self, kind: PointKind) -> List[DiagramPoint]:
        return [point for point in self.points if point.kind == kind]

    def count(self, kind: PointKind) -> int:
        return len(self.of_kind(kind))

    @computed_field
    @property
    def max_size(self) -> float:
        return max((point.size for point in self.points), default=0.0)


class BootstrapConfig(BaseModel):
    """Bootstrap run parameters."""
    n_iterations: int = Field(100, ge=1)
    seed: int
    confidence_level: float = Field(0.90, gt=0.0, lt=1.0)


class PointConfidence(BaseModel):
    """Confidence annotation for one diagram point."""
    coordinate: int
    point: DiagramPoint
    confidence: float = Field(ge=0.0, le=1.0)
    significant: bool


class ConfidenceReport(BaseModel):
    """Bootstrap distance distribution and per-point confidence."""
    config: BootstrapConfig
    distances: List[float]
    d_c: float
    per_point: List[PointConfidence] = Field(default_factory=list)
    coordinate_distances: List[List[float]] = Field(default_factory=list)
    coordinate_d_c: List[float] = Field(default_factory=list)
    empty_iterations: int = 0

    @field_validator("distances")
    @classmethod
    def _sorted(cls, value: List[float]) -> List[float]:
        return sorted(value)

    @computed_field
    @property
    def n_significant(self) -> int:
        return sum(1 for record in self.per_point if record.significant)

    def confidence_of(self, coordinate: int, kind: PointKind) -> List[float]:
        """Confidences of every point of one kind on one coordinate."""
        return [
            record.confidence for record in self.per_point
            if record.coordinate == coordinate and record.point.kind == kind
        ]

    def best(self, kind: PointKind) -> Optional[PointConfidence]:
        """Largest point of a kind across coordinates."""
        candidates = [record for record in self.per_point if record.point.kind == kind]
        if not candidates:
            return None
        return max(candidates, key=lambda record: record.point.size)
