"""
Data models for the hicmapper pipeline.
"""

from .contact_models import (
    FragmentPairRecord,
    PairFormat,
    ContactMap,
    Stratum,
    SimilarityMatrix,
    DistanceMatrix,
)
from .mapper_models import (
    MetricDataset,
    FilterValues,
    NeighborhoodGraph,
    HypercubeCover,
    MapperNode,
    MapperGraph,
)
from .topology_models import (
    PointKind,
    DiagramPoint,
    ExtendedDiagram,
    BootstrapConfig,
    PointConfidence,
    ConfidenceReport,
)
from .pipeline_models import PipelineConfig, RunManifest

__all__ = [
    "FragmentPairRecord",
    "PairFormat",
    "ContactMap",
    "Stratum",
    "SimilarityMatrix",
    "DistanceMatrix",
    "MetricDataset",
    "FilterValues",
    "NeighborhoodGraph",
    "HypercubeCover",
    "MapperNode",
    "MapperGraph",
    "PointKind",
    "DiagramPoint",
    "ExtendedDiagram",
    "BootstrapConfig",
    "PointConfidence",
    "ConfidenceReport",
    "PipelineConfig",
    "RunManifest",
]
