"""
Services package for the hicmapper pipeline.
"""

from .contact_ingest import parse_pairs, bin_pairs, smooth, band_fractions
from .scc_metric import strata, scc, d_scc, pairwise_similarities, pairwise_distances
from .spectral_filters import double_center, mds_filters
from .mapper_core import (
    UnionFind,
    subsample_size,
    hausdorff_to_subset,
    select_delta,
    neighborhood_graph,
    auto_cover,
    build_mapper,
    mapper_of_graph,
)
from .extended_persistence import (
    extended_diagram,
    extended_diagrams,
    diagonal_distance,
    bottleneck,
    multivariate_bottleneck,
)
from .bootstrap_stats import (
    resample,
    bootstrap_distances,
    confidence_at_size,
    confidence_report,
    run_bootstrap,
)

__all__ = [
    "parse_pairs", "bin_pairs", "smooth", "band_fractions",
    "strata", "scc", "d_scc", "pairwise_similarities", "pairwise_distances",
    "double_center", "mds_filters",
    "UnionFind", "subsample_size", "hausdorff_to_subset", "select_delta",
    "neighborhood_graph", "auto_cover", "build_mapper", "mapper_of_graph",
    "extended_diagram", "extended_diagrams", "diagonal_distance", "bottleneck",
    "multivariate_bottleneck",
    "resample", "bootstrap_distances", "confidence_at_size", "confidence_report", "run_bootstrap",
]
