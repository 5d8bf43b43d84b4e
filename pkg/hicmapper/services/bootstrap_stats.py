"""
Bootstrap Stats Service

Confidence for Mapper features by resampling:
- each iteration i draws n indices with replacement from default_rng(seed + i)
- duplicates collapse; the Mapper is rebuilt on the induced sub-dataset with
  the base cover and delta (filters restricted, never recomputed)
- d_i = multivariate bottleneck distance to the base diagrams (inf when the
  resampled Mapper is empty)

d_c is the ceil(c N)-th order statistic of the d_i. A diagram point is
significant when its distance to the diagonal exceeds d_c.
"""

import functools
import logging
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from ..core.errors import DegenerateInputError, EmptyInputError
from ..models.mapper_models import FilterValues, HypercubeCover, MetricDataset
from ..models.topology_models import (
    BootstrapConfig,
    ConfidenceReport,
    ExtendedDiagram,
    PointConfidence,
)
from .extended_persistence import coordinate_bottlenecks, diagonal_distance, extended_diagrams
from .mapper_core import build_mapper
from .parallel import parallel_map

logger = logging.getLogger(__name__)

QUANTILE_SLACK = 1e-9


class IterationResult(NamedTuple):
    """Distances of one bootstrap iteration."""
    distance: float
    coordinate_distances: List[float]
    empty: bool


def resample(n: int, rng: np.random.Generator) -> np.ndarray:
    """n indices drawn uniformly with replacement."""
    if n < 1:
        raise DegenerateInputError(f"cannot resample {n} points")
    return rng.integers(0, n, size=n)


def bootstrap_iteration(
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    base_diagrams: Sequence[ExtendedDiagram],
    indices: Sequence[int],
    node_function: str = "mean",
) -> IterationResult:
    """
    Distance between the base diagrams and the Mapper of one resample.

    Args:
        indices: Resampled indices; duplicates are collapsed

    Returns:
        IterationResult; an empty Mapper gives infinite distances
    """
    support = np.unique(np.asarray(indices, dtype=np.intp))
    graph = build_mapper(data.subset(support), filters.subset(support), cover, delta, node_function)
    try:
        diagrams = extended_diagrams(graph)
    except EmptyInputError:
        p = len(base_diagrams)
        return IterationResult(distance=math.inf, coordinate_distances=[math.inf] * p, empty=True)
    per_coordinate = coordinate_bottlenecks(base_diagrams, diagrams)
    return IterationResult(distance=max(per_coordinate, default=0.0), coordinate_distances=per_coordinate, empty=False)


def _seeded_iteration(
    iteration: int,
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    base_diagrams: Sequence[ExtendedDiagram],
    seed: int,
    node_function: str,
) -> IterationResult:
    rng = np.random.default_rng(seed + iteration)
    indices = resample(data.n, rng)
    return bootstrap_iteration(data, filters, cover, delta, base_diagrams, indices, node_function)


def bootstrap_iterations(
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    base_diagrams: Sequence[ExtendedDiagram],
    config: BootstrapConfig,
    node_function: str = "mean",
    workers: int = 1,
) -> List[IterationResult]:
    """All iteration results, in iteration order regardless of worker count."""
    task = functools.partial(
        _seeded_iteration,
        data=data, filters=filters, cover=cover, delta=delta,
        base_diagrams=list(base_diagrams), seed=config.seed, node_function=node_function,
    )
    logger.info(f"🔁 Bootstrap: {config.n_iterations} iterations, seed {config.seed}, {workers} worker(s)")
    results = parallel_map(task, list(range(config.n_iterations)), workers)
    empty = sum(1 for result in results if result.empty)
    if empty:
        logger.warning(f"⚠️  {empty} bootstrap iteration(s) produced an empty Mapper (d = inf)")
    return results


def bootstrap_distances(
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    base_diagrams: Sequence[ExtendedDiagram],
    config: BootstrapConfig,
    node_function: str = "mean",
    workers: int = 1,
) -> List[float]:
    """Multivariate bottleneck distance of every iteration."""
    results = bootstrap_iterations(data, filters, cover, delta, base_diagrams, config, node_function, workers)
    return [result.distance for result in results]


def quantile(distances: Sequence[float], level: float) -> float:
    """
    Smallest value whose empirical CDF reaches level (order statistic ceil(level N)).

    Raises:
        DegenerateInputError: If distances is empty
    """
    if not distances:
        raise DegenerateInputError("no bootstrap distances")
    ordered = np.sort(np.asarray(distances, dtype=np.float64))
    k = max(1, math.ceil(level * ordered.size - QUANTILE_SLACK))
    return float(ordered[min(k, ordered.size) - 1])


def confidence_at_size(distances: Sequence[float], alpha: float) -> float:
    """Fraction of bootstrap distances <= alpha."""
    if not distances:
        raise DegenerateInputError("no bootstrap distances")
    ordered = np.sort(np.asarray(distances, dtype=np.float64))
    return float(np.searchsorted(ordered, alpha, side="right")) / ordered.size


def confidence_report(
    base_diagrams: Sequence[ExtendedDiagram],
    distances: Sequence[float],
    config: BootstrapConfig,
    coordinate_distances: Optional[Sequence[Sequence[float]]] = None,
) -> ConfidenceReport:
    """
    Confidence radius and per-point confidence.

    Args:
        base_diagrams: Diagrams of the full-data Mapper
        distances: Multivariate bootstrap distances
        config: Bootstrap configuration (confidence level)
        coordinate_distances: Optional per-iteration per-coordinate distances

    Returns:
        ConfidenceReport with sorted distances
    """
    d_c = quantile(distances, config.confidence_level)
    per_point = []
    for diagram in base_diagrams:
        for point in diagram.points:
            size = diagonal_distance(point)
            per_point.append(PointConfidence(
                coordinate=diagram.filter_coordinate,
                point=point,
                confidence=confidence_at_size(distances, size),
                significant=size > d_c,
            ))

    by_coordinate: List[List[float]] = []
    coordinate_d_c: List[float] = []
    if coordinate_distances:
        p = len(coordinate_distances[0])
        by_coordinate = [sorted(float(row[s]) for row in coordinate_distances) for s in range(p)]
        coordinate_d_c = [quantile(column, config.confidence_level) for column in by_coordinate]

    report = ConfidenceReport(
        config=config,
        distances=[float(d) for d in distances],
        d_c=d_c,
        per_point=per_point,
        coordinate_distances=by_coordinate,
        coordinate_d_c=coordinate_d_c,
        empty_iterations=sum(1 for d in distances if math.isinf(d)),
    )
    logger.info(f"📏 d_c = {d_c:.6g} at confidence {config.confidence_level}; {report.n_significant} significant point(s)")
    return report


def run_bootstrap(
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    base_diagrams: Sequence[ExtendedDiagram],
    config: BootstrapConfig,
    node_function: str = "mean",
    workers: int = 1,
) -> ConfidenceReport:
    """Iterations followed by the confidence report, per-coordinate values included."""
    results = bootstrap_iterations(data, filters, cover, delta, base_diagrams, config, node_function, workers)
    return confidence_report(
        base_diagrams,
        [result.distance for result in results],
        config,
        coordinate_distances=[result.coordinate_distances for result in results],
    )
