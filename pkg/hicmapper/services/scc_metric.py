"""
SCC Metric Service

Stratum-adjusted correlation between contact maps:

    SCC(X, Y) = sum_k card_k Cov(X_k, Y_k) / sum_k card_k sqrt(Var X_k Var Y_k)

over the upper-triangle diagonals k = 1 .. n-1 (optionally capped), with
population statistics. Strata with fewer than two entries or a constant side
are skipped. d_SCC(X, Y) = sqrt(2 - 2 SCC(X, Y)).
"""

import functools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DegenerateInputError, DimensionError, ParameterRangeError
from ..models.contact_models import ContactMap, DistanceMatrix, SimilarityMatrix, Stratum
from .parallel import parallel_map

logger = logging.getLogger(__name__)

_BLOCK_ROWS = 64


def _check_compatible(x: ContactMap, y: ContactMap):
    if x.n_bins != y.n_bins:
        raise DimensionError(f"contact maps have {x.n_bins} and {y.n_bins} bins")
    if x.bin_size != y.bin_size:
        raise DimensionError(f"contact maps have bin sizes {x.bin_size} and {y.bin_size}")


def _separations(n: int, max_separation: Optional[int]) -> range:
    if max_separation is not None and max_separation < 1:
        raise ParameterRangeError(f"max_separation must be at least 1, got {max_separation}")
    top = n - 1 if max_separation is None else min(n - 1, max_separation)
    return range(1, top + 1)


def strata(x: ContactMap, y: ContactMap, max_separation: Optional[int] = None) -> List[Stratum]:
    """
    Aligned upper-triangle diagonals of two maps.

    Stratum k holds the entries (i, i + k), i = 0 .. n-k-1, from both maps.

    Raises:
        DimensionError: If the maps differ in shape or bin size
    """
    _check_compatible(x, y)
    dense_x = x.dense()
    dense_y = y.dense()
    return [
        Stratum(k=k, entries_x=np.diagonal(dense_x, offset=k), entries_y=np.diagonal(dense_y, offset=k))
        for k in _separations(x.n_bins, max_separation)
    ]


def _stratum_layout(n: int, max_separation: Optional[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Row and column indices of the stacked strata, with each stratum's offset and size."""
    separations = np.asarray(_separations(n, max_separation), dtype=np.intp)
    sizes = n - separations
    starts = np.cumsum(sizes) - sizes
    rows = np.concatenate([np.arange(size) for size in sizes]) if sizes.size else np.zeros(0, dtype=np.intp)
    cols = rows + np.repeat(separations, sizes)
    return rows, cols, starts, sizes


def _centred_strata(dense: np.ndarray, layout) -> Tuple[np.ndarray, np.ndarray]:
    """
    Concatenated mean-centred strata and the per-stratum norms.

    Strata with fewer than two entries or no spread are zeroed, so they drop
    out of both sums below. For two maps with features F and norms N:

        sum_k card_k Cov = F_x . F_y      sum_k card_k sqrt(Var Var) = N_x . N_y
    """
    rows, cols, starts, sizes = layout
    if sizes.size == 0:
        return np.zeros(0), np.zeros(0)
    values = dense[rows, cols].astype(np.float64)
    means = np.add.reduceat(values, starts) / sizes
    degenerate = (sizes < 2) | (np.maximum.reduceat(values, starts) == np.minimum.reduceat(values, starts))
    centred = values - np.repeat(means, sizes)
    centred[np.repeat(degenerate, sizes)] = 0.0
    norms = np.sqrt(np.add.reduceat(centred * centred, starts))
    norms[degenerate] = 0.0
    return centred, norms


def scc_matrices(x: np.ndarray, y: np.ndarray, max_separation: Optional[int] = None) -> float:
    """
    SCC of two dense square matrices (real entries allowed).

    Raises:
        DimensionError: If the shapes differ
        DegenerateInputError: If no stratum has variance on both sides
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"matrices of shapes {x.shape} and {y.shape} cannot be compared")

    layout = _stratum_layout(x.shape[0], max_separation)
    features_x, norms_x = _centred_strata(x, layout)
    features_y, norms_y = _centred_strata(y, layout)
    denominator = float(norms_x @ norms_y)
    if denominator <= 0.0:
        raise DegenerateInputError("every stratum is degenerate; SCC undefined")
    if np.array_equal(features_x, features_y):
        return 1.0
    return float(min(1.0, max(-1.0, float(features_x @ features_y) / denominator)))


def scc(x: ContactMap, y: ContactMap, max_separation: Optional[int] = None) -> float:
    """Stratum-adjusted correlation coefficient of two contact maps."""
    _check_compatible(x, y)
    return scc_matrices(x.dense(), y.dense(), max_separation)


def distance_from_scc(value: float) -> float:
    """sqrt(2 - 2 SCC), radicand clamped at zero."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * value))


def d_scc(x: ContactMap, y: ContactMap, max_separation: Optional[int] = None) -> float:
    """SCC distance; zero for identical maps, two for anti-correlated ones."""
    return distance_from_scc(scc(x, y, max_separation))


def _similarity_block(start: int, features: np.ndarray, norms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    stop = min(start + _BLOCK_ROWS, features.shape[0])
    return features[start:stop] @ features.T, norms[start:stop] @ norms.T


def pairwise_similarities(
    samples: Sequence[ContactMap],
    sample_ids: Optional[Sequence[str]] = None,
    max_separation: Optional[int] = None,
    workers: int = 1,
) -> SimilarityMatrix:
    """
    All pairwise SCC values; the diagonal is exactly 1.

    Every sample is reduced once to its centred strata, then all numerators
    and denominators come out of two matrix products, computed over fixed
    row blocks so the worker count never changes the result. Samples with
    identical centred strata share a row and compare at exactly 1.

    Raises:
        DegenerateInputError: If fewer than two samples, or a pair is degenerate
        DimensionError: If the maps disagree in shape
    """
    if len(samples) < 2:
        raise DegenerateInputError(f"pairwise SCC needs at least 2 samples, got {len(samples)}")
    ids = list(sample_ids) if sample_ids is not None else [f"sample_{i}" for i in range(len(samples))]
    if len(ids) != len(samples):
        raise DimensionError(f"{len(ids)} sample ids for {len(samples)} contact maps")
    for other in samples[1:]:
        _check_compatible(samples[0], other)

    n = len(samples)
    layout = _stratum_layout(samples[0].n_bins, max_separation)
    reduced = [_centred_strata(sample.dense(), layout) for sample in samples]
    features = np.stack([f for f, _ in reduced])
    norms = np.stack([nrm for _, nrm in reduced])
    if features.shape[1] == 0:
        raise DegenerateInputError(f"samples {ids[0]!r} and {ids[1]!r}: every stratum is degenerate; SCC undefined")
    features, first, inverse = np.unique(features, axis=0, return_index=True, return_inverse=True)
    norms = norms[first]
    inverse = np.asarray(inverse).reshape(-1)
    logger.info(f"🧮 Pairwise SCC over {n} samples ({features.shape[0]} distinct, {workers} worker(s))")

    task = functools.partial(_similarity_block, features=features, norms=norms)
    blocks = parallel_map(task, list(range(0, features.shape[0], _BLOCK_ROWS)), workers)
    numerator = np.vstack([num for num, _ in blocks])
    unique_denominator = np.vstack([den for _, den in blocks])

    bad = np.argwhere(np.triu(unique_denominator[np.ix_(inverse, inverse)] <= 0.0, k=1))
    if bad.size:
        row, col = bad[0]
        raise DegenerateInputError(
            f"samples {ids[row]!r} and {ids[col]!r}: every stratum is degenerate; SCC undefined"
        )

    upper = np.triu(np.clip(numerator / np.where(unique_denominator > 0.0, unique_denominator, 1.0), -1.0, 1.0), k=1)
    unique_values = upper + upper.T
    np.fill_diagonal(unique_values, 1.0)
    values = unique_values[np.ix_(inverse, inverse)]
    return SimilarityMatrix(sample_ids=ids, values=values)


def distances_from_similarities(similarities: SimilarityMatrix) -> DistanceMatrix:
    """Elementwise d_SCC of a similarity matrix."""
    values = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * similarities.values))
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(sample_ids=list(similarities.sample_ids), values=values)


def pairwise_distances(
    samples: Sequence[ContactMap],
    sample_ids: Optional[Sequence[str]] = None,
    max_separation: Optional[int] = None,
    workers: int = 1,
) -> DistanceMatrix:
    """Pairwise d_SCC matrix with zero diagonal."""
    return distances_from_similarities(pairwise_similarities(samples, sample_ids, max_separation, workers))
