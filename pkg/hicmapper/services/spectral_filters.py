"""
Spectral Filters Service

Mapper filters from classical multidimensional scaling of a distance matrix:
the leading eigenvectors of B = -1/2 J D^2 J, scaled by sqrt(eigenvalue).
"""

import logging
from typing import Union

import numpy as np
from scipy import linalg

from ..core.errors import DimensionError, ParameterRangeError, RankDeficiencyError
from ..models.contact_models import DistanceMatrix
from ..models.mapper_models import FilterValues, MetricDataset

logger = logging.getLogger(__name__)

EIGENVALUE_TOLERANCE = 1e-10
SIGN_TIE_TOLERANCE = 1e-12

DistanceInput = Union[DistanceMatrix, MetricDataset, np.ndarray]


def _as_matrix(d: DistanceInput) -> np.ndarray:
    if isinstance(d, DistanceMatrix):
        return d.values
    if isinstance(d, MetricDataset):
        return d.dist
    matrix = np.asarray(d, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"distance matrix must be square, got shape {matrix.shape}")
    return matrix


def _sample_ids(d: DistanceInput, n: int):
    if isinstance(d, (DistanceMatrix, MetricDataset)):
        return list(d.sample_ids)
    return [f"sample_{i}" for i in range(n)]


def double_center(d: DistanceInput) -> np.ndarray:
    """
    Gram matrix of classical MDS.

    Args:
        d: Square symmetric distance matrix

    Returns:
        B = -1/2 J D^2 J with J = I - ones/n, symmetrised
    """
    matrix = _as_matrix(d)
    n = matrix.shape[0]
    centering = np.eye(n) - np.ones((n, n)) / n
    gram = -0.5 * centering @ (matrix ** 2) @ centering
    return (gram + gram.T) / 2.0


def orient(vector: np.ndarray) -> np.ndarray:
    """Flip so the entry of largest magnitude is positive (lowest index on ties)."""
    magnitude = np.abs(vector)
    peak = magnitude.max()
    if peak == 0.0:
        return vector
    lead = int(np.flatnonzero(magnitude >= peak * (1.0 - SIGN_TIE_TOLERANCE))[0])
    return -vector if vector[lead] < 0 else vector


def mds_filters(d: DistanceInput, p: int, scale_by_sqrt_eigenvalue: bool = True) -> FilterValues:
    """
    First p classical-MDS coordinates as Mapper filters.

    Args:
        d: Distance matrix over samples
        p: Number of filter coordinates
        scale_by_sqrt_eigenvalue: Scale eigenvectors by sqrt(eigenvalue)

    Returns:
        FilterValues with columns in non-increasing eigenvalue order

    Raises:
        ParameterRangeError: If p is not in [1, n]
        RankDeficiencyError: If fewer than p eigenvalues are positive
    """
    matrix = _as_matrix(d)
    n = matrix.shape[0]
    if not 1 <= p <= n:
        raise ParameterRangeError(f"p must lie in [1, {n}], got {p}")

    gram = double_center(matrix)
    eigenvalues, eigenvectors = linalg.eigh(gram)
    order = np.argsort(eigenvalues, kind="stable")[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    top = float(eigenvalues[0]) if n else 0.0
    threshold = EIGENVALUE_TOLERANCE * top if top > 0 else np.inf
    positive = int(np.sum(eigenvalues > threshold))
    logger.info(f"📐 MDS spectrum head: {', '.join(f'{v:.4g}' for v in eigenvalues[:max(p, 3)])}")
    if positive < p:
        raise RankDeficiencyError(
            f"only {positive} positive eigenvalue(s) for {p} requested filter(s)",
            spectrum=eigenvalues,
        )

    columns = []
    for s in range(p):
        vector = orient(eigenvectors[:, s])
        if scale_by_sqrt_eigenvalue:
            vector = vector * np.sqrt(eigenvalues[s])
        columns.append(vector)

    return FilterValues(
        sample_ids=_sample_ids(d, n),
        values=np.column_stack(columns),
        eigenvalues=[float(v) for v in eigenvalues[:p]],
    )
