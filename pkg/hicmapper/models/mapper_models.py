"""
Pydantic models for Mapper construction: metric data, filters, covers, graphs.
"""

import itertools
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator
from scipy import sparse
from scipy.sparse.csgraph import connected_components

SYMMETRY_TOLERANCE = 1e-9

# Open interval of admissible cover gains
GAIN_LOW = 1.0 / 3.0
GAIN_HIGH = 0.5

CubeId = Tuple[int, ...]


class MetricDataset(BaseModel):
    """A finite metric space given by its distance matrix."""
    sample_ids: List[str]
    dist: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @field_validator("dist", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_metric(self):
        n = len(self.sample_ids)
        if n == 0:
            raise ValueError("metric dataset needs at least one point")
        if self.dist.shape != (n, n):
            raise ValueError(f"distance shape {self.dist.shape} does not match {n} sample ids")
        if not np.all(np.isfinite(self.dist)):
            raise ValueError("distances must be finite")
        if not np.allclose(self.dist, self.dist.T, atol=SYMMETRY_TOLERANCE, rtol=0.0):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.diag(self.dist) != 0.0):
            raise ValueError("distance diagonal must be zero")
        if np.any(self.dist < 0):
            raise ValueError("distances must be non-negative")
        # Exact symmetry from here on
        self.dist = (self.dist + self.dist.T) / 2.0
        return self

    @computed_field
    @property
    def n(self) -> int:
        """Number of points."""
        return len(self.sample_ids)

    def subset(self, indices) -> "MetricDataset":
        """Induced sub-dataset on the given (unique, ordered) indices."""
        idx = np.asarray(indices, dtype=np.intp)
        return MetricDataset(
            sample_ids=[self.sample_ids[i] for i in idx],
            dist=self.dist[np.ix_(idx, idx)],
        )


class FilterValues(BaseModel):
    """Per-sample filter coordinates (n × p), optionally with their eigenvalues."""
    sample_ids: List[str]
    values: np.ndarray
    eigenvalues: Optional[List[float]] = None

    class Config:
        arbitrary_types_allowed = True

    @field_validator("values", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        return array

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.ndim != 2 or self.values.shape[0] != len(self.sample_ids):
            raise ValueError(f"filter shape {self.values.shape} does not match {len(self.sample_ids)} samples")
        if self.values.shape[1] < 1:
            raise ValueError("at least one filter coordinate is required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("filter values must be finite")
        if self.eigenvalues is not None and len(self.eigenvalues) != self.values.shape[1]:
            raise ValueError("one eigenvalue per filter coordinate is required")
        return self

    @computed_field
    @property
    def n_samples(self) -> int:
        return int(self.values.shape[0])

    @computed_field
    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    def subset(self, indices) -> "FilterValues":
        """Restrict to the given indices without recomputing anything."""
        idx = np.asarray(indices, dtype=np.intp)
        return FilterValues(
            sample_ids=[self.sample_ids[i] for i in idx],
            values=self.values[idx],
            eigenvalues=self.eigenvalues,
        )


class NeighborhoodGraph(BaseModel):
    """δ-neighbourhood graph: i–j whenever dist[i][j] ≤ δ."""
    n: int = Field(gt=0)
    delta: float = Field(gt=0)
    edges: List[Tuple[int, int]] = Field(default_factory=list)

    @computed_field
    @property
    def n_edges(self) -> int:
        return len(self.edges)


class HypercubeCover(BaseModel):
    """Product of per-coordinate interval covers with fixed resolution and gain."""
    starts: List[float]
    resolutions: List[float]
    gains: List[float]
    counts: List[int]

    @model_validator(mode="after")
    def _check_dimensions(self):
        lengths = {len(self.starts), len(self.resolutions), len(self.gains), len(self.counts)}
        if len(lengths) != 1 or not self.starts:
            raise ValueError("cover needs one start, resolution, gain and count per coordinate")
        if any(r <= 0 for r in self.resolutions):
            raise ValueError("resolutions must be positive")
        if any(not 0.0 < g < 1.0 for g in self.gains):
            raise ValueError("gains must lie in (0, 1)")
        if any(m < 1 for m in self.counts):
            raise ValueError("interval counts must be at least 1")
        return self

    @computed_field
    @property
    def p(self) -> int:
        return len(self.starts)

    @computed_field
    @property
    def n_elements(self) -> int:
        return int(np.prod(self.counts))

    def step(self, s: int) -> float:
        """Distance between consecutive interval starts on coordinate s."""
        return self.resolutions[s] * (1.0 - self.gains[s])

    def interval(self, s: int, a: int) -> Tuple[float, float]:
        """Closed interval a on coordinate s."""
        low = self.starts[s] + a * self.step(s)
        return low, low + self.resolutions[s]

    def elements(self) -> Iterator[CubeId]:
        """All cube ids in lexicographic order."""
        return itertools.product(*(range(m) for m in self.counts))

    def midpoint(self, cube: CubeId) -> List[float]:
        """Centre of a cube."""
        return [sum(self.interval(s, a)) / 2.0 for s, a in enumerate(cube)]


class MapperNode(BaseModel):
    """One cluster of a preimage."""
    node_id: int
    cube: CubeId
    members: List[int]
    values: List[float]
    metadata: Dict[str, Optional[float]] = Field(default_factory=dict)

    @computed_field
    @property
    def size(self) -> int:
        return len(self.members)


class MapperGraph(BaseModel):
    """1-skeleton of the nerve of the refined preimage cover."""
    sample_ids: List[str]
    nodes: List[MapperNode]
    edges: List[Tuple[int, int]]
    delta: float
    cover: HypercubeCover
    node_function: str = "mean"

    @computed_field
    @property
    def n_components(self) -> int:
        if not self.nodes:
            return 0
        n = len(self.nodes)
        rows = [u for u, _ in self.edges]
        cols = [v for _, v in self.edges]
        adjacency = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        count, _ = connected_components(adjacency, directed=False)
        return int(count)

    @computed_field
    @property
    def cycle_rank(self) -> int:
        """E − V + C."""
        return len(self.edges) - len(self.nodes) + self.n_components

    def node_values(self, s: int) -> np.ndarray:
        """Node function values on coordinate s."""
        return np.array([node.values[s] for node in self.nodes], dtype=np.float64)

    def signature(self) -> Tuple:
        """Cover-labelled canonical form, for isomorphism comparisons."""
        keyed = {node.node_id: (node.cube, tuple(node.members)) for node in self.nodes}
        node_keys = tuple(sorted(keyed.values()))
        edge_keys = tuple(sorted(tuple(sorted((keyed[u], keyed[v]))) for u, v in self.edges))
        return node_keys, edge_keys
