"""
Mapper Core Service

Multivariate Mapper with automatic parameters:
- select_delta: median Hausdorff distance to seeded subsamples of size s(n)
- auto_cover: per-coordinate resolution max |f(x) - f(y)| over delta-pairs / gain
- build_mapper: single-linkage (threshold delta) inside each hypercube preimage
- mapper_of_graph: the same nerve from components of the delta-neighbourhood graph

Nodes are ordered by (cube id, smallest member); edges join nodes that share
a sample. Only the 1-skeleton of the nerve is built.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from ..core.errors import (
    DegenerateFilterError,
    DegenerateInputError,
    DimensionError,
    ParameterRangeError,
)
from ..models.mapper_models import (
    GAIN_HIGH,
    GAIN_LOW,
    CubeId,
    FilterValues,
    HypercubeCover,
    MapperGraph,
    MapperNode,
    MetricDataset,
    NeighborhoodGraph,
)

logger = logging.getLogger(__name__)

NODE_FUNCTIONS = ("mean", "midpoint")


class UnionFind:
    """Union-find with path compression; the smaller index is always the root."""

    def __init__(self, size: int):
        self.size = size
        self.parents = list(range(size))
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        # compress
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int):
        root_a = self.find(a)
        root_b = self.find(b)
        if root_a == root_b:
            return
        if root_b < root_a:
            root_a, root_b = root_b, root_a
        self.parents[root_b] = root_a
        self.num_components -= 1

    def components(self) -> List[List[int]]:
        """Components as sorted index lists, ordered by smallest member."""
        groups: Dict[int, List[int]] = defaultdict(list)
        for i in range(self.size):
            groups[self.find(i)].append(i)
        return [groups[root] for root in sorted(groups)]


# ====================
# PARAMETER SELECTION
# ====================

def subsample_size(n: int, beta: float) -> int:
    """
    s(n) = round(n / log(n)^(1 + beta)), clamped to [1, n - 1].

    Raises:
        ParameterRangeError: If n < 3 or beta <= 0
    """
    if n < 3:
        raise ParameterRangeError(f"delta selection needs at least 3 points, got {n}")
    if beta <= 0:
        raise ParameterRangeError(f"beta must be positive, got {beta}")
    size = math.floor(n / math.log(n) ** (1.0 + beta) + 0.5)
    return int(min(n - 1, max(1, size)))


def hausdorff_to_subset(data: MetricDataset, indices: Sequence[int]) -> float:
    """Largest distance from any point to its nearest point of the subset."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size == 0:
        raise DegenerateInputError("Hausdorff distance to an empty subset is undefined")
    return float(data.dist[:, idx].min(axis=1).max())


def select_delta(data: MetricDataset, beta: float = 0.05, draws: int = 10, seed: int = 0) -> float:
    """
    Clustering scale: median over seeded draws of the Hausdorff distance
    between the data and a uniform subsample of size s(n).

    Raises:
        ParameterRangeError: If n < 3, beta <= 0 or draws < 1
        DegenerateInputError: If the selected scale is zero
    """
    if draws < 1:
        raise ParameterRangeError(f"draws must be at least 1, got {draws}")
    size = subsample_size(data.n, beta)
    rng = np.random.default_rng(seed)
    distances = [
        hausdorff_to_subset(data, np.sort(rng.choice(data.n, size=size, replace=False)))
        for _ in range(draws)
    ]
    delta = float(np.median(distances))
    logger.info(f"🎯 delta = {delta:.6g} (s(n) = {size} of {data.n}, {draws} draws, median)")
    logger.debug(f"Hausdorff distances per draw: {distances}")
    if delta <= 0.0:
        raise DegenerateInputError("selected delta is 0 (subsamples reproduce the data exactly)")
    return delta


def neighborhood_graph(data: MetricDataset, delta: float) -> NeighborhoodGraph:
    """
    All pairs i < j with dist[i][j] <= delta, in lexicographic order.

    Raises:
        ParameterRangeError: If delta is not positive
    """
    if delta <= 0:
        raise ParameterRangeError(f"delta must be positive, got {delta}")
    rows, cols = np.nonzero(np.triu(data.dist <= delta, k=1))
    edges = [(int(i), int(j)) for i, j in zip(rows, cols)]
    return NeighborhoodGraph(n=data.n, delta=delta, edges=edges)


def check_gains(gains: Sequence[float], p: int) -> List[float]:
    """
    Gains per coordinate, broadcasting a single value.

    Raises:
        DimensionError: If the count matches neither 1 nor p
        ParameterRangeError: If a gain is outside (1/3, 1/2)
    """
    gains = list(gains)
    if len(gains) == 1 and p > 1:
        gains = gains * p
    if len(gains) != p:
        raise DimensionError(f"{len(gains)} gains given for {p} filter coordinates")
    for gain in gains:
        if not GAIN_LOW < gain < GAIN_HIGH:
            raise ParameterRangeError(f"gain {gain} outside (1/3, 1/2)")
    return gains


def interval_count(minimum: float, maximum: float, resolution: float, gain: float) -> int:
    """Smallest m >= 1 whose last interval, anchored at minimum, reaches maximum."""
    template = HypercubeCover(starts=[minimum], resolutions=[resolution], gains=[gain], counts=[1])
    step = template.step(0)
    m = max(1, int(math.ceil((maximum - minimum - resolution) / step)) + 1)
    while template.starts[0] + (m - 1) * step + resolution < maximum:
        m += 1
    while m > 1 and template.starts[0] + (m - 2) * step + resolution >= maximum:
        m -= 1
    return m


def auto_cover(
    filters: FilterValues,
    delta: float,
    data: MetricDataset,
    gains: Sequence[float],
) -> HypercubeCover:
    """
    Hypercube cover with per-coordinate resolution r_s = max |Δf_s| over
    delta-neighbour pairs / g_s, anchored at min f_s.

    Raises:
        DimensionError: If filters and data disagree on the sample count
        ParameterRangeError: If a gain is outside (1/3, 1/2)
        DegenerateFilterError: If a coordinate is constant on every delta-pair
    """
    if filters.n_samples != data.n:
        raise DimensionError(f"{filters.n_samples} filter rows for {data.n} points")
    gains = check_gains(gains, filters.p)
    graph = neighborhood_graph(data, delta)
    if not graph.edges:
        raise DegenerateFilterError(f"no pair of points within delta = {delta}; resolution undefined")

    pairs = np.asarray(graph.edges, dtype=np.intp)
    values = filters.values
    starts, resolutions, counts = [], [], []
    for s in range(filters.p):
        spread = float(np.max(np.abs(values[pairs[:, 0], s] - values[pairs[:, 1], s])))
        if spread <= 0.0:
            raise DegenerateFilterError(f"filter {s + 1} is constant on every delta-neighbour pair")
        resolution = spread / gains[s]
        minimum = float(values[:, s].min())
        maximum = float(values[:, s].max())
        starts.append(minimum)
        resolutions.append(resolution)
        counts.append(interval_count(minimum, maximum, resolution, gains[s]))

    cover = HypercubeCover(starts=starts, resolutions=resolutions, gains=gains, counts=counts)
    logger.info(
        f"🧊 Cover: {' x '.join(str(m) for m in counts)} intervals, "
        f"resolutions {', '.join(f'{r:.4g}' for r in resolutions)}, gains {gains}"
    )
    return cover


# ====================
# PREIMAGES AND NERVE
# ====================

def preimages(filters: FilterValues, cover: HypercubeCover) -> List[Tuple[CubeId, np.ndarray]]:
    """Non-empty preimages of closed cubes, in cube order."""
    if cover.p != filters.p:
        raise DimensionError(f"cover has {cover.p} coordinates, filters have {filters.p}")

    masks = []
    for s in range(cover.p):
        column = filters.values[:, s]
        rows = []
        for a in range(cover.counts[s]):
            low, high = cover.interval(s, a)
            rows.append((column >= low) & (column <= high))
        masks.append(np.array(rows))

    result = []
    for cube in cover.elements():
        inside = np.ones(filters.n_samples, dtype=bool)
        for s, a in enumerate(cube):
            inside &= masks[s][a]
        if inside.any():
            result.append((tuple(int(a) for a in cube), np.flatnonzero(inside)))
    return result


def single_linkage(dist: np.ndarray, delta: float) -> List[List[int]]:
    """Components of the closed delta-graph on a distance submatrix."""
    n = dist.shape[0]
    if n == 1:
        return [[0]]
    adjacency = sparse.csr_matrix(dist <= delta)
    _, labels = connected_components(adjacency, directed=False)
    groups: Dict[int, List[int]] = defaultdict(list)
    for index, label in enumerate(labels):
        groups[int(label)].append(index)
    return sorted(groups.values(), key=lambda members: members[0])


def _finite_mean(values: np.ndarray) -> Optional[float]:
    """Mean over the non-NaN entries; None when there are none."""
    known = values[~np.isnan(values)]
    return float(known.mean()) if known.size else None


def _assemble(
    sample_ids: Sequence[str],
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    clusters: Iterable[Tuple[CubeId, List[int]]],
    node_function: str,
    metadata: Optional[Mapping[str, np.ndarray]],
) -> MapperGraph:
    if node_function not in NODE_FUNCTIONS:
        raise ParameterRangeError(f"node function must be one of {NODE_FUNCTIONS}, got {node_function!r}")

    columns: Dict[str, np.ndarray] = {}
    for name, column in (metadata or {}).items():
        column = np.asarray(column, dtype=np.float64)
        if column.shape != (filters.n_samples,):
            raise DimensionError(f"metadata column {name!r} has {column.shape[0]} values for {filters.n_samples} samples")
        columns[name] = column
    for s in range(filters.p):
        columns.setdefault(f"f_{s + 1}", filters.values[:, s])

    nodes: List[MapperNode] = []
    for node_id, (cube, members) in enumerate(sorted(clusters, key=lambda item: (item[0], item[1][0]))):
        idx = np.asarray(members, dtype=np.intp)
        if node_function == "mean":
            values = [float(v) for v in filters.values[idx].mean(axis=0)]
        else:
            values = cover.midpoint(cube)
        nodes.append(MapperNode(
            node_id=node_id,
            cube=cube,
            members=list(members),
            values=values,
            metadata={name: _finite_mean(column[idx]) for name, column in columns.items()},
        ))

    holders: Dict[int, List[int]] = defaultdict(list)
    for node in nodes:
        for member in node.members:
            holders[member].append(node.node_id)
    edge_set = set()
    for owning in holders.values():
        for i in range(len(owning)):
            for j in range(i + 1, len(owning)):
                edge_set.add((min(owning[i], owning[j]), max(owning[i], owning[j])))

    return MapperGraph(
        sample_ids=list(sample_ids),
        nodes=nodes,
        edges=sorted(edge_set),
        delta=delta,
        cover=cover,
        node_function=node_function,
    )


def build_mapper(
    data: MetricDataset,
    filters: FilterValues,
    cover: HypercubeCover,
    delta: float,
    node_function: str = "mean",
    metadata: Optional[Mapping[str, np.ndarray]] = None,
) -> MapperGraph:
    """
    Mapper graph with single-linkage clustering at threshold delta.

    Args:
        data: Metric dataset
        filters: Filter values on the same samples
        cover: Hypercube cover of the filter range
        delta: Single-linkage threshold (closed)
        node_function: "mean" of member filters or cube "midpoint"
        metadata: Optional per-sample columns averaged onto nodes

    Returns:
        MapperGraph; empty preimages contribute no nodes
    """
    if filters.n_samples != data.n:
        raise DimensionError(f"{filters.n_samples} filter rows for {data.n} points")
    if delta <= 0:
        raise ParameterRangeError(f"delta must be positive, got {delta}")

    clusters = []
    for cube, idx in preimages(filters, cover):
        for local in single_linkage(data.dist[np.ix_(idx, idx)], delta):
            clusters.append((cube, [int(idx[i]) for i in local]))

    graph = _assemble(data.sample_ids, filters, cover, delta, clusters, node_function, metadata)
    logger.debug(f"Mapper: {len(graph.nodes)} nodes, {len(graph.edges)} edges, cycle rank {graph.cycle_rank}")
    return graph


def mapper_of_graph(
    graph: NeighborhoodGraph,
    filters: FilterValues,
    cover: HypercubeCover,
    node_function: str = "mean",
    sample_ids: Optional[Sequence[str]] = None,
) -> MapperGraph:
    """
    Mapper whose clusters are the components of the neighbourhood graph
    induced on each preimage.
    """
    if filters.n_samples != graph.n:
        raise DimensionError(f"{filters.n_samples} filter rows for a {graph.n}-vertex graph")

    clusters = []
    for cube, idx in preimages(filters, cover):
        local = {int(global_index): position for position, global_index in enumerate(idx)}
        finder = UnionFind(len(idx))
        for u, v in graph.edges:
            if u in local and v in local:
                finder.union(local[u], local[v])
        for component in finder.components():
            clusters.append((cube, [int(idx[i]) for i in component]))

    ids = list(sample_ids) if sample_ids is not None else list(filters.sample_ids)
    return _assemble(ids, filters, cover, graph.delta, clusters, node_function, None)
