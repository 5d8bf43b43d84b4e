"""
Extended Persistence Service

Extended persistence of a graph with a vertex function, and bottleneck
distances between the resulting diagrams.

The filtration is built on the cone over the graph: an ascending pass adds
each vertex (ordered by value, ties by index) followed by its edges to
earlier vertices; a descending pass then adds, from the top vertex down, the
cone edge w*v followed by the cone triangles w*e of the edges whose lower
endpoint is v. One Z/2 column reduction over this filtration yields every
pair:

    vertex   - edge           Ord0  (f(v), f(e))        ascending merges
    vertex   - cone edge      Ext0  (min, max)          one per component
    edge     - cone triangle  Ext1  (f(e), min f(e'))   one per cycle, below the diagonal
    cone edge- cone triangle  Rel1  (f(v), min f(e))    descending merges

Ord0 and Rel1 pairs of zero persistence are dropped.
"""

import logging
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import maximum_bipartite_matching

from ..core.errors import DimensionError, EmptyInputError
from ..models.mapper_models import MapperGraph
from ..models.topology_models import DiagramPoint, ExtendedDiagram, PointKind

logger = logging.getLogger(__name__)

KIND_ORDER = [PointKind.ORD0, PointKind.EXT0, PointKind.EXT1, PointKind.REL1]

# Simplex tags
_APEX, _VERTEX, _EDGE, _CONE_EDGE, _CONE_TRIANGLE = range(5)


def _reduce(boundaries: List[Set[int]]) -> Dict[int, int]:
    """Standard column reduction; returns {death column: birth row}."""
    pivot_owner: Dict[int, int] = {}
    reduced: List[Set[int]] = []
    pairs: Dict[int, int] = {}
    for j, boundary in enumerate(boundaries):
        column = set(boundary)
        while column:
            low = max(column)
            owner = pivot_owner.get(low)
            if owner is None:
                break
            column ^= reduced[owner]
        reduced.append(column)
        if column:
            low = max(column)
            pivot_owner[low] = j
            pairs[j] = low
    return pairs


def graph_extended_diagram(
    values: Sequence[float],
    edges: Sequence[Tuple[int, int]],
    filter_coordinate: int = 0,
) -> ExtendedDiagram:
    """
    Extended diagram of a graph under a vertex function (lower-star on edges).

    Args:
        values: One finite value per vertex
        edges: Undirected edges (u, v), u != v
        filter_coordinate: Coordinate index recorded on the diagram

    Returns:
        ExtendedDiagram with points sorted by kind, birth, death

    Raises:
        EmptyInputError: If the graph has no vertices
    """
    f = np.asarray(values, dtype=np.float64)
    n = f.size
    if n == 0:
        raise EmptyInputError("extended persistence of an empty graph is undefined")

    order = np.lexsort((np.arange(n), f))
    rank = np.empty(n, dtype=np.intp)
    rank[order] = np.arange(n)

    lower_edges: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    upper_edges: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    for u, v in edges:
        low_end, high_end = (u, v) if rank[u] < rank[v] else (v, u)
        lower_edges[high_end].append((low_end, high_end))
        upper_edges[low_end].append((low_end, high_end))

    tags: List[Tuple] = []
    boundaries: List[Set[int]] = []
    vertex_index: Dict[int, int] = {}
    edge_index: Dict[Tuple[int, int], int] = {}
    cone_index: Dict[int, int] = {}

    tags.append((_APEX,))
    boundaries.append(set())

    for v in order:
        v = int(v)
        vertex_index[v] = len(tags)
        tags.append((_VERTEX, v))
        boundaries.append(set())
        for edge in sorted(lower_edges[v], key=lambda e: rank[e[0]]):
            edge_index[edge] = len(tags)
            tags.append((_EDGE, edge))
            boundaries.append({vertex_index[edge[0]], vertex_index[edge[1]]})

    for v in order[::-1]:
        v = int(v)
        cone_index[v] = len(tags)
        tags.append((_CONE_EDGE, v))
        boundaries.append({0, vertex_index[v]})
        for edge in sorted(upper_edges[v], key=lambda e: -rank[e[1]]):
            tags.append((_CONE_TRIANGLE, edge))
            boundaries.append({edge_index[edge], cone_index[edge[0]], cone_index[edge[1]]})

    points: List[DiagramPoint] = []
    for death, birth in _reduce(boundaries).items():
        birth_tag = tags[birth]
        death_tag = tags[death]
        if birth_tag[0] == _VERTEX and death_tag[0] == _EDGE:
            b, d = f[birth_tag[1]], max(f[death_tag[1][0]], f[death_tag[1][1]])
            if b != d:
                points.append(DiagramPoint(kind=PointKind.ORD0, birth=b, death=d))
        elif birth_tag[0] == _VERTEX and death_tag[0] == _CONE_EDGE:
            points.append(DiagramPoint(kind=PointKind.EXT0, birth=f[birth_tag[1]], death=f[death_tag[1]]))
        elif birth_tag[0] == _EDGE and death_tag[0] == _CONE_TRIANGLE:
            b = max(f[birth_tag[1][0]], f[birth_tag[1][1]])
            d = min(f[death_tag[1][0]], f[death_tag[1][1]])
            points.append(DiagramPoint(kind=PointKind.EXT1, birth=b, death=d))
        elif birth_tag[0] == _CONE_EDGE and death_tag[0] == _CONE_TRIANGLE:
            b = f[birth_tag[1]]
            d = min(f[death_tag[1][0]], f[death_tag[1][1]])
            if b != d:
                points.append(DiagramPoint(kind=PointKind.REL1, birth=b, death=d))

    points.sort(key=lambda point: (KIND_ORDER.index(point.kind), point.birth, point.death))
    return ExtendedDiagram(filter_coordinate=filter_coordinate, points=points)


def extended_diagram(graph: MapperGraph, s: int) -> ExtendedDiagram:
    """
    Extended diagram of a Mapper graph under node function coordinate s.

    Raises:
        EmptyInputError: If the graph has no nodes
        DimensionError: If s is not a filter coordinate of the graph
    """
    if not graph.nodes:
        raise EmptyInputError("Mapper graph has no nodes")
    if not 0 <= s < len(graph.nodes[0].values):
        raise DimensionError(f"coordinate {s} out of range for {len(graph.nodes[0].values)} node values")
    diagram = graph_extended_diagram(graph.node_values(s), graph.edges, filter_coordinate=s)
    logger.debug(
        f"Diagram f_{s + 1}: " + ", ".join(f"{kind.value}={diagram.count(kind)}" for kind in KIND_ORDER)
    )
    return diagram


def extended_diagrams(graph: MapperGraph) -> List[ExtendedDiagram]:
    """One diagram per filter coordinate."""
    if not graph.nodes:
        raise EmptyInputError("Mapper graph has no nodes")
    return [extended_diagram(graph, s) for s in range(len(graph.nodes[0].values))]


# ====================
# BOTTLENECK DISTANCE
# ====================

def diagonal_distance(point: DiagramPoint) -> float:
    """L∞ distance from a point to the diagonal."""
    return abs(point.death - point.birth) / 2.0


def _as_array(points: Sequence[DiagramPoint]) -> np.ndarray:
    return np.array([[point.birth, point.death] for point in points], dtype=np.float64).reshape(-1, 2)


def _feasible(costs: np.ndarray, size_a: np.ndarray, size_b: np.ndarray, epsilon: float) -> bool:
    """Perfect matching with every matched cost <= epsilon, diagonal copies included."""
    k, l = size_a.size, size_b.size
    total = k + l
    # rows: A points, then diagonal copies of B; columns: B points, then diagonal copies of A
    adjacency = np.zeros((total, total), dtype=bool)
    adjacency[:k, :l] = costs <= epsilon
    adjacency[np.arange(k), l + np.arange(k)] = size_a <= epsilon
    adjacency[k + np.arange(l), np.arange(l)] = size_b <= epsilon
    adjacency[k:, l:] = True
    matching = maximum_bipartite_matching(sparse.csr_matrix(adjacency.astype(np.int8)), perm_type="column")
    return bool(np.all(matching >= 0))


def point_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    """
    Bottleneck distance between two untyped point sets (rows are (birth, death)).

    Exact: binary search over the finite candidate costs with a bipartite
    feasibility test at each step.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    size_a = np.abs(a[:, 1] - a[:, 0]) / 2.0
    size_b = np.abs(b[:, 1] - b[:, 0]) / 2.0
    if a.shape[0] == 0 and b.shape[0] == 0:
        return 0.0
    if a.shape[0] == 0:
        return float(size_b.max())
    if b.shape[0] == 0:
        return float(size_a.max())

    costs = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    candidates = np.unique(np.concatenate([[0.0], costs.ravel(), size_a, size_b]))

    low, high = 0, candidates.size - 1
    while low < high:
        middle = (low + high) // 2
        if _feasible(costs, size_a, size_b, candidates[middle]):
            high = middle
        else:
            low = middle + 1
    return float(candidates[low])


def bottleneck(d1: ExtendedDiagram, d2: ExtendedDiagram) -> float:
    """Kind-restricted bottleneck distance: max over kinds of the per-kind distance."""
    return max(
        point_bottleneck(_as_array(d1.of_kind(kind)), _as_array(d2.of_kind(kind)))
        for kind in KIND_ORDER
    )


def coordinate_bottlenecks(m1: Sequence[ExtendedDiagram], m2: Sequence[ExtendedDiagram]) -> List[float]:
    """
    Per-coordinate bottleneck distances.

    Raises:
        DimensionError: If the lists have different lengths
    """
    if len(m1) != len(m2):
        raise DimensionError(f"diagram lists have {len(m1)} and {len(m2)} coordinates")
    return [bottleneck(a, b) for a, b in zip(m1, m2)]


def multivariate_bottleneck(m1: Sequence[ExtendedDiagram], m2: Sequence[ExtendedDiagram]) -> float:
    """Max over coordinates of the per-coordinate bottleneck distance."""
    return max(coordinate_bottlenecks(m1, m2), default=0.0)
