"""
File Formats

Readers and writers for every artifact the pipeline exchanges between stages.
Numbers are written with repr() so re-runs are byte-identical and values
round-trip exactly. No timestamps are ever written.
"""

import csv
import hashlib
import io
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import ValidationError
from scipy import sparse

from ..core.errors import InputParseError
from ..models.contact_models import ContactMap, DistanceMatrix, PairFormat, SimilarityMatrix
from ..models.mapper_models import FilterValues, HypercubeCover, MapperGraph, MapperNode
from ..models.pipeline_models import RunManifest
from ..models.topology_models import ConfidenceReport, DiagramPoint, ExtendedDiagram, PointKind
from .contact_ingest import group_by_sample, parse_pairs

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MatrixT = TypeVar("MatrixT", DistanceMatrix, SimilarityMatrix)

PAIR_SUFFIXES = (".pairs", ".tsv", ".txt")
EIGENVALUE_PREFIX = "#eigenvalues"


def fmt(value: float) -> str:
    """Shortest exact text for a float."""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _parse_float(raw: str, source: str, line_number: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise InputParseError(f"non-numeric value {raw!r}", line_number=line_number, source=source)


def _write_text(path: PathLike, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read().splitlines()
    except OSError as exc:
        raise InputParseError(f"cannot read file: {exc}", source=str(path))


def sha256_file(path: PathLike) -> str:
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


# ====================
# FRAGMENT PAIRS
# ====================

def pair_files(directory: PathLike) -> List[Path]:
    """Pair files of a directory in name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputParseError("not a directory", source=str(directory))
    return sorted(path for path in directory.iterdir() if path.is_file() and path.suffix in PAIR_SUFFIXES)


def read_pair_directory(directory: PathLike, format: Optional[PairFormat] = None) -> Dict[str, list]:
    """All records of a directory of pair files, grouped by sample id (first-seen order)."""
    records = []
    for path in pair_files(directory):
        with open(path, "r", encoding="utf-8") as handle:
            records.extend(parse_pairs(handle, format, source=str(path)))
    return group_by_sample(records)


# ====================
# CONTACT MAPS (COO)
# ====================

def write_contact_map(path: PathLike, contact_map: ContactMap):
    """Header 'n_bins=<n> bin_size=<b>', then 'i<TAB>j<TAB>value' for i <= j, sorted."""
    upper = sparse.triu(contact_map.counts, k=0).tocoo()
    order = np.lexsort((upper.col, upper.row))
    lines = [f"n_bins={contact_map.n_bins} bin_size={contact_map.bin_size}"]
    for position in order:
        lines.append(f"{int(upper.row[position])}\t{int(upper.col[position])}\t{fmt(upper.data[position])}")
    _write_text(path, "\n".join(lines) + "\n")


def read_contact_map(path: PathLike) -> ContactMap:
    """Inverse of write_contact_map."""
    source = str(path)
    lines = _read_lines(path)
    if not lines:
        raise InputParseError("empty contact map file", source=source)
    try:
        header = dict(field.split("=", 1) for field in lines[0].split())
        n_bins = int(header["n_bins"])
        bin_size = int(header["bin_size"])
    except (ValueError, KeyError):
        raise InputParseError(f"bad header {lines[0]!r}", line_number=1, source=source)

    rows, cols, values = [], [], []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise InputParseError(f"expected 3 fields, found {len(fields)}", line_number=line_number, source=source)
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise InputParseError("non-integer bin index", line_number=line_number, source=source)
        if not 0 <= i <= j < n_bins:
            raise InputParseError(f"entry ({i}, {j}) outside upper triangle of {n_bins} bins",
                                  line_number=line_number, source=source)
        value = _parse_float(fields[2], source, line_number)
        rows.append(i)
        cols.append(j)
        values.append(value)
        if i != j:
            rows.append(j)
            cols.append(i)
            values.append(value)

    counts = sparse.coo_matrix((values, (rows, cols)), shape=(n_bins, n_bins))
    try:
        return ContactMap(n_bins=n_bins, bin_size=bin_size, counts=counts)
    except ValidationError as exc:
        raise InputParseError(f"invalid contact map: {exc.errors()[0]['msg']}", source=source)


def write_dense_csv(path: PathLike, contact_map: ContactMap):
    """Dense comma-separated matrix, no header."""
    lines = [",".join(fmt(v) for v in row) for row in contact_map.dense()]
    _write_text(path, "\n".join(lines) + "\n")


# ====================
# SAMPLE MATRICES
# ====================

def write_sample_matrix(path: PathLike, matrix: Union[DistanceMatrix, SimilarityMatrix]):
    """Header of sample ids, then one row of values per sample."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(matrix.sample_ids)
    for row in matrix.values:
        writer.writerow([fmt(v) for v in row])
    _write_text(path, buffer.getvalue())


def read_sample_matrix(path: PathLike, kind: Type[MatrixT] = DistanceMatrix) -> MatrixT:
    """Read a sample matrix CSV as a DistanceMatrix (default) or SimilarityMatrix."""
    source = str(path)
    rows = list(csv.reader(_read_lines(path)))
    if not rows:
        raise InputParseError("empty matrix file", source=source)
    sample_ids = rows[0]
    values = []
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(sample_ids):
            raise InputParseError(f"expected {len(sample_ids)} values, found {len(row)}",
                                  line_number=line_number, source=source)
        values.append([_parse_float(raw, source, line_number) for raw in row])
    try:
        return kind(sample_ids=sample_ids, values=np.array(values, dtype=np.float64).reshape(len(values), -1))
    except ValidationError as exc:
        raise InputParseError(f"invalid matrix: {exc.errors()[0]['msg']}", source=source)


# ====================
# FILTERS
# ====================

def write_filters(path: PathLike, filters: FilterValues):
    """'#eigenvalues,...' line (when known), then sample_id,f_1..f_p rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if filters.eigenvalues is not None:
        writer.writerow([EIGENVALUE_PREFIX] + [fmt(v) for v in filters.eigenvalues])
    writer.writerow(["sample_id"] + [f"f_{s + 1}" for s in range(filters.p)])
    for sample_id, row in zip(filters.sample_ids, filters.values):
        writer.writerow([sample_id] + [fmt(v) for v in row])
    _write_text(path, buffer.getvalue())


def read_filters(path: PathLike) -> FilterValues:
    """Inverse of write_filters; the eigenvalue line is optional."""
    source = str(path)
    rows = [row for row in csv.reader(_read_lines(path)) if row]
    eigenvalues = None
    offset = 1
    if rows and rows[0][0] == EIGENVALUE_PREFIX:
        eigenvalues = [_parse_float(raw, source, 1) for raw in rows[0][1:]]
        rows = rows[1:]
        offset = 2
    if not rows or rows[0][0] != "sample_id":
        raise InputParseError("missing 'sample_id,f_1,...' header", line_number=offset, source=source)
    p = len(rows[0]) - 1
    sample_ids, values = [], []
    for line_number, row in enumerate(rows[1:], start=offset + 1):
        if len(row) != p + 1:
            raise InputParseError(f"expected {p + 1} fields, found {len(row)}", line_number=line_number, source=source)
        sample_ids.append(row[0])
        values.append([_parse_float(raw, source, line_number) for raw in row[1:]])
    try:
        return FilterValues(sample_ids=sample_ids, values=np.array(values).reshape(len(values), p),
                            eigenvalues=eigenvalues)
    except ValidationError as exc:
        raise InputParseError(f"invalid filters: {exc.errors()[0]['msg']}", source=source)


# ====================
# METADATA
# ====================

def write_metadata(path: PathLike, sample_ids: Sequence[str], columns: Dict[str, Sequence[float]]):
    """sample_id plus one column per metadata field."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    names = list(columns)
    writer.writerow(["sample_id"] + names)
    for index, sample_id in enumerate(sample_ids):
        writer.writerow([sample_id] + [fmt(columns[name][index]) for name in names])
    _write_text(path, buffer.getvalue())


def read_metadata(path: PathLike, sample_ids: Sequence[str]) -> Dict[str, np.ndarray]:
    """
    Numeric metadata columns joined onto sample_ids by id.

    Missing samples and empty cells become NaN; extra samples are ignored.
    """
    source = str(path)
    rows = [row for row in csv.reader(_read_lines(path)) if row]
    if not rows or rows[0][0] != "sample_id":
        raise InputParseError("missing 'sample_id,...' header", line_number=1, source=source)
    names = rows[0][1:]
    position = {sample_id: index for index, sample_id in enumerate(sample_ids)}
    columns = {name: np.full(len(sample_ids), np.nan) for name in names}
    for line_number, row in enumerate(rows[1:], start=2):
        if len(row) != len(names) + 1:
            raise InputParseError(f"expected {len(names) + 1} fields, found {len(row)}",
                                  line_number=line_number, source=source)
        index = position.get(row[0])
        if index is None:
            continue
        for name, raw in zip(names, row[1:]):
            if raw.strip():
                columns[name][index] = _parse_float(raw, source, line_number)
    return columns


# ====================
# MAPPER GRAPH
# ====================

def mapper_to_dict(graph: MapperGraph) -> dict:
    return {
        "sample_ids": graph.sample_ids,
        "delta": graph.delta,
        "node_function": graph.node_function,
        "cover": {
            "starts": graph.cover.starts,
            "resolutions": graph.cover.resolutions,
            "gains": graph.cover.gains,
            "counts": graph.cover.counts,
        },
        "nodes": [
            {
                "id": node.node_id,
                "cube": list(node.cube),
                "members": node.members,
                "member_ids": [graph.sample_ids[i] for i in node.members],
                "values": node.values,
                "metadata": node.metadata,
            }
            for node in graph.nodes
        ],
        "edges": [list(edge) for edge in graph.edges],
        "stats": {
            "n_nodes": len(graph.nodes),
            "n_edges": len(graph.edges),
            "n_components": graph.n_components,
            "cycle_rank": graph.cycle_rank,
        },
    }


def write_mapper_json(path: PathLike, graph: MapperGraph):
    _write_text(path, json.dumps(mapper_to_dict(graph), indent=2, sort_keys=True, allow_nan=False) + "\n")


def read_mapper_json(path: PathLike) -> MapperGraph:
    """Mapper graph, with delta and cover, as written by write_mapper_json."""
    source = str(path)
    try:
        payload = json.loads("\n".join(_read_lines(path)))
        return MapperGraph(
            sample_ids=payload["sample_ids"],
            nodes=[
                MapperNode(
                    node_id=node["id"],
                    cube=tuple(node["cube"]),
                    members=node["members"],
                    values=node["values"],
                    metadata=node.get("metadata", {}),
                )
                for node in payload["nodes"]
            ],
            edges=[tuple(edge) for edge in payload["edges"]],
            delta=payload["delta"],
            cover=HypercubeCover(**payload["cover"]),
            node_function=payload.get("node_function", "mean"),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
        raise InputParseError(f"invalid Mapper JSON: {exc}", source=source)


def write_mapper_dot(path: PathLike, graph: MapperGraph, label_columns: Optional[Sequence[str]] = None):
    """Graphviz DOT; node attributes carry size, cube, values and metadata means."""
    lines = ["graph mapper {"]
    for node in graph.nodes:
        columns = label_columns if label_columns is not None else sorted(node.metadata)
        label = "\\n".join(
            [f"n{node.node_id} ({node.size})"]
            + [f"{name}={node.metadata[name]:.4g}" for name in columns if node.metadata.get(name) is not None]
        )
        attributes = [f'label="{label}"', f"size={node.size}", f'cube="{",".join(map(str, node.cube))}"']
        attributes += [f"f{s + 1}={fmt(v)}" for s, v in enumerate(node.values)]
        attributes += [f'"{name}"={fmt(value)}' for name, value in sorted(node.metadata.items()) if value is not None]
        lines.append(f"  n{node.node_id} [{', '.join(attributes)}];")
    for u, v in graph.edges:
        lines.append(f"  n{u} -- n{v};")
    lines.append("}")
    _write_text(path, "\n".join(lines) + "\n")


# ====================
# DIAGRAMS AND REPORTS
# ====================

def diagram_path(directory: PathLike, s: int) -> Path:
    return Path(directory) / f"diagram_f{s + 1}.csv"


def write_diagram_csv(path: PathLike, diagram: ExtendedDiagram):
    """kind,birth,death,size rows."""
    lines = ["kind,birth,death,size"]
    for point in diagram.points:
        lines.append(f"{point.kind.value},{fmt(point.birth)},{fmt(point.death)},{fmt(point.size)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_diagram_csv(path: PathLike, filter_coordinate: int = 0) -> ExtendedDiagram:
    source = str(path)
    rows = [row for row in csv.reader(_read_lines(path)) if row]
    if not rows or rows[0][:3] != ["kind", "birth", "death"]:
        raise InputParseError("missing 'kind,birth,death,size' header", line_number=1, source=source)
    points = []
    for line_number, row in enumerate(rows[1:], start=2):
        try:
            kind = PointKind(row[0])
        except ValueError:
            raise InputParseError(f"unknown point kind {row[0]!r}", line_number=line_number, source=source)
        points.append(DiagramPoint(
            kind=kind,
            birth=_parse_float(row[1], source, line_number),
            death=_parse_float(row[2], source, line_number),
        ))
    return ExtendedDiagram(filter_coordinate=filter_coordinate, points=points)


def report_to_dict(report: ConfidenceReport, extra: Optional[dict] = None) -> dict:
    payload = {
        "config": report.config.model_dump(),
        "distances": report.distances,
        "d_c": report.d_c,
        "empty_iterations": report.empty_iterations,
        "coordinate_distances": report.coordinate_distances,
        "coordinate_d_c": report.coordinate_d_c,
        "n_significant": report.n_significant,
        "points": [
            {
                "coordinate": record.coordinate,
                "kind": record.point.kind.value,
                "birth": record.point.birth,
                "death": record.point.death,
                "size": record.point.size,
                "confidence": record.confidence,
                "significant": record.significant,
            }
            for record in report.per_point
        ],
    }
    if extra:
        payload.update(extra)
    return payload


def write_report_json(path: PathLike, report: ConfidenceReport, extra: Optional[dict] = None):
    """Report JSON; infinite distances are written as Infinity."""
    _write_text(path, json.dumps(report_to_dict(report, extra), indent=2, sort_keys=True) + "\n")


def write_points_csv(path: PathLike, report: ConfidenceReport):
    """Diagram points annotated with confidence and significance."""
    lines = ["coordinate,kind,birth,death,size,confidence,significant"]
    for record in report.per_point:
        point = record.point
        lines.append(
            f"{record.coordinate + 1},{point.kind.value},{fmt(point.birth)},{fmt(point.death)},"
            f"{fmt(point.size)},{fmt(record.confidence)},{str(record.significant).lower()}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_manifest(path: PathLike, manifest: RunManifest):
    _write_text(path, json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n")
