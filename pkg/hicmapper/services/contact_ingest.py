"""
Contact Ingest Service

Turns fragment-pair text into binned contact maps:
- parse_pairs: tab-separated records, '#' comments, line-numbered errors
- bin_pairs: floor(pos / bin_size) binning, symmetrized
- smooth: truncated (2h+1)x(2h+1) moving average
- band_fractions: near / mitotic contact fractions per sample
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..core.errors import (
    DegenerateInputError,
    InputParseError,
    ParameterRangeError,
    PositionRangeError,
)
from ..models.contact_models import ContactMap, FragmentPairRecord, PairFormat

logger = logging.getLogger(__name__)


def _parse_position(raw: str, name: str, line_number: int, source: Optional[str]) -> int:
    try:
        value = int(raw.strip())
    except ValueError:
        raise InputParseError(f"non-numeric {name} {raw!r}", line_number=line_number, source=source)
    if value < 0:
        raise InputParseError(f"negative {name} {value}", line_number=line_number, source=source)
    return value


def parse_pairs(
    stream: Iterable[str],
    format: Optional[PairFormat] = None,
    source: Optional[str] = None,
) -> List[FragmentPairRecord]:
    """
    Parse fragment-pair lines.

    Args:
        stream: Text lines (a file object or any iterable of strings)
        format: Column layout; tab-separated sample/pos_a/pos_b by default
        source: Name used in error messages

    Returns:
        One record per data line, in file order

    Raises:
        InputParseError: On a missing or non-numeric column, with its line number
    """
    layout = format or PairFormat()
    records: List[FragmentPairRecord] = []

    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith(layout.comment_prefix):
            continue

        fields = line.split(layout.delimiter)
        if len(fields) < layout.min_columns:
            raise InputParseError(
                f"expected at least {layout.min_columns} fields, found {len(fields)}",
                line_number=line_number, source=source,
            )

        sample_id = fields[layout.sample_column].strip()
        if not sample_id:
            raise InputParseError("empty sample id", line_number=line_number, source=source)

        records.append(FragmentPairRecord(
            sample_id=sample_id,
            pos_a=_parse_position(fields[layout.pos_a_column], "pos_a", line_number, source),
            pos_b=_parse_position(fields[layout.pos_b_column], "pos_b", line_number, source),
        ))

    logger.debug(f"Parsed {len(records)} fragment pairs from {source or 'stream'}")
    return records


def group_by_sample(records: Sequence[FragmentPairRecord]) -> Dict[str, List[FragmentPairRecord]]:
    """Split records by sample id, keeping first-seen sample order."""
    grouped: Dict[str, List[FragmentPairRecord]] = {}
    for record in records:
        grouped.setdefault(record.sample_id, []).append(record)
    return grouped


def bin_pairs(records: Sequence[FragmentPairRecord], bin_size: int, n_bins: int) -> ContactMap:
    """
    Bin fragment pairs into a symmetric contact map.

    Each off-diagonal record adds one to (i, j) and (j, i); a record inside
    one bin adds one to (i, i).

    Raises:
        ParameterRangeError: If bin_size or n_bins is not positive
        PositionRangeError: If a position is at or beyond n_bins * bin_size
    """
    if bin_size <= 0:
        raise ParameterRangeError(f"bin_size must be positive, got {bin_size}")
    if n_bins <= 0:
        raise ParameterRangeError(f"n_bins must be positive, got {n_bins}")

    limit = n_bins * bin_size
    rows: List[int] = []
    cols: List[int] = []
    for index, record in enumerate(records):
        if record.pos_a >= limit or record.pos_b >= limit:
            raise PositionRangeError(
                f"record {index} ({record.sample_id}, {record.pos_a}, {record.pos_b}) "
                f"outside [0, {limit})"
            )
        i = record.pos_a // bin_size
        j = record.pos_b // bin_size
        rows.append(i)
        cols.append(j)
        if i != j:
            rows.append(j)
            cols.append(i)

    counts = sparse.coo_matrix(
        (np.ones(len(rows), dtype=np.float64), (rows, cols)),
        shape=(n_bins, n_bins),
    ).tocsr()
    counts.sum_duplicates()
    return ContactMap(n_bins=n_bins, bin_size=bin_size, counts=counts)


def _window_operator(n: int, h: int) -> sparse.csr_matrix:
    """Banded ones matrix: 1 where |i - k| <= h."""
    offsets = list(range(-h, h + 1))
    return sparse.diags([np.ones(n - abs(k)) for k in offsets], offsets, shape=(n, n), format="csr")


def smooth(contact_map: ContactMap, h: int) -> ContactMap:
    """
    Truncated moving average over a (2h+1)x(2h+1) window.

    The window is separable, so out = D B X B D where B is the banded ones
    matrix and D holds 1 / (in-range cells per axis). h = 0 is the identity.

    Raises:
        ParameterRangeError: If h is negative
    """
    if h < 0:
        raise ParameterRangeError(f"smoothing radius must be non-negative, got {h}")
    if h == 0:
        return contact_map.model_copy(update={"counts": contact_map.counts.copy()})

    n = contact_map.n_bins
    h = min(h, n - 1) if n > 1 else 0
    if h == 0:
        return contact_map.model_copy(update={"counts": contact_map.counts.copy()})

    band = _window_operator(n, h)
    scale = sparse.diags(1.0 / np.asarray(band.sum(axis=1)).ravel())
    side = scale @ band
    smoothed = (side @ contact_map.counts @ side.T).tocsr()
    # Exact symmetry despite floating-point product order
    smoothed = ((smoothed + smoothed.T) * 0.5).tocsr()
    smoothed.eliminate_zeros()
    return ContactMap(n_bins=n, bin_size=contact_map.bin_size, counts=smoothed)


def band_fractions(
    contact_map: ContactMap,
    near_max: int = 2_000_000,
    mitotic_min: int = 2_000_000,
    mitotic_max: int = 12_000_000,
) -> Tuple[float, float]:
    """
    Fractions of off-diagonal contacts in the near and mitotic bands.

    near: 0 < separation < near_max
    mitotic: mitotic_min <= separation <= mitotic_max

    Raises:
        ParameterRangeError: If the thresholds are not ordered
        DegenerateInputError: If the map has no off-diagonal contacts
    """
    if not 0 < near_max <= mitotic_min < mitotic_max:
        raise ParameterRangeError(
            f"band thresholds must satisfy 0 < near_max <= mitotic_min < mitotic_max "
            f"(got {near_max}, {mitotic_min}, {mitotic_max})"
        )

    upper = sparse.triu(contact_map.counts, k=1).tocoo()
    total = float(upper.data.sum())
    if total <= 0.0:
        raise DegenerateInputError("no off-diagonal contacts; band fractions undefined")

    separation = (upper.col - upper.row).astype(np.int64) * contact_map.bin_size
    near = float(upper.data[separation < near_max].sum())
    mitotic = float(upper.data[(separation >= mitotic_min) & (separation <= mitotic_max)].sum())
    return near / total, mitotic / total
