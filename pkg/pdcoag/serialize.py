"""CSV / JSON encodings and atomic file output."""

import csv
import io
import json
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PDError, DomainError
from .partitions import MassPartition, SetPartition, rank_normalize


def _num(value: float) -> str:
    return repr(float(value))


def mass_csv(parts: Sequence[MassPartition], index_column: str | None = None) -> str:
    """Encode mass partitions as `w1,...,wK,residual` rows, zero-padded to a common K.

    With index_column set, each row is prefixed by its position (used for trajectories).
    """
    width = max((len(p) for p in parts), default=0)
    header = [f"w{j}" for j in range(1, width + 1)] + ["residual"]
    if index_column:
        header.insert(0, index_column)
    lines = [",".join(header)]
    for i, p in enumerate(parts):
        cells = [_num(a) for a in p.atoms] + ["0.0"] * (width - len(p)) + [_num(p.residual)]
        if index_column:
            cells.insert(0, str(i))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def read_mass_csv(text: str) -> list[MassPartition]:
    """Parse `w1,...,wK,residual` rows. A leading header row is skipped.

    Raises DomainError naming the 1-based data row on malformed input.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and rows[0] and rows[0][0].strip().lower().startswith("w"):
        rows = rows[1:]
    parts = []
    for number, row in enumerate(rows, start=1):
        try:
            values = [float(c) for c in row]
        except ValueError as e:
            raise DomainError(f"row {number}: not numeric ({e})") from e
        if len(values) < 1 or not all(np.isfinite(values)):
            raise DomainError(f"row {number}: expected finite `w1,...,wK,residual` values")
        try:
            parts.append(rank_normalize(values[:-1], values[-1]))
        except PDError as e:
            raise DomainError(f"row {number}: {e}") from e
    return parts


def set_partition_csv(parts: Sequence[SetPartition]) -> str:
    """One restricted-growth row per partition, header `l1..ln`."""
    size = max((p.size for p in parts), default=0)
    lo = parts[0].lo if parts else 1
    lines = [",".join(f"l{lo + j}" for j in range(size))]
    for p in parts:
        lines.append(",".join(str(v) for v in p.restricted_growth()))
    return "\n".join(lines) + "\n"


def json_lines(records: Iterable[dict]) -> str:
    """One compact JSON document per line."""
    return "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)


def histogram_csv(values: Sequence[float], bins: int, lo: float = 0.0, hi: float = 1.0) -> str:
    """`left,right,count` rows for plot-ready histograms."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=(lo, hi))
    lines = ["left,right,count"]
    for c, left, right in zip(counts, edges[:-1], edges[1:]):
        lines.append(f"{_num(left)},{_num(right)},{int(c)}")
    return "\n".join(lines) + "\n"


def atomic_write(path: Path, text: str) -> None:
    """Write text to path via a temp file in the same directory, then rename."""
    path = Path(path)
    dir_path = path.parent if path.parent != Path() else Path(".")
    with tempfile.NamedTemporaryFile(
        mode="w", dir=dir_path, suffix=".tmp", delete=False, encoding="utf-8", newline=""
    ) as f:
        f.write(text)
        temp_path = Path(f.name)

    temp_path.replace(path)
