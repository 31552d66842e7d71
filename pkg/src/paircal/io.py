"""File formats: count-record CSV, variance-curve CSV and JSON reports.

Counts files start with ``#``-prefixed metadata lines, then a header
(``l_M,m_M`` or ``l_M,m_M,c`` for measurements, ``l_B,m_B`` for background
runs) and one row per sample window.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .detector import Counts
from .errors import DataError

COUNTS_HEADERS = {("l_M", "m_M"), ("l_M", "m_M", "c"), ("l_B", "m_B")}
COUNTS_MAGIC = "paircal counts v1"


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_counts(counts: Counts, metadata: dict | None = None, background: bool = False) -> str:
    lines = [f"# {COUNTS_MAGIC}"]
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}: {json.dumps(value)}")
    if background:
        lines.append("l_B,m_B")
        cols = [counts.l_M, counts.m_M]
    elif counts.c is not None:
        lines.append("l_M,m_M,c")
        cols = [counts.l_M, counts.m_M, counts.c]
    else:
        lines.append("l_M,m_M")
        cols = [counts.l_M, counts.m_M]
    body = [",".join(map(str, row)) for row in zip(*(col.tolist() for col in cols))]
    return "\n".join(lines + body) + "\n"


def write_counts(path, counts: Counts, metadata: dict | None = None, background: bool = False) -> None:
    atomic_write_text(path, format_counts(counts, metadata, background))


def read_counts(path) -> tuple[Counts, dict]:
    """Parse a counts file. Returns the records and the metadata dictionary."""
    metadata: dict = {}
    header = None
    rows: list[list[int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if header is None and ":" in body:
                    key, _, value = body.partition(":")
                    try:
                        metadata[key.strip()] = json.loads(value)
                    except json.JSONDecodeError:
                        metadata[key.strip()] = value.strip()
                continue
            fields = [f.strip() for f in line.split(",")]
            if header is None:
                if tuple(fields) not in COUNTS_HEADERS:
                    raise DataError(f"{path}:{lineno}: unrecognised header {line!r}")
                header = tuple(fields)
                continue
            if len(fields) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
            try:
                row = [int(f) for f in fields]
            except ValueError:
                raise DataError(f"{path}:{lineno}: counts must be integers: {line!r}") from None
            if any(v < 0 for v in row):
                raise DataError(f"{path}:{lineno}: counts must be non-negative")
            rows.append(row)
    if header is None:
        raise DataError(f"{path}: no header line")
    arr = np.array(rows, dtype=np.int64).reshape(-1, len(header))
    c = arr[:, 2] if len(header) == 3 else None
    metadata["columns"] = list(header)
    return Counts(arr[:, 0], arr[:, 1], c), metadata


def format_curve(series, metadata: dict) -> str:
    lines = [f"# {key}: {value}" for key, value in metadata.items()]
    lines.append("eta1,variance")
    lines += [f"{x!r},{y!r}" for x, y in series]
    return "\n".join(lines) + "\n"


def read_curve(path) -> list[tuple[float, float]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#") or line.startswith("eta1"):
            continue
        x, y = line.split(",")
        out.append((float(x), float(y)))
    return out


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, default=_json_default) + "\n"
