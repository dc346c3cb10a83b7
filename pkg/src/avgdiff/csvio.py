"""Deterministic CSV output: LF endings, 17 significant digits, header row."""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    if hasattr(v, "dtype"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def render_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} fields, header has {width}")
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def dict_rows(rows: Sequence[dict]):
    """Header and value lists from homogeneous dict rows."""
    if not rows:
        return [], []
    header = list(rows[0])
    for r in rows:
        if list(r) != header:
            raise ValueError("rows are not homogeneous")
    return header, [[r[k] for k in header] for r in rows]


def write_csv(rows, path, header: Sequence[str] = None) -> None:
    """Write ``rows`` (lists with an explicit header, or dicts) to ``path``."""
    if header is None:
        header, rows = dict_rows(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(render_csv(header, rows))
