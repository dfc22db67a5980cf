"""CSV emission and the flat ``key = value`` configuration format."""

from __future__ import annotations

import csv
import io
import sys
from contextlib import contextmanager

import numpy as np

from ..errors import ConfigInvalid
from ..montecarlo import CSV_COLUMNS


def format_value(value) -> str:
    """Cell text: blank for None, ``repr`` for floats (shortest round-trip form)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def render_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(c) for c in columns]
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def records_csv(records) -> str:
    return render_csv((r.as_row() for r in records), CSV_COLUMNS)


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def write_text(text: str, path=None) -> None:
    """Write to ``path``, or to stdout when the path is None or ``-``."""
    with _sink(path) as fh:
        fh.write(text)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment; later keys win."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigInvalid(f"line {lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def read_config(path) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc


__all__ = ["format_value", "parse_config_text", "read_config", "records_csv", "render_csv",
           "write_text"]
