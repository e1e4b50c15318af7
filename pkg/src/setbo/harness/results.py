"""Append-only CSV tables.

Every file starts with a ``# config_sha256=<hex>`` comment line followed by a
fixed header.  Floats are written with ``repr`` so a table read back compares
equal to the table written.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

HISTORY_COLUMNS = ("strategy", "L", "seed", "iteration", "best_so_far", "objective_value")
TIMING_COLUMNS = ("strategy", "L", "seed", "iteration", "wall_seconds")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    config_hash: str
    rows: list[tuple] = field(default_factory=list)
    path: str | None = None

    def __post_init__(self):
        self.columns = tuple(self.columns)
        if self.path is not None:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self._preamble())
            for row in self.rows:
                self._write_row(row)

    def _preamble(self) -> str:
        return f"# config_sha256={self.config_hash}\n" + ",".join(self.columns) + "\n"

    def _line(self, row) -> str:
        buf = io.StringIO()
        # a CRLF terminator makes the writer quote fields holding either
        # character; the line itself still ends in LF
        csv.writer(buf, lineterminator="\r\n").writerow([_fmt(v) for v in row])
        return buf.getvalue()[:-2] + "\n"

    def _write_row(self, row) -> None:
        with open(self.path, "a", encoding="utf-8", newline="") as fh:
            fh.write(self._line(row))
            fh.flush()
            os.fsync(fh.fileno())

    def append(self, row) -> None:
        """Add a row; when backed by a file it is flushed immediately."""
        row = tuple(row)
        if len(row) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(row)}")
        self.rows.append(row)
        if self.path is not None:
            self._write_row(row)

    def to_csv(self) -> str:
        return self._preamble() + "".join(self._line(r) for r in self.rows)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultTable):
            return NotImplemented
        return (
            self.columns == other.columns
            and self.config_hash == other.config_hash
            and len(self.rows) == len(other.rows)
            and all(_row_equal(a, b) for a, b in zip(self.rows, other.rows))
        )


def _row_equal(a, b) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if isinstance(x, float) and isinstance(y, float) and math.isnan(x) and math.isnan(y):
            continue
        if x != y or type(x) is not type(y):
            return False
    return True


def parse_table(text: str) -> ResultTable:
    first, _, rest = text.partition("\n")
    if not first.startswith("# config_sha256="):
        raise ValueError("missing config hash line")
    config_hash = first.split("=", 1)[1].rstrip("\r")
    # a reader over the stream, not split lines, keeps quoted newlines intact
    reader = csv.reader(io.StringIO(rest, newline=""))
    header = next(reader, None)
    if header is None:
        raise ValueError("missing header")
    rows = [tuple(_parse(v) for v in row) for row in reader]
    return ResultTable(tuple(header), config_hash, rows)


def read_table(path) -> ResultTable:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh.read())
