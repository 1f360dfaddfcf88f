"""Plain-text readers and writers for graphs, labels and signals.

Graph file: first non-comment line ``n m``, then one ``t u v w`` line per
edge.  Label file: ``t v label`` lines.  Signal file: CSV with ``n`` rows and
``m`` columns and an optional header row.  ``#`` starts a comment line in
the graph and label formats.  Numbers are parsed locale-independently.
"""
from __future__ import annotations

import csv
import io
import os
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ShapeMismatch
from .graph import TemporalGraph

__all__ = [
    "parse_graph",
    "read_graph",
    "format_graph",
    "write_graph",
    "read_labels",
    "write_labels",
    "parse_signal",
    "read_signal",
    "write_signal",
]


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {no}: expected an integer, got {tok!r}") from None


def _float(tok: str, no: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"line {no}: expected a number, got {tok!r}") from None


def parse_graph(text: str, *, check: bool = True) -> TemporalGraph:
    rows = _lines(text)
    try:
        no, header = next(rows)
    except StopIteration:
        raise ParseError("empty graph file: missing 'n m' header") from None
    parts = header.split()
    if len(parts) != 2:
        raise ParseError(f"line {no}: header must be 'n m'")
    n, m = _int(parts[0], no), _int(parts[1], no)
    if n < 1 or m < 1:
        raise ParseError(f"line {no}: n and m must be positive")
    snaps = [[] for _ in range(m)]
    for no, line in rows:
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"line {no}: expected 't u v w'")
        t, u, v = (_int(p, no) for p in parts[:3])
        w = _float(parts[3], no)
        if not 0 <= t < m:
            raise ParseError(f"line {no}: snapshot {t} outside [0, {m})")
        snaps[t].append((u, v, w))
    return TemporalGraph(n, snaps, check=check)


def read_graph(path, *, check: bool = True) -> TemporalGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"), check=check)


def format_graph(tg: TemporalGraph, comment: str | None = None) -> str:
    out = io.StringIO()
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    out.write(f"{tg.n} {tg.m}\n")
    for t in range(tg.m):
        u, v, w = tg.edges(t)
        for a, b, c in zip(u.tolist(), v.tolist(), w.tolist()):
            out.write(f"{t} {a} {b} {c:.17g}\n")
    return out.getvalue()


def write_graph(tg: TemporalGraph, path, comment: str | None = None) -> None:
    Path(path).write_text(format_graph(tg, comment), encoding="utf-8")


def read_labels(path, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Read ``t v label`` lines into an ``(n, m)`` integer array.

    Without explicit ``n``/``m`` the shape is inferred from the largest ids.
    Every ``(v, t)`` pair must be assigned exactly once.
    """
    entries = []
    for no, line in _lines(Path(path).read_text(encoding="utf-8")):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {no}: expected 't v label'")
        entries.append(tuple(_int(p, no) for p in parts))
    if not entries:
        raise ParseError("label file has no entries")
    arr = np.array(entries, dtype=np.int64)
    if arr[:, :2].min() < 0 or arr[:, 2].min() < 0:
        raise ParseError("negative snapshot, vertex or label id")
    m = int(arr[:, 0].max()) + 1 if m is None else m
    n = int(arr[:, 1].max()) + 1 if n is None else n
    if arr[:, 0].max() >= m or arr[:, 1].max() >= n:
        raise ParseError("label entry outside the graph's shape")
    labels = np.full((n, m), -1, dtype=np.int64)
    seen = np.zeros((n, m), dtype=bool)
    for t, v, lab in entries:
        if seen[v, t]:
            raise ParseError(f"vertex {v} in snapshot {t} labelled twice")
        seen[v, t] = True
        labels[v, t] = lab
    if not seen.all():
        raise ParseError("label file does not cover every (vertex, snapshot)")
    return labels


def write_labels(labels, path) -> None:
    labels = np.asarray(labels)
    n, m = labels.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in range(m):
            for v in range(n):
                fh.write(f"{t} {v} {int(labels[v, t])}\n")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def parse_signal(text: str, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Parse an ``n x m`` CSV; a first row that is not all numeric is a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c.strip()) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ParseError("signal file has no data rows")
    width = len(rows[0])
    vals = []
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"signal row {i} has {len(r)} columns, expected {width}")
        try:
            vals.append([float(c) for c in r])
        except ValueError:
            raise ParseError(f"signal row {i} is not numeric") from None
    arr = np.array(vals, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParseError("signal contains non-finite values")
    if (n is not None and arr.shape[0] != n) or (m is not None and arr.shape[1] != m):
        raise ShapeMismatch(f"signal is {arr.shape[0]}x{arr.shape[1]}, expected {n}x{m}")
    return arr


def read_signal(path, n: int | None = None, m: int | None = None) -> np.ndarray:
    return parse_signal(Path(path).read_text(encoding="utf-8"), n, m)


def write_signal(signal, path, header: bool = False) -> None:
    arr = np.asarray(signal, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"t{t}" for t in range(arr.shape[1])])
        for row in arr:
            w.writerow([f"{x:.17g}" for x in row])


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
