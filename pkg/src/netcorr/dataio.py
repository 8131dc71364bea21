"""
Reading edge lists and node values, writing result documents.

Edge lists hold one edge per line as two whitespace-separated labels;
``#`` starts a comment and blank lines are skipped. Node values are
comma-separated with a header row; the first column holds node labels.

Result documents are written either as JSON ("structured-text") or as CSV
("delimited"). The CSV form starts with a single ``# `` line carrying the
document header as JSON, followed by the table.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError
from .graph import Graph, NodeData, build_graph

logger = logging.getLogger(__name__)

STRUCTURED = "structured-text"
DELIMITED = "delimited"
_FORMATS = {"json": STRUCTURED, STRUCTURED: STRUCTURED, "csv": DELIMITED, DELIMITED: DELIMITED}


def parse_edge_list(lines) -> Graph:
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 2:
            raise InputError(f"line {lineno}: expected two labels, got {len(toks)}: {raw.rstrip()!r}")
        pairs.append((toks[0], toks[1]))
    return build_graph(pairs)


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh)


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j in g.edges:
            a, b = str(g.labels[i]), str(g.labels[j])
            if any(ch.isspace() for ch in a + b) or "#" in a + b:
                raise InputError(f"label cannot be written to an edge list: {a!r} / {b!r}")
            fh.write(f"{a} {b}\n")


def read_value_table(path) -> tuple[list[str], dict[str, dict[str, str]]]:
    """Return (header, {label: {column: raw cell}}); duplicate labels are an error."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if len(header) < 2:
            raise InputError(f"{path}: need a label column and at least one value column")
        rows: dict[str, dict[str, str]] = {}
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}: row {rowno} has {len(row)} cells, header has {len(header)}")
            label = row[0]
            if label in rows:
                raise InputError(f"{path}: duplicate label {label!r} at row {rowno}")
            rows[label] = dict(zip(header[1:], row[1:]))
            rows[label]["__row__"] = str(rowno)
    return header, rows


def read_node_values(path, column: str, graph: Graph, log10: bool = False) -> NodeData:
    """Values of ``column`` aligned to ``graph`` by label.

    Graph nodes missing from the file, or with an empty cell, are masked.
    With ``log10`` the values are log-transformed and non-positive values
    masked with a warning.
    """
    header, rows = read_value_table(path)
    if column not in header[1:]:
        raise InputError(f"{path}: no column {column!r}; have {header[1:]}")
    index = {str(lab): i for i, lab in enumerate(graph.labels)}
    unknown = [lab for lab in rows if lab not in index]
    if unknown:
        shown = ", ".join(repr(u) for u in unknown[:10])
        raise InputError(f"{path}: {len(unknown)} label(s) not in graph: {shown}")
    values = np.full(graph.n_nodes, np.nan)
    for lab, row in rows.items():
        cell = row[column].strip()
        if cell == "" or cell.lower() in ("na", "nan"):
            continue
        try:
            values[index[lab]] = float(cell)
        except ValueError:
            raise InputError(f"{path}: row {row['__row__']}, column {column!r}: "
                             f"not a number: {cell!r}") from None
    missing = graph.n_nodes - len(rows)
    if missing:
        logger.warning("%s: %d graph node(s) have no row; masked", path, missing)
    if log10:
        bad = np.isfinite(values) & (values <= 0)
        if bad.any():
            names = [str(graph.labels[i]) for i in np.flatnonzero(bad)]
            logger.warning("%s: %d non-positive %s value(s) masked before log10: %s",
                           path, len(names), column, ", ".join(names[:10]))
            values[bad] = np.nan
        with np.errstate(invalid="ignore"):
            values = np.log10(values)
    return NodeData(values, name=column)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


@dataclass
class ResultDocument:
    """One analysis result.

    ``records`` is a list of flat rows: a single row for a global result,
    one row per node (keyed by ``label``) for local results, one row per
    distance class for a correlogram. ``nulls`` maps each p-value column to
    the null that produced it (kind, seed, replicates, tail).
    """

    statistic: str
    scope: str
    records: list = field(default_factory=list)
    nulls: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {"statistic": self.statistic, "scope": self.scope,
                "nulls": self.nulls, "metadata": self.metadata}


def _clean(v):
    """JSON-safe scalar: numpy types unwrapped, NaN/inf to None."""
    if isinstance(v, dict):
        return {str(k): _clean(val) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(u) for u in v]
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _columns(records: list) -> list[str]:
    cols: list[str] = []
    for r in records:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def dumps_results(doc: ResultDocument, fmt: str = STRUCTURED) -> str:
    fmt = _FORMATS.get(fmt)
    if fmt is None:
        raise InputError("format must be structured-text/json or delimited/csv")
    if fmt == STRUCTURED:
        body = _clean(asdict(doc))
        return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(_clean(doc.header()), sort_keys=True, allow_nan=False) + "\n")
    records = _clean(doc.records)
    cols = _columns(records)
    csv.writer(buf, lineterminator="\n").writerow(cols)
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONNUMERIC)
    for r in records:
        w.writerow([math.nan if r.get(c) is None else r.get(c) for c in cols])
    return buf.getvalue()


def write_results(doc: ResultDocument, path, fmt: str = STRUCTURED) -> None:
    text = dumps_results(doc, fmt)
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


# delimited columns that hold counts; everything unquoted is read back as float
_INT_COLUMNS = {"d", "n_failed", "replicates", "seed", "degree", "index"}


def _from_cell(col: str, v):
    if isinstance(v, str):
        return v
    if math.isnan(v):
        return None
    if col in _INT_COLUMNS and v.is_integer():
        return int(v)
    return v


def loads_results(text: str) -> ResultDocument:
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        return ResultDocument(d["statistic"], d["scope"], d.get("records", []),
                              d.get("nulls", {}), d.get("metadata", {}))
    first, _, rest = text.partition("\n")
    if not first.startswith("# "):
        raise InputError("delimited result is missing its header line")
    head = json.loads(first[2:])
    lines = rest.splitlines()
    records = []
    if lines:
        cols = next(csv.reader([lines[0]]))
        for row in csv.reader(lines[1:], quoting=csv.QUOTE_NONNUMERIC):
            records.append({c: _from_cell(c, v) for c, v in zip(cols, row)})
    return ResultDocument(head["statistic"], head["scope"], records,
                          head.get("nulls", {}), head.get("metadata", {}))


def read_results(path) -> ResultDocument:
    return loads_results(Path(path).read_text(encoding="utf-8"))


def env_path(name: str, default=None):
    v = os.environ.get(name)
    return Path(v) if v else default
