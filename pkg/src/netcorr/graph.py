"""
Graph storage, node data, and weight-matrix construction.

A :class:`Graph` is an immutable undirected simple graph with contiguous
integer node indices and a label table. A :class:`WeightMatrix` wraps a
CSR matrix of interaction weights together with the kind of construction
that produced it. :class:`NodeData` carries one real value per node plus a
presence mask.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import InputError

logger = logging.getLogger(__name__)

BINARY = "binary"
ROW = "row"
ROW_SELF = "row+self"
DISTANCE = "distance"

ROW_KINDS = (ROW, ROW_SELF)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph.

    Parameters
    ----------
    n_nodes : int
        number of nodes; indices run over ``0..n_nodes-1``
    edges : ndarray, shape (E, 2)
        unordered pairs stored as ``(i, j)`` with ``i < j``, sorted
    labels : tuple
        one unique label per node index
    """

    n_nodes: int
    edges: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.n_nodes:
                raise InputError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise InputError("self-loops are not allowed")
            edges = np.sort(edges, axis=1)
            edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
            if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
                raise InputError("duplicate edges are not allowed")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        labels = tuple(self.labels) if self.labels else tuple(range(self.n_nodes))
        if len(labels) != self.n_nodes:
            raise InputError("label table does not match node count")
        if len(set(labels)) != len(labels):
            raise InputError("labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_index_edges(cls, n_nodes: int, edges, labels: Sequence = ()) -> "Graph":
        return cls(n_nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2), tuple(labels))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degree(self) -> np.ndarray:
        k = np.bincount(self.edges.ravel(), minlength=self.n_nodes)
        k.setflags(write=False)
        return k

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric binary adjacency matrix in CSR form."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        data = np.ones(len(rows))
        a = sparse.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))
        a.sort_indices()
        return a

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"unknown node label {label!r}") from None

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances; unreachable pairs are ``-1``."""
        d = csgraph.shortest_path(self.adjacency, method="D", unweighted=True, directed=False)
        out = np.where(np.isinf(d), -1, d).astype(np.int64)
        out.setflags(write=False)
        return out

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return True
        ncomp, _ = csgraph.connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def diameter(self) -> int:
        """Largest finite shortest-path length."""
        return int(self.distances.max()) if self.n_nodes else 0

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def build_graph(edge_pairs: Iterable[tuple], nodes: Iterable[Hashable] = ()) -> Graph:
    """Build a simple graph from label pairs.

    Labels are mapped to contiguous indices in first-appearance order,
    declared ``nodes`` first. Self-loops are dropped and repeated edges
    collapsed.
    """
    index: dict = {}
    for lab in nodes:
        index.setdefault(lab, len(index))
    seen = set()
    edges = []
    for pair in edge_pairs:
        a, b = pair
        ia = index.setdefault(a, len(index))
        ib = index.setdefault(b, len(index))
        if ia == ib:
            continue
        key = (ia, ib) if ia < ib else (ib, ia)
        if key not in seen:
            seen.add(key)
            edges.append(key)
    if not index:
        raise InputError("empty graph")
    return Graph(len(index), np.array(edges, dtype=np.int64).reshape(-1, 2), tuple(index))


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Sparse interaction weights ``w_ij``.

    ``kind`` is one of ``"binary"``, ``"row"`` (row-normalized adjacency),
    ``"row+self"`` (row-normalized with unit diagonal) or ``"distance"``;
    ``d`` records the distance class for the latter. ``normalized`` marks
    distance-class matrices that were row-normalized on request.
    """

    matrix: sparse.csr_matrix
    kind: str
    d: int | None = None
    normalized: bool = False
    warnings: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_row_normalized(self) -> bool:
        return self.kind in ROW_KINDS or self.normalized

    @cached_property
    def total_weight(self) -> float:
        return float(self.matrix.sum())

    @cached_property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    @property
    def rows(self) -> list:
        """Per-row ``[(column, weight), ...]`` lists."""
        m = self.matrix
        return [
            list(zip(m.indices[m.indptr[i]:m.indptr[i + 1]].tolist(),
                     m.data[m.indptr[i]:m.indptr[i + 1]].tolist()))
            for i in range(self.n)
        ]

    @property
    def has_diagonal(self) -> bool:
        return bool(np.any(self.matrix.diagonal() != 0))

    def dot(self, z: np.ndarray) -> np.ndarray:
        return self.matrix @ z

    def restrict(self, keep: np.ndarray) -> "WeightMatrix":
        """Drop rows and columns of absent nodes.

        Row-normalized kinds are renormalized over the surviving entries so
        every non-isolated row still sums to one.
        """
        keep = np.asarray(keep, dtype=bool)
        if keep.all():
            return self
        sub = self.matrix[keep][:, keep].tocsr()
        if self.is_row_normalized:
            sub = _normalize_rows(sub)
        return WeightMatrix(sub, self.kind, self.d, self.normalized, self.warnings)

    def __repr__(self):
        tag = self.kind if self.d is None else f"{self.kind}({self.d})"
        return f"WeightMatrix(n={self.n}, kind={tag}, total_weight={self.total_weight:g})"


def _normalize_rows(m: sparse.csr_matrix) -> sparse.csr_matrix:
    m = sparse.csr_matrix(m, dtype=float, copy=True)
    m.eliminate_zeros()
    counts = np.diff(m.indptr)
    s = np.bincount(np.repeat(np.arange(m.shape[0]), counts), weights=m.data,
                    minlength=m.shape[0]).astype(float)
    inv = np.divide(1.0, s, out=np.zeros_like(s), where=s > 0)
    m.data *= np.repeat(inv, counts)
    m.sort_indices()
    return m


def _isolated_warning(g: Graph, rowsum: np.ndarray, quiet: bool = False) -> tuple:
    iso = np.flatnonzero(rowsum == 0)
    if len(iso) == 0:
        return ()
    names = ", ".join(repr(g.labels[i]) for i in iso[:5])
    more = "" if len(iso) <= 5 else f" (+{len(iso) - 5} more)"
    msg = f"{len(iso)} isolated node(s) without neighbours: {names}{more}"
    if not quiet:
        logger.warning(msg)
    return (msg,)


def binary_adjacency(g: Graph, *, quiet: bool = False) -> WeightMatrix:
    a = g.adjacency.copy()
    return WeightMatrix(a, BINARY, warnings=_isolated_warning(g, g.degree, quiet))


def row_normalized(g: Graph, self_loops: bool = False, *, quiet: bool = False) -> WeightMatrix:
    """Row-normalized adjacency, ``w_ij = 1/k_i`` over neighbours.

    With ``self_loops`` the diagonal is set to one before normalizing, so
    every entry of row ``i`` is ``1/(k_i + 1)``. Isolated nodes get an empty
    row (or just the self-loop) and a logged warning.
    """
    a = g.adjacency
    if self_loops:
        a = (a + sparse.identity(g.n_nodes, format="csr")).tocsr()
    a.sort_indices()
    return WeightMatrix(
        _normalize_rows(a),
        ROW_SELF if self_loops else ROW,
        warnings=_isolated_warning(g, g.degree, quiet),
    )


def distance_class(g: Graph, d: int, normalize: bool = False) -> WeightMatrix:
    """Binary matrix linking pairs whose shortest path has exactly ``d`` hops."""
    if d < 1:
        raise InputError("distance class must be >= 1")
    i, j = np.nonzero(g.distances == d)
    m = sparse.csr_matrix((np.ones(len(i)), (i, j)), shape=(g.n_nodes, g.n_nodes))
    m.sort_indices()
    if normalize:
        m = _normalize_rows(m)
    return WeightMatrix(m, DISTANCE, d=d, normalized=normalize)


def weights_for(g: Graph, kind: str, d: int | None = None, normalize: bool = False,
                quiet: bool = False) -> WeightMatrix:
    """Build a weight matrix of the named kind; used to rebuild W on rewired graphs."""
    if kind == BINARY:
        return binary_adjacency(g, quiet=quiet)
    if kind == ROW:
        return row_normalized(g, self_loops=False, quiet=quiet)
    if kind == ROW_SELF:
        return row_normalized(g, self_loops=True, quiet=quiet)
    if kind == DISTANCE:
        if d is None:
            raise InputError("distance kind requires d")
        return distance_class(g, d, normalize=normalize)
    raise InputError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True, eq=False)
class NodeData:
    """Real values aligned to node indices, with a presence mask."""

    values: np.ndarray
    mask: np.ndarray | None = None
    name: str = "x"

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if self.mask is None:
            m = ~np.isnan(v)
        else:
            m = np.array(self.mask, dtype=bool).ravel()
            if len(m) != len(v):
                raise InputError("mask length does not match values")
            m = m & ~np.isnan(v)
        v = np.where(m, v, np.nan)
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    def __len__(self):
        return len(self.values)

    @property
    def n_present(self) -> int:
        return int(self.mask.sum())

    @property
    def complete(self) -> bool:
        return bool(self.mask.all())

    def present(self) -> np.ndarray:
        return self.values[self.mask]

    def with_values(self, present_values: np.ndarray) -> "NodeData":
        """Same mask, new values for the present nodes."""
        v = np.full(len(self.values), np.nan)
        v[self.mask] = present_values
        return NodeData(v, self.mask, self.name)


def as_node_data(x, name: str = "x") -> NodeData:
    if isinstance(x, NodeData):
        return x
    return NodeData(np.asarray(x, dtype=float), name=name)
