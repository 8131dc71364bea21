"""Synthetic graphs and autocorrelated node data."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import Graph, NodeData, build_graph, row_normalized

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationSpec:
    source: int
    steps: int
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 0:
            raise InputError("steps must be >= 0")
        if self.noise_sd < 0:
            raise InputError("noise_sd must be >= 0")


def propagate(g: Graph, x0: np.ndarray, source: int, steps: int) -> np.ndarray:
    """Run ``steps`` synchronous neighbour-averaging rounds with ``source`` clamped at 1.

    ``x0`` is the starting state; its source entry is set to 1 first.
    """
    if not 0 <= source < g.n_nodes:
        raise InputError(f"invalid source node {source}")
    W = row_normalized(g, quiet=True).matrix
    x = np.array(x0, dtype=float)
    x[source] = 1.0
    for _ in range(steps):
        x = W @ x
        x[source] = 1.0
    return x


def value_propagation(g: Graph, spec: PropagationSpec) -> NodeData:
    """Value-propagation data: clamped unit source, M averaging rounds, Gaussian noise.

    Noise with standard deviation ``spec.noise_sd`` is added to every node,
    the source included, after the last round.
    """
    if not 0 <= spec.source < g.n_nodes:
        raise InputError(f"invalid source node {spec.source}")
    if not g.is_connected():
        logger.warning("graph is not connected; nodes unreachable from the source stay at 0 before noise")
    x = propagate(g, np.zeros(g.n_nodes), spec.source, spec.steps)
    if spec.noise_sd > 0:
        rng = np.random.default_rng(spec.seed)
        x = x + rng.normal(0.0, spec.noise_sd, g.n_nodes)
    return NodeData(x, name="x")


def _pairs_graph(n: int, keep: np.ndarray, iu: tuple) -> Graph:
    edges = np.column_stack([iu[0][keep], iu[1][keep]])
    return Graph(n, edges)


def er_graph(n: int, p: float, seed: int = 0) -> Graph:
    """G(n, p): every unordered pair present independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise InputError("p must lie in [0, 1]")
    if n < 1:
        raise InputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    return _pairs_graph(n, rng.random(len(iu[0])) < p, iu)


def planted_partition(n: int, blocks: int, p_in: float, p_out: float,
                      seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Planted-partition graph and its block membership.

    Nodes are split into ``blocks`` contiguous groups whose sizes differ by
    at most one; pairs inside a group are linked with ``p_in``, across
    groups with ``p_out``.
    """
    if blocks < 1 or blocks > n:
        raise InputError("blocks must lie in [1, n]")
    if blocks > 1 and not p_in > p_out:
        raise InputError("planted partition needs p_in > p_out")
    for p in (p_in, p_out):
        if not 0.0 <= p <= 1.0:
            raise InputError("probabilities must lie in [0, 1]")
    sizes = np.full(blocks, n // blocks)
    sizes[: n % blocks] += 1
    membership = np.repeat(np.arange(blocks), sizes)
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    same = membership[iu[0]] == membership[iu[1]]
    prob = np.where(same, p_in, p_out)
    return _pairs_graph(n, rng.random(len(iu[0])) < prob, iu), membership


def modularity(g: Graph, membership) -> float:
    """Newman modularity of a node partition."""
    membership = np.asarray(membership)
    two_e = 2.0 * g.n_edges
    if two_e == 0:
        return 0.0
    e = g.edges
    inside = np.count_nonzero(membership[e[:, 0]] == membership[e[:, 1]])
    k = g.degree
    group_deg = np.bincount(membership, weights=k)
    return float(inside / g.n_edges - np.sum((group_deg / two_e) ** 2))


# Zachary's karate club, 1-based labels as in the original data.
_KARATE = """
1-2 1-3 1-4 1-5 1-6 1-7 1-8 1-9 1-11 1-12 1-13 1-14 1-18 1-20 1-22 1-32 2-3 2-4 2-8 2-14
2-18 2-20 2-22 2-31 3-4 3-8 3-9 3-10 3-14 3-28 3-29 3-33 4-8 4-13 4-14 5-7 5-11 6-7 6-11
6-17 7-17 9-31 9-33 9-34 10-34 14-34 15-33 15-34 16-33 16-34 19-33 19-34 20-34 21-33
21-34 23-33 23-34 24-26 24-28 24-30 24-33 24-34 25-26 25-28 25-32 26-32 27-30 27-34
28-34 29-32 29-34 30-33 30-34 31-33 31-34 32-33 32-34 33-34
"""


def karate() -> Graph:
    """Zachary's karate club (34 nodes, 78 edges), labelled ``"1"``..``"34"``."""
    pairs = [tuple(tok.split("-")) for tok in _KARATE.split()]
    return build_graph(pairs, nodes=[str(i) for i in range(1, 35)])
