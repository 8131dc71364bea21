"""
Null models and Monte Carlo p-values.

Three nulls are provided:

* data permutation: shuffle the present values over the fixed network;
* conditional permutation (local statistics): hold node ``i`` fixed and
  shuffle everything else;
* configuration: hold the values fixed and rewire the network with
  degree-preserving double edge swaps.

Every replicate draws from its own random stream derived from
``(seed, null kind, replicate index)``, so results are bitwise identical
whatever ``n_jobs`` is.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .errors import GraphNotRewireableError, InputError, StatisticError
from .graph import Graph, NodeData, WeightMatrix, as_node_data, weights_for

logger = logging.getLogger(__name__)

DATA = "data-permutation"
CONDITIONAL = "conditional-permutation"
CONFIGURATION = "configuration"

_ALIASES = {
    "data": DATA, "d": DATA, DATA: DATA,
    "conditional": CONDITIONAL, CONDITIONAL: CONDITIONAL,
    "config": CONFIGURATION, "c": CONFIGURATION, CONFIGURATION: CONFIGURATION,
}
_TAGS = {DATA: 1, CONDITIONAL: 2, CONFIGURATION: 3}
TAILS = ("upper", "lower", "two-sided")

# fraction of replicates allowed to fail before the null is abandoned
MAX_FAILED_FRACTION = 0.10
# proposals allowed per requested swap
SWAP_RETRY_FACTOR = 100


@dataclass(frozen=True)
class NullSpec:
    kind: str = DATA
    replicates: int = 999
    seed: int = 0
    swaps_per_sample: int | None = None
    tail: str = "upper"

    def __post_init__(self):
        kind = _ALIASES.get(self.kind)
        if kind is None:
            raise InputError(f"unknown null kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if self.swaps_per_sample is not None and self.swaps_per_sample < 1:
            raise InputError("swaps_per_sample must be >= 1")
        if self.tail not in TAILS:
            raise InputError(f"tail must be one of {TAILS}")

    def swaps_for(self, g: Graph) -> int:
        return self.swaps_per_sample if self.swaps_per_sample is not None else 10 * g.n_edges

    def stream(self, index: int, *extra: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([int(self.seed) & (2**64 - 1), _TAGS[self.kind], *extra, index])


@dataclass
class NullResult:
    observed: float
    p_value: float
    replicate_values: np.ndarray = field(repr=False)
    null_mean: float
    null_sd: float
    kind: str = DATA
    seed: int = 0
    replicates: int = 0
    tail: str = "upper"
    n_failed: int = 0

    def summary(self) -> dict:
        return {
            "observed": self.observed,
            "p_value": self.p_value,
            "null_mean": self.null_mean,
            "null_sd": self.null_sd,
            "kind": self.kind,
            "seed": self.seed,
            "replicates": self.replicates,
            "tail": self.tail,
        }


def p_value(observed: float, replicates: np.ndarray, tail: str = "upper") -> float:
    """Plus-one Monte Carlo p-value, ``(1 + #extreme) / (1 + #replicates)``.

    Non-finite replicates are ignored. Ties within a relative tolerance of
    1e-10 count as extreme.
    """
    r = np.asarray(replicates, dtype=float)
    r = r[np.isfinite(r)]
    tol = 1e-10 * max(1.0, abs(observed))
    if tail == "upper":
        hits = np.count_nonzero(r >= observed - tol)
    elif tail == "lower":
        hits = np.count_nonzero(r <= observed + tol)
    elif tail == "two-sided":
        m = r.mean() if len(r) else 0.0
        hits = np.count_nonzero(np.abs(r - m) >= abs(observed - m) - tol)
    else:
        raise InputError(f"unknown tail {tail!r}")
    return (1 + hits) / (1 + len(r))


def _summarize(observed: float, reps: np.ndarray, spec: NullSpec) -> NullResult:
    ok = np.isfinite(reps)
    n_failed = int(len(reps) - ok.sum())
    if n_failed > MAX_FAILED_FRACTION * len(reps):
        raise StatisticError(
            f"{n_failed} of {len(reps)} null replicates failed; statistic undefined too often"
        )
    good = reps[ok]
    return NullResult(
        observed=float(observed),
        p_value=p_value(observed, good, spec.tail),
        replicate_values=reps,
        null_mean=float(good.mean()),
        null_sd=float(good.std(ddof=1)) if len(good) > 1 else 0.0,
        kind=spec.kind,
        seed=spec.seed,
        replicates=spec.replicates,
        tail=spec.tail,
        n_failed=n_failed,
    )


def _map(fn: Callable[[int], object], n: int, n_jobs: int) -> list:
    if n_jobs is None or n_jobs <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, range(n)))


def _call(stat, W, x, y):
    return stat(W, x) if y is None else stat(W, x, y)


def _safe(fn):
    def wrapped(i):
        try:
            return fn(i)
        except StatisticError:
            return np.nan
    return wrapped


def permutation_null(stat: Callable, W, x, y=None, spec: NullSpec | None = None,
                     n_jobs: int = 1) -> NullResult:
    """Data-permutation null for ``stat(W, x)`` or ``stat(W, x, y)``.

    Each replicate shuffles the present values of ``x`` over the present
    nodes; ``y`` and the network stay fixed. ``W`` is passed to ``stat``
    unchanged, so a :class:`Graph` works for graph-level statistics.
    """
    spec = spec or NullSpec()
    if spec.kind != DATA:
        raise InputError("permutation_null requires a data-permutation spec")
    x = as_node_data(x)
    observed = _call(stat, W, x, y)
    v = x.present()

    def one(r):
        rng = np.random.default_rng(spec.stream(r))
        return _call(stat, W, x.with_values(rng.permutation(v)), y)

    reps = np.array(_map(_safe(one), spec.replicates, n_jobs), dtype=float)
    return _summarize(observed, reps, spec)


def conditional_permutation_local(W: WeightMatrix, x, spec: NullSpec | None = None,
                                  n_jobs: int = 1) -> list:
    """Conditional randomization for node Moran indices.

    For node ``i`` the value ``z_i`` is held fixed and the other present
    values are shuffled; ``I_i`` is recomputed per replicate. Returns one
    :class:`NullResult` per node, ``None`` at absent nodes. Node ``i`` uses
    the random stream ``(seed, i)``.
    """
    from .stats import _prepare

    spec = spec or NullSpec(kind=CONDITIONAL)
    if spec.kind != CONDITIONAL:
        raise InputError("conditional_permutation_local requires a conditional-permutation spec")
    Wr, z, mask = _prepare(W, x)
    ss = z @ z
    m = Wr.matrix
    observed = z * Wr.dot(z) / ss
    n = len(z)
    R = spec.replicates

    def one(i):
        cols = m.indices[m.indptr[i]:m.indptr[i + 1]]
        wts = m.data[m.indptr[i]:m.indptr[i + 1]]
        self_w = wts[cols == i].sum()
        off = cols != i
        wts = wts[off]
        k = len(wts)
        if k == 0:
            reps = np.full(R, z[i] * self_w * z[i] / ss)
        else:
            rng = np.random.default_rng(spec.stream(i))
            pool = np.delete(z, i)
            draws = rng.permuted(np.broadcast_to(pool, (R, n - 1)), axis=1)[:, :k]
            reps = z[i] * (draws @ wts + self_w * z[i]) / ss
        return _summarize(observed[i], reps, spec)

    results = _map(one, n, n_jobs)
    out: list = [None] * len(mask)
    for slot, res in zip(np.flatnonzero(mask), results):
        out[slot] = res
    return out


# ---------------------------------------------------------------------------
# degree-preserving rewiring


@numba.njit(cache=True, nogil=True)
def _swap_kernel(edges, n_nodes, n_swaps, max_tries, seed, dense):
    np.random.seed(seed)
    n_edges = edges.shape[0]
    adj = np.zeros((n_nodes if dense else 1, n_nodes if dense else 1), dtype=np.bool_)
    keys = {np.int64(-1)}
    keys.clear()
    for e in range(n_edges):
        a, b = edges[e, 0], edges[e, 1]
        if dense:
            adj[a, b] = True
            adj[b, a] = True
        else:
            keys.add(a * n_nodes + b)
    done = 0
    tries = 0
    while done < n_swaps and tries < max_tries:
        tries += 1
        e1 = np.random.randint(0, n_edges)
        e2 = np.random.randint(0, n_edges - 1)
        if e2 >= e1:
            e2 += 1
        a, b = edges[e1, 0], edges[e1, 1]
        c, d = edges[e2, 0], edges[e2, 1]
        if np.random.random() < 0.5:
            c, d = d, c
        # proposal: (a,b),(c,d) -> (a,d),(c,b)
        if a == d or c == b:
            continue
        lo1, hi1 = min(a, d), max(a, d)
        lo2, hi2 = min(c, b), max(c, b)
        if dense:
            if adj[lo1, hi1] or adj[lo2, hi2]:
                continue
            adj[a, b] = False
            adj[b, a] = False
            adj[c, d] = False
            adj[d, c] = False
            adj[lo1, hi1] = True
            adj[hi1, lo1] = True
            adj[lo2, hi2] = True
            adj[hi2, lo2] = True
        else:
            k1 = lo1 * n_nodes + hi1
            k2 = lo2 * n_nodes + hi2
            if k1 in keys or k2 in keys:
                continue
            keys.discard(edges[e1, 0] * n_nodes + edges[e1, 1])
            keys.discard(edges[e2, 0] * n_nodes + edges[e2, 1])
            keys.add(k1)
            keys.add(k2)
        edges[e1, 0] = lo1
        edges[e1, 1] = hi1
        edges[e2, 0] = lo2
        edges[e2, 1] = hi2
        done += 1
    return done


@numba.njit(cache=True)
def _any_valid_swap(edges, n_nodes):
    keys = {np.int64(-1)}
    keys.clear()
    n_edges = edges.shape[0]
    for e in range(n_edges):
        keys.add(edges[e, 0] * n_nodes + edges[e, 1])
    for e1 in range(n_edges):
        a, b = edges[e1, 0], edges[e1, 1]
        for e2 in range(e1 + 1, n_edges):
            for flip in range(2):
                c, d = edges[e2, 0], edges[e2, 1]
                if flip:
                    c, d = d, c
                if a == d or c == b:
                    continue
                k1 = min(a, d) * n_nodes + max(a, d)
                k2 = min(c, b) * n_nodes + max(c, b)
                if k1 not in keys and k2 not in keys:
                    return True
    return False


_DENSE_LIMIT = 8192


def _seed32(seed) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1)[0])
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**32))
    return int(np.random.SeedSequence(int(seed) & (2**64 - 1)).generate_state(1)[0])


def double_edge_swap(g: Graph, n_swaps: int, seed=0) -> Graph:
    """Rewire ``g`` with ``n_swaps`` accepted degree-preserving swaps.

    Two edges ``(a,b), (c,d)`` are picked at random and replaced by
    ``(a,d), (c,b)``; proposals that would create a self-loop or a repeated
    edge are rejected and retried. Gives up after ``100 * n_swaps``
    proposals with :class:`GraphNotRewireableError`.
    """
    if g.n_edges < 2:
        raise InputError("double edge swap needs at least two edges")
    if n_swaps < 0:
        raise InputError("n_swaps must be >= 0")
    edges = np.array(g.edges, dtype=np.int64)
    done = _swap_kernel(edges, g.n_nodes, n_swaps, SWAP_RETRY_FACTOR * max(n_swaps, 1),
                        _seed32(seed), g.n_nodes <= _DENSE_LIMIT)
    if done < n_swaps:
        raise GraphNotRewireableError(
            f"graph not rewireable: {done} of {n_swaps} swaps accepted "
            f"within {SWAP_RETRY_FACTOR * n_swaps} proposals"
        )
    return Graph(g.n_nodes, edges, g.labels)


def is_swap_rigid(g: Graph) -> bool:
    """True when no double edge swap of ``g`` yields a different simple graph."""
    if g.n_edges < 2:
        return True
    return not _any_valid_swap(np.array(g.edges, dtype=np.int64), g.n_nodes)


def _rewired(g: Graph, spec: NullSpec, rigid: bool):
    swaps = spec.swaps_for(g)

    def sample(r):
        if rigid:
            return g
        return double_edge_swap(g, swaps, spec.stream(r))
    return sample


def _check_rigid(g: Graph, spec: NullSpec) -> bool:
    """Detect graphs whose degree sequence admits only the graph itself.

    The configuration ensemble of such a graph is a single point, so every
    replicate is the observed graph. Other non-rewireable graphs still raise.
    """
    if g.n_edges < 2 or is_swap_rigid(g):
        logger.info("graph is swap-rigid; configuration null is degenerate")
        return True
    return False


def configuration_null(stat: Callable, g: Graph, x, y=None, spec: NullSpec | None = None,
                       kind: str | None = "row", d: int | None = None,
                       normalize: bool = False, n_jobs: int = 1) -> NullResult:
    """Configuration-model null: rewire edges, keep the data fixed.

    Each replicate runs a fresh swap chain of ``spec.swaps_for(g)`` swaps
    from the observed graph, rebuilds the weight matrix of ``kind`` (see
    :func:`~netcorr.graph.weights_for`) and re-evaluates ``stat``. With
    ``kind=None`` the statistic receives the rewired :class:`Graph`.
    """
    spec = spec or NullSpec(kind=CONFIGURATION)
    if spec.kind != CONFIGURATION:
        raise InputError("configuration_null requires a configuration spec")
    x = as_node_data(x)

    def build(h):
        return h if kind is None else weights_for(h, kind, d, normalize, quiet=True)

    observed = _call(stat, build(g), x, y)
    sample = _rewired(g, spec, _check_rigid(g, spec))

    def one(r):
        return _call(stat, build(sample(r)), x, y)

    reps = np.array(_map(_safe(one), spec.replicates, n_jobs), dtype=float)
    return _summarize(observed, reps, spec)


def configuration_null_local(g: Graph, x, spec: NullSpec | None = None, kind: str = "row",
                             n_jobs: int = 1) -> list:
    """Configuration-model null for node Moran indices, one result per node."""
    from .stats import local_moran

    spec = spec or NullSpec(kind=CONFIGURATION)
    if spec.kind != CONFIGURATION:
        raise InputError("configuration_null_local requires a configuration spec")
    x = as_node_data(x)
    observed = local_moran(weights_for(g, kind, quiet=True), x)
    sample = _rewired(g, spec, _check_rigid(g, spec))

    def one(r):
        try:
            return local_moran(weights_for(sample(r), kind, quiet=True), x)
        except StatisticError:
            return np.full(g.n_nodes, np.nan)

    reps = np.vstack(_map(one, spec.replicates, n_jobs))
    out: list = [None] * g.n_nodes
    for i in np.flatnonzero(x.mask):
        out[i] = _summarize(observed[i], reps[:, i], spec)
    return out


def run_null(stat: Callable, x, spec: NullSpec, graph: Graph | None = None,
             weights: WeightMatrix | None = None, y=None, n_jobs: int = 1) -> NullResult:
    """Dispatch a global statistic to the null named by ``spec.kind``."""
    if spec.kind == DATA:
        target = weights if weights is not None else graph
        return permutation_null(stat, target, x, y, spec, n_jobs)
    if spec.kind == CONFIGURATION:
        if graph is None:
            raise InputError("configuration null needs the graph")
        if weights is None:
            return configuration_null(stat, graph, x, y, spec, kind=None, n_jobs=n_jobs)
        return configuration_null(stat, graph, x, y, spec, kind=weights.kind, d=weights.d,
                                  normalize=weights.normalized, n_jobs=n_jobs)
    raise InputError("conditional permutation applies to local statistics only")
