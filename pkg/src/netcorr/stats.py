"""
Point estimates of network autocorrelation and correlation.

Every statistic takes a :class:`~netcorr.graph.WeightMatrix` and one or two
node-value vectors (a :class:`~netcorr.graph.NodeData` or anything
array-like, with NaN marking absent nodes). Absent nodes are dropped before
anything is computed: they do not enter means or norms, and their rows and
columns are removed from the weight matrix (row-normalized kinds are
renormalized over the remaining neighbours).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantDataError, EmptyWeightsError, NetworkVarianceError, StatisticError
from .graph import Graph, NodeData, WeightMatrix, as_node_data, distance_class

__all__ = [
    "center",
    "lag",
    "global_moran",
    "local_moran",
    "moran_scatter",
    "MoranScatter",
    "geary_c",
    "getis_ord_global",
    "getis_ord_local",
    "assortativity_continuous",
    "coscia_rho",
    "lee_l",
    "pearson",
    "correlogram",
    "CorrelogramPoint",
]

# relative threshold below which a sum of squares counts as zero
_TINY = 1e-24


def center(x) -> np.ndarray:
    """Subtract the mean over present nodes.

    Absent nodes carry 0 in the output.

    >>> center([0, 0, 1])
    array([-0.33333333, -0.33333333,  0.66666667])
    """
    x = as_node_data(x)
    if x.n_present == 0:
        raise StatisticError("no present values")
    z = np.zeros(len(x))
    v = x.present()
    z[x.mask] = v - v.mean()
    return z


def lag(W: WeightMatrix, z) -> np.ndarray:
    """Lagged vector ``W @ z``; the neighbour average for row-normalized W."""
    z = np.asarray(z, dtype=float)
    if z.shape[0] != W.n:
        raise StatisticError(f"dimension mismatch: W is {W.n}x{W.n}, vector has {z.shape[0]}")
    return W.dot(z)


def _prepare(W: WeightMatrix, x) -> tuple[WeightMatrix, np.ndarray, np.ndarray]:
    """Restrict to present nodes; return (W_present, centered values, mask)."""
    x = as_node_data(x)
    if len(x) != W.n:
        raise StatisticError(f"dimension mismatch: W is {W.n}x{W.n}, data has {len(x)}")
    if x.n_present < 2:
        raise StatisticError("need at least two present values")
    Wr = W.restrict(x.mask)
    v = x.present()
    z = v - v.mean()
    ss = z @ z
    if ss <= _TINY * max(1.0, float(v @ v)):
        raise ConstantDataError()
    return Wr, z, x.mask


def _expand(mask: np.ndarray, vals: np.ndarray) -> np.ndarray:
    out = np.full(len(mask), np.nan)
    out[mask] = vals
    return out


def global_moran(W: WeightMatrix, x) -> float:
    """Network Moran index ``(N/|W|) z.Wz / z.z``."""
    Wr, z, _ = _prepare(W, x)
    tw = Wr.total_weight
    if tw == 0:
        raise EmptyWeightsError()
    return float(len(z) / tw * (z @ Wr.dot(z)) / (z @ z))


def local_moran(W: WeightMatrix, x) -> np.ndarray:
    """Node Moran indices ``z_i (Wz)_i / z.z``; NaN at absent nodes."""
    Wr, z, mask = _prepare(W, x)
    if Wr.total_weight == 0:
        raise EmptyWeightsError()
    return _expand(mask, z * Wr.dot(z) / (z @ z))


QUADRANTS = ("HH", "HL", "LH", "LL")


@dataclass(frozen=True)
class MoranScatter:
    """Centered values against their lag, one point per present node."""

    z: np.ndarray
    lagged: np.ndarray
    labels: tuple
    slope: float

    @property
    def quadrant(self) -> tuple:
        out = []
        for zi, li in zip(self.z, self.lagged):
            if zi > 0:
                out.append("HH" if li > 0 else "HL")
            else:
                out.append("LH" if li > 0 else "LL")
        return tuple(out)

    @property
    def residuals(self) -> np.ndarray:
        return self.lagged - self.slope * self.z

    def outliers(self, k: float = 2.0) -> np.ndarray:
        """Boolean flags for points whose regression residual exceeds k residual SDs."""
        r = self.residuals
        sd = r.std()
        if sd == 0:
            return np.zeros(len(r), dtype=bool)
        return np.abs(r) > k * sd

    def __len__(self):
        return len(self.z)


def moran_scatter(W: WeightMatrix, x, labels=None) -> MoranScatter:
    """Moran scatter points ``(z_i, z~_i)`` and the origin-regression slope.

    Ties on either axis count as Low. Absent nodes are left out.
    """
    Wr, z, mask = _prepare(W, x)
    if Wr.total_weight == 0:
        raise EmptyWeightsError()
    zl = Wr.dot(z)
    labs = tuple(labels) if labels is not None else tuple(range(W.n))
    labs = tuple(lab for lab, m in zip(labs, mask) if m)
    return MoranScatter(z, zl, labs, float((z @ zl) / (z @ z)))


def geary_c(W: WeightMatrix, x) -> float:
    """Geary's C, ``(N-1) sum w_ij (x_i-x_j)^2 / (2|W| sum z_i^2)``."""
    Wr, z, _ = _prepare(W, x)
    tw = Wr.total_weight
    if tw == 0:
        raise EmptyWeightsError()
    m = Wr.matrix.tocoo()
    num = float(np.sum(m.data * (z[m.row] - z[m.col]) ** 2))
    return (len(z) - 1) * num / (2.0 * tw * (z @ z))


def _nonneg(W: WeightMatrix, x) -> tuple[WeightMatrix, np.ndarray, np.ndarray]:
    x = as_node_data(x)
    if len(x) != W.n:
        raise StatisticError("dimension mismatch")
    v = x.present()
    if np.any(v < 0):
        raise StatisticError("Getis–Ord requires nonnegative data")
    if not np.any(v > 0):
        raise StatisticError("Getis–Ord requires data that is not all zero")
    return W.restrict(x.mask), v, x.mask


def getis_ord_global(W: WeightMatrix, x) -> float:
    """General G, ``sum_{i!=j} w_ij x_i x_j / sum_{i!=j} x_i x_j``.

    Returns 0 when no ordered pair of distinct nodes carries mass (the
    numerator is then zero as well).
    """
    Wr, v, _ = _nonneg(W, x)
    m = Wr.matrix.tocoo()
    off = m.row != m.col
    num = float(np.sum(m.data[off] * v[m.row[off]] * v[m.col[off]]))
    # sum over i != j of x_i x_j from prefix sums: every term is nonnegative,
    # so no cancellation when one value dominates
    den = float(2.0 * np.sum(v[1:] * np.cumsum(v)[:-1]))
    if den <= 0:
        return 0.0
    return num / den


def getis_ord_local(W: WeightMatrix, x) -> np.ndarray:
    """Local G_i, ``sum_{j!=i} w_ij x_j / sum_{j!=i} x_j``.

    Undefined entries (no mass outside node i) and absent nodes are NaN.
    """
    Wr, v, mask = _nonneg(W, x)
    m = Wr.matrix.tocoo()
    off = m.row != m.col
    num = np.bincount(m.row[off], weights=m.data[off] * v[m.col[off]], minlength=len(v))
    # mass strictly before i plus mass strictly after i, without subtraction
    before = np.concatenate(([0.0], np.cumsum(v)[:-1]))
    after = np.concatenate((np.cumsum(v[::-1])[:-1][::-1], [0.0]))
    den = before + after
    g = np.divide(num, den, out=np.full(len(v), np.nan), where=den > 0)
    return _expand(mask, g)


def assortativity_continuous(g: Graph, x) -> float:
    """Unbinned assortativity: ``(x.Ax - (k.x)^2/2E) / var(k)``.

    Data is not centered; ``var(k)`` is the population variance of degree.
    Absent nodes are removed from the graph first.
    """
    x = as_node_data(x)
    if len(x) != g.n_nodes:
        raise StatisticError("dimension mismatch")
    a = g.adjacency
    if not x.complete:
        a = a[x.mask][:, x.mask].tocsr()
    v = x.present()
    k = np.asarray(a.sum(axis=1)).ravel()
    two_e = k.sum()
    var_k = k.var()
    if var_k <= 1e-15 or two_e == 0:
        raise StatisticError("degenerate degree variance")
    return float((v @ (a @ v) - (k @ v) ** 2 / two_e) / var_k)


def _prepare_pair(W: WeightMatrix, x, y):
    x = as_node_data(x, "x")
    y = as_node_data(y, "y")
    if len(x) != len(y):
        raise StatisticError("x and y have different lengths")
    both = x.mask & y.mask
    x = NodeData(x.values, both, x.name)
    y = NodeData(y.values, both, y.name)
    Wr, zx, _ = _prepare(W, x)
    _, zy, _ = _prepare(W, y)
    return Wr, zx, zy


def coscia_rho(W: WeightMatrix, x, y) -> float:
    """Network correlation ``x.Wy / sqrt(x.Wx) sqrt(y.Wy)`` on centered data.

    Raises :class:`NetworkVarianceError` when either network variance is
    not strictly positive.
    """
    Wr, zx, zy = _prepare_pair(W, x, y)
    vx = zx @ Wr.dot(zx)
    vy = zy @ Wr.dot(zy)
    if vx <= 0 or vy <= 0:
        raise NetworkVarianceError()
    return float(zx @ Wr.dot(zy) / np.sqrt(vx * vy))


def lee_l(W: WeightMatrix, x, y) -> float:
    """Lee's L: normalized dot product of the two lagged vectors.

    ``L = N / sum_i (sum_j w_ij)^2 * (Wx).(Wy) / (|x||y|)`` on centered data.
    Pass a ``row+self`` matrix (``row_normalized(g, self_loops=True)``) for
    the usual choice where each node also interacts with itself.
    """
    Wr, zx, zy = _prepare_pair(W, x, y)
    rs = Wr.row_sums
    denom = float(rs @ rs)
    if denom == 0:
        raise EmptyWeightsError()
    lx = Wr.dot(zx)
    ly = Wr.dot(zy)
    return float(len(zx) / denom * (lx @ ly) / np.sqrt((zx @ zx) * (zy @ zy)))


def pearson(x, y) -> float:
    """Plain Pearson correlation over nodes present in both vectors."""
    x = as_node_data(x)
    y = as_node_data(y)
    both = x.mask & y.mask
    a = x.values[both] - x.values[both].mean()
    b = y.values[both] - y.values[both].mean()
    den = np.sqrt((a @ a) * (b @ b))
    if den == 0:
        raise ConstantDataError()
    return float(a @ b / den)


@dataclass
class CorrelogramPoint:
    d: int
    value: float | None
    total_weight: float
    p_value: float | None = None


def correlogram(g: Graph, x, d_max: int, null=None, normalize: bool = False,
                n_jobs: int = 1) -> list[CorrelogramPoint]:
    """Moran index per distance class ``d = 1..d_max``.

    Distance classes are binary by default (``normalize=True`` row-normalizes
    them). Classes with no pairs, or no pairs among present nodes, get
    ``value=None``. With a :class:`~netcorr.inference.NullSpec` every
    defined point also carries a p-value.
    """
    if d_max < 1:
        raise StatisticError("d_max must be >= 1")
    x = as_node_data(x)
    points = []
    for d in range(1, d_max + 1):
        W = distance_class(g, d, normalize=normalize)
        Wr = W.restrict(x.mask)
        if Wr.total_weight == 0:
            points.append(CorrelogramPoint(d, None, Wr.total_weight))
            continue
        value = global_moran(W, x)
        p = None
        if null is not None:
            from .inference import run_null

            p = run_null(global_moran, x, null, graph=g, weights=W, n_jobs=n_jobs).p_value
        points.append(CorrelogramPoint(d, value, Wr.total_weight, p))
    return points
