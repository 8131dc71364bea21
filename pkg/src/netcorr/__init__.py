"""Exploratory statistics for node-valued networks.

Global and local Moran indices, Geary's C, Getis-Ord, continuous
assortativity, Coscia's network correlation, Lee's L and Moran
correlograms, with data-permutation and configuration-model nulls.
"""

from .errors import (
    ConstantDataError,
    EmptyWeightsError,
    GraphNotRewireableError,
    InputError,
    NetcorrError,
    NetworkVarianceError,
    StatisticError,
)
from .graph import (
    Graph,
    NodeData,
    WeightMatrix,
    binary_adjacency,
    build_graph,
    distance_class,
    row_normalized,
    weights_for,
)
from .inference import (
    NullResult,
    NullSpec,
    conditional_permutation_local,
    configuration_null,
    configuration_null_local,
    double_edge_swap,
    permutation_null,
)
from .stats import (
    CorrelogramPoint,
    MoranScatter,
    assortativity_continuous,
    center,
    correlogram,
    coscia_rho,
    geary_c,
    getis_ord_global,
    getis_ord_local,
    global_moran,
    lag,
    lee_l,
    local_moran,
    moran_scatter,
    pearson,
)

__version__ = "0.1.0"
