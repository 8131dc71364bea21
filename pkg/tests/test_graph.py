import logging

import numpy as np
import pytest
from hypothesis import given
from scipy import sparse

import oracles
from helpers import graphs, path_graph
from netcorr.errors import InputError
from netcorr.graph import (
    Graph,
    NodeData,
    binary_adjacency,
    build_graph,
    distance_class,
    row_normalized,
    weights_for,
)


def dense(W):
    return W.matrix.toarray()


class TestBuildGraph:
    def test_path(self):
        g = build_graph([("a", "b"), ("b", "c")])
        assert g.n_nodes == 3 and g.n_edges == 2
        assert g.labels == ("a", "b", "c")
        assert g.edges.tolist() == [[0, 1], [1, 2]]

    def test_dedup_and_self_loop(self):
        g = build_graph([("a", "b"), ("a", "b"), ("a", "a")])
        assert (g.n_nodes, g.n_edges) == (2, 1)

    def test_reversed_duplicate_collapses(self):
        g = build_graph([("a", "b"), ("b", "a")])
        assert g.n_edges == 1

    def test_first_appearance_order(self):
        g = build_graph([("z", "y"), ("a", "z")])
        assert g.labels == ("z", "y", "a")
        assert g.index("a") == 2

    def test_empty(self):
        with pytest.raises(InputError, match="empty graph"):
            build_graph([])

    def test_declared_isolated_nodes(self):
        # declared nodes are indexed first
        g = build_graph([("a", "b")], nodes=["c"])
        assert g.labels == ("c", "a", "b")
        assert g.degree.tolist() == [0, 1, 1]

    def test_integer_labels(self):
        g = build_graph([(1, 2), (2, 3)])
        assert g.labels == (1, 2, 3)

    def test_rejects_bad_index_edges(self):
        with pytest.raises(InputError):
            Graph.from_index_edges(3, [(0, 0)])
        with pytest.raises(InputError):
            Graph.from_index_edges(3, [(0, 5)])

    def test_distances_and_diameter(self, p3):
        assert p3.distances.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
        assert p3.diameter() == 2 and p3.is_connected()

    @given(graphs())
    def test_degree_sum(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        assert g.degree.sum() == 2 * g.n_edges
        assert len(set(g.labels)) == n


class TestRowNormalized:
    def test_p3_rows(self, p3):
        assert row_normalized(p3).rows == [[(1, 1.0)], [(0, 0.5), (2, 0.5)], [(1, 1.0)]]

    def test_p3_self_loops(self, p3):
        W = row_normalized(p3, self_loops=True)
        assert W.kind == "row+self"
        np.testing.assert_allclose(dense(W)[1], [1 / 3, 1 / 3, 1 / 3], atol=1e-15)
        np.testing.assert_allclose(dense(W)[0], [0.5, 0.5, 0], atol=1e-15)

    def test_isolated_node_warns(self, caplog):
        g = build_graph([("a", "b")], nodes=["v"])
        with caplog.at_level(logging.WARNING):
            W = row_normalized(g)
        assert W.rows[g.index("v")] == []
        assert W.warnings and "'v'" in W.warnings[0]
        assert "isolated" in caplog.text

    def test_binary_weights_are_one(self, p3):
        W = binary_adjacency(p3)
        assert set(W.matrix.data.tolist()) == {1.0}
        assert W.total_weight == 4

    @given(graphs())
    def test_row_sums(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        for self_loops in (False, True):
            W = row_normalized(g, self_loops=self_loops, quiet=True)
            expected = np.where((g.degree > 0) | self_loops, 1.0, 0.0)
            np.testing.assert_allclose(W.row_sums, expected, atol=1e-12)
            # ones vector maps to the non-isolated indicator
            np.testing.assert_allclose(W.dot(np.ones(n)), expected, atol=1e-12)
            assert abs(W.total_weight - W.matrix.data.sum()) < 1e-12

    @given(graphs(no_isolated=True))
    def test_total_weight_is_n(self, ge):
        n, edges = ge
        W = row_normalized(Graph.from_index_edges(n, edges))
        assert abs(W.total_weight - n) < 1e-12

    @given(graphs())
    def test_matches_oracle(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        for kind in ("binary", "row", "row+self"):
            np.testing.assert_allclose(dense(weights_for(g, kind, quiet=True)),
                                       oracles.dense_weights(n, edges, kind), atol=1e-15)


class TestDistanceClass:
    def test_p3(self, p3):
        np.testing.assert_array_equal(dense(distance_class(p3, 1)), dense(binary_adjacency(p3)))
        assert dense(distance_class(p3, 2)).tolist() == [[0, 0, 1], [0, 0, 0], [1, 0, 0]]
        W3 = distance_class(p3, 3)
        assert W3.total_weight == 0 and W3.d == 3

    def test_bad_d(self, p3):
        with pytest.raises(InputError):
            distance_class(p3, 0)

    def test_disconnected_pairs_in_no_class(self):
        g = build_graph([("a", "b"), ("c", "d")])
        total = sum(distance_class(g, d).total_weight for d in range(1, 4))
        assert total == 4

    @given(graphs(connected=True))
    def test_partition_of_ordered_pairs(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        total = sum(distance_class(g, d).total_weight for d in range(1, g.diameter() + 1))
        assert total == n * (n - 1)
        assert (sparse.triu(distance_class(g, 1).matrix) != sparse.triu(g.adjacency)).nnz == 0

    @given(graphs())
    def test_matches_bfs_oracle(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        for d in range(1, n):
            np.testing.assert_array_equal(dense(distance_class(g, d)),
                                          oracles.dense_weights(n, edges, "distance", d))

    def test_normalized(self):
        g = path_graph(4)
        W = distance_class(g, 2, normalize=True)
        np.testing.assert_allclose(W.row_sums, [1, 1, 1, 1])
        assert W.is_row_normalized


class TestRestrict:
    @given(graphs(min_nodes=3))
    def test_restrict_matches_induced_subgraph(self, ge):
        n, edges = ge
        g = Graph.from_index_edges(n, edges)
        keep = np.ones(n, dtype=bool)
        keep[n // 2] = False
        m, sub, _ = oracles.induced(n, edges, keep)
        for kind in ("binary", "row", "row+self"):
            got = weights_for(g, kind, quiet=True).restrict(keep)
            np.testing.assert_allclose(dense(got), oracles.dense_weights(m, sub, kind), atol=1e-15)

    def test_full_mask_is_identity(self, p3):
        W = row_normalized(p3)
        assert W.restrict(np.ones(3, bool)) is W


class TestNodeData:
    def test_nan_masks(self):
        x = NodeData([1.0, np.nan, 3.0])
        assert x.mask.tolist() == [True, False, True]
        assert x.n_present == 2 and not x.complete

    def test_explicit_mask(self):
        x = NodeData([1.0, 2.0, 3.0], mask=[True, False, True])
        assert np.isnan(x.values[1])
        assert x.present().tolist() == [1.0, 3.0]

    def test_mask_length(self):
        with pytest.raises(InputError):
            NodeData([1.0, 2.0], mask=[True])

    def test_immutable(self):
        x = NodeData([1.0, 2.0])
        with pytest.raises(ValueError):
            x.values[0] = 5

    def test_with_values(self):
        x = NodeData([1.0, np.nan, 3.0])
        y = x.with_values(np.array([7.0, 9.0]))
        assert y.present().tolist() == [7.0, 9.0] and y.mask.tolist() == x.mask.tolist()
