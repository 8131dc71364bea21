"""Small graph builders and hypothesis strategies shared by the tests."""

import itertools

from hypothesis import strategies as st

from netcorr.graph import Graph, build_graph


def path_graph(n):
    return build_graph([(str(i), str(i + 1)) for i in range(n - 1)])


def complete_graph(n):
    return build_graph([(str(i), str(j)) for i, j in itertools.combinations(range(n), 2)])


def star_graph(leaves):
    return build_graph([("0", str(i)) for i in range(1, leaves + 1)])


def k22():
    # parts {0,1} and {2,3}
    return Graph.from_index_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


@st.composite
def graphs(draw, min_nodes=2, max_nodes=8, no_isolated=False, connected=False):
    """Random simple graph as (n, edge list) with at least one edge."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = list(itertools.combinations(range(n), 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, b in zip(pairs, bits) if b]
    if no_isolated or connected:
        # chain in a random spanning structure so nobody is left out
        order = draw(st.permutations(range(n)))
        extra = [(min(order[i], order[i + 1]), max(order[i], order[i + 1])) for i in range(n - 1)]
        if no_isolated and not connected:
            extra = [(min(a, b), max(a, b)) for a, b in zip(order[0::2], order[1::2])]
            if n % 2:
                extra.append((min(order[-1], order[0]), max(order[-1], order[0])))
        edges = sorted(set(edges) | set(extra))
    if not edges:
        edges = [(0, 1)]
    return n, edges


def node_values(n, min_value=-100.0, max_value=100.0):
    return st.lists(
        st.floats(min_value, max_value, allow_nan=False, allow_infinity=False),
        min_size=n, max_size=n,
    ).filter(lambda v: max(v) - min(v) > 1e-3 * max(1.0, max(abs(u) for u in v)))
