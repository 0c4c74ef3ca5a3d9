import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergeom.exceptions import DuplicateEdge, OutOfRangeVertex, SelfLoop, Unreachable
from ergeom.generators import gen_fixture, gen_gnp
from ergeom.graph import (UNREACHABLE, Graph, bfs, build_graph, components, geodesic, giant_component,
                          induced_subgraph, read_edge_list, write_edge_list)


def edge_sets(max_n=12):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                                .filter(lambda e: e[0] != e[1])
                                                .map(lambda e: (min(e), max(e))), max_size=3 * n)))


def test_triangle():
    g = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert g.degrees.tolist() == [2, 2, 2]
    assert g.edge_count == 3


def test_single_edge():
    g = build_graph(2, [(0, 1)])
    assert g.edge_count == 1 and g.degrees.tolist() == [1, 1]


def test_build_errors():
    with pytest.raises(DuplicateEdge):
        build_graph(4, [(0, 1), (0, 1)])
    with pytest.raises(DuplicateEdge):
        build_graph(4, [(0, 1), (1, 0)])
    with pytest.raises(SelfLoop):
        build_graph(3, [(1, 1)])
    with pytest.raises(OutOfRangeVertex):
        build_graph(3, [(0, 3)])
    with pytest.raises(OutOfRangeVertex):
        build_graph(3, [(-1, 2)])


def test_immutable():
    g = gen_fixture("cycle", 5)
    with pytest.raises(AttributeError):
        g.n = 3
    with pytest.raises(ValueError):
        g.indices[0] = 4


@settings(max_examples=200, deadline=None)
@given(edge_sets())
def test_canonical_form(data):
    n, edges = data
    g = build_graph(n, sorted(edges))
    g.validate()
    assert g.degrees.sum() == 2 * g.edge_count == 2 * len(edges)
    for v in range(n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0)
        for u in nb:
            assert v in g.neighbors(u)
    assert {tuple(e) for e in g.edges().tolist()} == set(edges)
    # equality does not depend on the input order
    assert g == build_graph(n, list(reversed(sorted(edges))))
    assert hash(g) == hash(build_graph(n, list(edges)))


@settings(max_examples=100, deadline=None)
@given(edge_sets())
def test_components_match_networkx(data):
    n, edges = data
    g = build_graph(n, sorted(edges))
    ref = nx.Graph()
    ref.add_nodes_from(range(n))
    ref.add_edges_from(edges)
    lab = components(g)
    ours = sorted(sorted(lab.members(i).tolist()) for i in range(lab.count))
    assert ours == sorted(sorted(c) for c in nx.connected_components(ref))
    assert lab.sizes[lab.giant_id] == max(len(c) for c in nx.connected_components(ref))
    sub, ids = giant_component(g)
    assert components(sub).count == 1
    assert sub.n == len(ids)


def test_components_examples():
    lab = components(gen_fixture("path", 5))
    assert lab.count == 1 and lab.giant().tolist() == list(range(5))
    c3p5 = build_graph(8, [(0, 1), (1, 2), (2, 0)] + [(i, i + 1) for i in range(3, 7)])
    lab = components(c3p5)
    assert sorted(lab.sizes.tolist()) == [3, 5]
    assert len(lab.giant()) == 5


def test_giant_fraction_gnp():
    g = gen_gnp(1000, 2 / 1000, seed=7)
    sub, _ = giant_component(g)
    assert abs(sub.n / 1000 - 0.796812) < 0.05


def test_induced_subgraph_examples():
    c4 = gen_fixture("cycle", 4)
    p3, mapping = induced_subgraph(c4, [0, 1, 2])
    assert p3 == gen_fixture("path", 3)
    assert mapping == {0: 0, 1: 1, 2: 2}
    g = gen_gnp(30, 0.2, seed=1)
    same, mapping = induced_subgraph(g, range(30))
    assert same == g and all(k == v for k, v in mapping.items())
    empty, _ = induced_subgraph(gen_fixture("cycle", 6), [0, 2, 4])
    assert empty.n == 3 and empty.edge_count == 0


def test_bfs_examples():
    assert bfs(gen_fixture("cycle", 6), 0).dist.tolist() == [0, 1, 2, 3, 2, 1]
    star = bfs(gen_fixture("star", 3), 0)
    assert star.dist[1:].tolist() == [1, 1, 1]
    two = bfs(build_graph(4, [(0, 1), (2, 3)]), 0)
    assert two.dist[2] == UNREACHABLE and not two.reachable(3)
    with pytest.raises(Unreachable):
        two.distance(3)


def test_geodesic_examples():
    c6 = gen_fixture("cycle", 6)
    assert geodesic(c6, 0, 3).tolist() == [0, 1, 2, 3]
    assert geodesic(c6, 4, 4).tolist() == [4]
    tree = gen_fixture("star", 4)
    assert geodesic(tree, 1, 3).tolist() == [1, 0, 3]
    with pytest.raises(Unreachable):
        geodesic(build_graph(3, [(0, 1)]), 0, 2)


def test_metric_properties():
    g, _ = giant_component(gen_gnp(400, 3 / 400, seed=3))
    rng = np.random.default_rng(0)
    dist = {}
    for s in range(0, g.n, 7):
        dist[s] = bfs(g, s).dist
    sources = list(dist)
    for _ in range(100):
        u, v = rng.choice(sources, 2)
        assert dist[u][v] == dist[v][u]
        path = geodesic(g, u, v)
        assert len(path) - 1 == dist[u][v]
        assert path[0] == u and path[-1] == v
        assert all(b in g.neighbors(a) for a, b in zip(path, path[1:]))
    for _ in range(100):
        u, v, w = rng.choice(sources, 3)
        assert dist[u][w] <= dist[u][v] + dist[v][w]


def test_geodesic_is_lowest_index_parent_chain():
    # the vertex before b is its smallest neighbour one step closer to a
    g, _ = giant_component(gen_gnp(200, 4 / 200, seed=5))
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = rng.integers(0, g.n, 2)
        d = bfs(g, a).dist
        path = geodesic(g, a, b)
        for prev, cur in zip(path[:-1], path[1:]):
            closer = [u for u in g.neighbors(cur) if d[u] == d[cur] - 1]
            assert prev == min(closer)


def test_edge_list_roundtrip(tmp_path):
    g = gen_gnp(50, 0.1, seed=2)
    write_edge_list(g, tmp_path / "g.txt")
    assert read_edge_list(tmp_path / "g.txt") == g
    assert isinstance(g, Graph)
