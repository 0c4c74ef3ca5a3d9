import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergeom.exceptions import InvalidDimension, InvalidLaw, InvalidParams, InvalidProbability
from ergeom.generators import (GenSpec, OffspringLaw, _pair_from_index, gen_fixture, gen_galton_watson, gen_gnp,
                               gen_truncated_tree, gnp_naive, realization_seed, truncated_tree_size)
from ergeom.graph import components


def test_gnp_extremes():
    k4 = gen_gnp(4, 1.0, seed=0)
    assert k4.edge_count == 6
    assert gen_gnp(10, 0.0, seed=0).edge_count == 0
    with pytest.raises(InvalidProbability):
        gen_gnp(10, 1.5, seed=0)
    with pytest.raises(InvalidProbability):
        gen_gnp(10, float("nan"), seed=0)


def test_gnp_deterministic():
    assert gen_gnp(500, 0.01, seed=11) == gen_gnp(500, 0.01, seed=11)
    assert gen_gnp(500, 0.01, seed=11) != gen_gnp(500, 0.01, seed=12)
    s = realization_seed(3, 4)
    assert gen_gnp(300, 0.02, s) == gen_gnp(300, 0.02, realization_seed(3, 4))


def test_gnp_edge_count_mean():
    counts = [gen_gnp(1000, 2 / 1000, seed=s).edge_count for s in range(100)]
    sigma = np.sqrt(999 * (1 - 0.002))
    assert abs(np.mean(counts) - 999) < 3 * sigma


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 200).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n * (n - 1) // 2 - 1))))
def test_pair_index_inverse(data):
    n, k = data
    i, j = _pair_from_index(np.array([k]), n)
    iu, ju = np.triu_indices(n, k=1)
    assert (i[0], j[0]) == (iu[k], ju[k])


def _inclusion_frequencies(gen, n, p, seeds):
    hits = np.zeros((n, n))
    for s in range(seeds):
        e = gen(n, p, seed=s).edges()
        hits[e[:, 0], e[:, 1]] += 1
    iu = np.triu_indices(n, k=1)
    return hits[iu] / seeds


@pytest.mark.slow
@pytest.mark.parametrize("gen", [gen_gnp, gnp_naive], ids=["skip", "naive"])
def test_per_pair_inclusion(gen):
    n, p, seeds = 30, 0.05, 100_000
    freq = _inclusion_frequencies(gen, n, p, seeds)
    sigma = np.sqrt(p * (1 - p) / seeds)
    assert np.all(np.abs(freq - p) < 4 * sigma)


def test_galton_watson_examples():
    t = gen_galton_watson(OffspringLaw((1.0,)), 10, seed=0)
    assert t.graph.n == 1 and not t.truncated
    t = gen_galton_watson(OffspringLaw((0.0, 1.0)), 5, seed=0)
    assert t.graph == gen_fixture("path", 6)
    assert t.depth.tolist() == [0, 1, 2, 3, 4, 5]


def test_galton_watson_cap():
    t = gen_galton_watson(OffspringLaw((0.0, 0.0, 0.0, 1.0)), 20, max_nodes=100, seed=0)
    assert t.truncated and t.graph.n == 100
    assert components(t.graph).count == 1
    assert t.graph.edge_count == 99
    # a capped parent gets no recorded draw
    assert np.all(t.offspring[t.depth == t.depth.max()] == -1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5), st.integers(0, 8), st.integers(1, 300),
       st.integers(0, 2**32 - 1))
def test_galton_watson_is_tree(weights, depth, cap, seed):
    w = np.array(weights)
    law = OffspringLaw(tuple(w / w.sum()))
    t = gen_galton_watson(law, depth, max_nodes=cap, seed=seed)
    g = t.graph
    g.validate()
    assert g.n <= cap
    assert g.edge_count == g.n - 1
    assert components(g).count == 1
    assert t.depth.max() <= depth
    # recorded draws match actual children wherever a draw was kept
    drawn = t.offspring >= 0
    kids = g.degrees - (np.arange(g.n) > 0)
    assert np.all(kids[drawn & (t.depth < depth)] == t.offspring[drawn & (t.depth < depth)])


@pytest.mark.slow
def test_poisson_offspring_mean():
    law = OffspringLaw.poisson(2.0)
    total = 0
    count = 0
    for s in range(10_000):
        t = gen_galton_watson(law, 10, seed=realization_seed(0, s))
        k = t.offspring[t.offspring >= 0]
        total += k.sum()
        count += len(k)
    assert abs(total / count - 2.0) < 0.05


def test_subcritical_extinction():
    law = OffspringLaw.poisson(0.5)
    died = sum(gen_galton_watson(law, 20, seed=realization_seed(1, s)).depth.max() < 20 for s in range(10_000))
    assert died / 10_000 > 0.99


def test_offspring_law_validation():
    with pytest.raises(InvalidLaw):
        OffspringLaw((0.5, 0.4))
    with pytest.raises(InvalidLaw):
        OffspringLaw((1.2, -0.2))
    with pytest.raises(InvalidLaw):
        OffspringLaw(())
    law = OffspringLaw.poisson(3.0)
    assert abs(sum(law.probs) - 1) < 1e-12
    assert abs(law.mean - 3.0) < 1e-9
    assert law.first_support == 0


def test_truncated_tree_examples():
    assert gen_truncated_tree(3, 1) == gen_fixture("star", 3)
    t = gen_truncated_tree(3, 2)
    assert t.n == 10 and t.edge_count == 9
    assert gen_truncated_tree(2, 4).n == 9
    assert sorted(gen_truncated_tree(2, 4).degrees.tolist()) == [1, 1] + [2] * 7
    for d, m in [(3, 10), (4, 5), (5, 3)]:
        g = gen_truncated_tree(d, m)
        assert g.n == truncated_tree_size(d, m)
        inner = g.degrees[: truncated_tree_size(d, m - 1)]
        assert np.all(inner == d)


def test_fixtures():
    c6 = gen_fixture("cycle", 6)
    assert c6.edge_count == 6 and np.all(c6.degrees == 2)
    grid = gen_fixture("grid", 3, 3)
    assert grid.n == 9 and grid.edge_count == 12
    assert gen_fixture("star", 5).degrees.tolist() == [5, 1, 1, 1, 1, 1]
    assert gen_fixture("complete", 5).edge_count == 10
    with pytest.raises(InvalidDimension):
        gen_fixture("cycle", 2)
    with pytest.raises(InvalidDimension):
        gen_fixture("hypercube", 3)


def test_genspec():
    spec = GenSpec("gnp", n=100, d=3.0, seed=5)
    assert spec.edge_probability == 0.03
    assert spec.generate() == spec.generate()
    assert spec.with_realization(1).generate() != spec.generate()
    assert spec.key() == spec.with_realization(7).key()
    assert GenSpec("truncated_tree", d=3, depth=2).generate().n == 10
    with pytest.raises(InvalidParams):
        GenSpec("gnp", n=10)
    with pytest.raises(InvalidParams):
        GenSpec("moebius", n=10)
