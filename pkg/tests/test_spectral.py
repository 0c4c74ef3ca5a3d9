import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergeom.exceptions import (DimensionTooLarge, Disconnected, EmptyMeasure, MixedSpecs, SandwichViolation,
                               TooLargeForExact)
from ergeom.generators import GenSpec, gen_fixture, gen_gnp, gen_truncated_tree
from ergeom.graph import build_graph, giant_component
from ergeom.spectral import (SpectralMeasure, atom_mass, averaged_measure, build_laplacian, cheeger_exact,
                             cheeger_sandwich_check, cheeger_sweep, eigenvalues, extreme_eigenvalues, lambda0,
                             same_measure, spectral_measure)

EDGE = build_graph(2, [(0, 1)])


def dense_laplacian_oracle(g):
    """I - D^{-1/2} A D^{-1/2} built entry by entry."""
    a = np.zeros((g.n, g.n))
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1
    deg = a.sum(axis=1)
    out = np.zeros_like(a)
    for u in range(g.n):
        if deg[u]:
            out[u, u] = 1
        for v in range(g.n):
            if a[u, v]:
                out[u, v] = -1 / math.sqrt(deg[u] * deg[v])
    return out


def brute_cheeger(g):
    deg = g.degrees
    total = deg.sum()
    best = math.inf
    for mask in range(1, 1 << g.n):
        s = [(mask >> i) & 1 for i in range(g.n)]
        vol = sum(deg[i] for i in range(g.n) if s[i])
        if vol == 0 or vol > total / 2:
            continue
        cut = sum(1 for u, v in g.edges() if s[u] != s[v])
        best = min(best, cut / vol)
    return best


def test_laplacian_examples():
    assert np.allclose(build_laplacian(EDGE).toarray(), [[1, -1], [-1, 1]])
    c3 = build_laplacian(gen_fixture("cycle", 3)).toarray()
    assert np.allclose(np.diag(c3), 1) and np.allclose(c3[0, 1], -0.5)
    star = build_laplacian(gen_fixture("star", 3)).toarray()
    assert np.allclose(star[0, 1:], -1 / math.sqrt(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 14), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_laplacian_matches_oracle(n, p, seed):
    g = gen_gnp(n, p, seed)
    assert np.allclose(build_laplacian(g).toarray(), dense_laplacian_oracle(g))


def test_eigenvalue_examples():
    assert np.allclose(eigenvalues(build_laplacian(EDGE)), [0, 2])
    assert np.allclose(eigenvalues(build_laplacian(gen_fixture("cycle", 3))), [0, 1.5, 1.5])
    assert np.allclose(eigenvalues(build_laplacian(gen_fixture("complete", 4))), [0, 4 / 3, 4 / 3, 4 / 3])
    with pytest.raises(DimensionTooLarge):
        eigenvalues(build_laplacian(gen_fixture("path", 50)), dense_cap=40)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 0.5), st.integers(0, 10**6))
def test_spectrum_invariants(n, p, seed):
    g = gen_gnp(n, p, seed)
    ev = eigenvalues(build_laplacian(g))
    assert ev.min() >= -1e-9 and ev.max() <= 2 + 1e-9
    assert abs(ev[0]) < 1e-9
    assert abs(ev.sum() - np.count_nonzero(g.degrees)) < 1e-6 * n
    w, v = eigenvalues(build_laplacian(g), vectors=True)
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-9)


@pytest.mark.parametrize("g", [gen_fixture("path", 7), gen_fixture("cycle", 8), gen_fixture("grid", 3, 4),
                               gen_fixture("star", 5)], ids=["path", "even_cycle", "grid", "star"])
def test_bipartite_top_is_two(g):
    assert abs(eigenvalues(build_laplacian(g))[-1] - 2) < 1e-9


def test_odd_cycle_top_below_two():
    assert eigenvalues(build_laplacian(gen_fixture("cycle", 7)))[-1] < 2 - 1e-3


def test_lanczos_examples():
    assert np.allclose(extreme_eigenvalues(build_laplacian(gen_fixture("cycle", 3)), 2), [0, 1.5])
    assert np.allclose(extreme_eigenvalues(build_laplacian(gen_fixture("path", 100)), 1), [0], atol=1e-9)
    assert np.allclose(extreme_eigenvalues(build_laplacian(gen_fixture("complete", 4)), 3), [0, 4 / 3, 4 / 3])


def test_lanczos_matches_dense_on_giant():
    g, _ = giant_component(gen_gnp(800, 3 / 800, seed=4))
    lap = build_laplacian(g)
    dense = eigenvalues(lap)[:2]
    lanczos = extreme_eigenvalues(lap, 2)
    assert np.allclose(lanczos, dense, atol=1e-7, rtol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 60), st.integers(0, 10**6), st.integers(1, 4))
def test_lanczos_against_dense(n, seed, k):
    g, _ = giant_component(gen_gnp(n, 4 / n, seed))
    if g.n < k:
        return
    lap = build_laplacian(g)
    assert np.allclose(extreme_eigenvalues(lap, k), eigenvalues(lap)[:k], atol=1e-7, rtol=0)


def test_lambda0_examples():
    assert abs(lambda0(EDGE) - 2) < 1e-12
    for n in (3, 4, 5, 6):
        assert abs(lambda0(gen_fixture("complete", n)) - n / (n - 1)) < 1e-9
    gaps = [lambda0(gen_truncated_tree(3, m)) for m in range(2, 9)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    with pytest.raises(Disconnected):
        lambda0(build_graph(4, [(0, 1), (2, 3)]))


def test_lambda0_sparse_path_matches_dense():
    g = gen_fixture("path", 60)
    assert abs(lambda0(g, dense_cap=10) - lambda0(g)) < 1e-9


def test_spectral_measure_examples():
    m = spectral_measure(gen_fixture("cycle", 3))
    assert abs(atom_mass(m, 0, 1e-9) - 1 / 3) < 1e-12
    assert abs(atom_mass(m, 1.5, 1e-9) - 2 / 3) < 1e-12
    empty = spectral_measure(build_graph(5, []))
    assert abs(atom_mass(empty, 0, 1e-9) - 1) < 1e-12
    star = spectral_measure(gen_fixture("star", 3))
    assert [atom_mass(star, x, 1e-9) for x in (0, 1, 2)] == pytest.approx([0.25, 0.5, 0.25])
    assert atom_mass(star, 1, 1e-9) == pytest.approx(0.5)
    assert atom_mass(spectral_measure(gen_truncated_tree(3, 2)), 1, 1e-9) >= 3 / 10
    assert atom_mass(m, 1, 1e-3) == 0
    assert len(spectral_measure(build_graph(0, []))) == 0


def test_histogram():
    m = spectral_measure(gen_fixture("star", 3))
    edges, dens = m.histogram(100)
    assert len(edges) == 101 and edges[0] == 0 and edges[-1] == 2
    assert abs((dens * np.diff(edges)).sum() - 1) < 1e-12
    # eigenvalue 2 is clamped into the last bin
    assert dens[-1] * 0.02 == pytest.approx(0.25)


def test_averaged_measure():
    spec = GenSpec("gnp", n=60, d=3.0, seed=1)
    one = averaged_measure([spec])
    g, _ = giant_component(spec.generate())
    assert same_measure(one, spectral_measure(g))
    assert same_measure(averaged_measure([spec, spec]), one)
    specs = [spec.with_realization(r) for r in range(5)]
    assert same_measure(averaged_measure(specs), averaged_measure(specs[::-1]))
    assert abs(averaged_measure(specs).weights.sum() - 1) < 1e-12
    with pytest.raises(MixedSpecs):
        averaged_measure([spec, GenSpec("gnp", n=61, d=3.0)])
    with pytest.raises(EmptyMeasure):
        averaged_measure([])


def test_cheeger_exact_examples():
    assert cheeger_exact(EDGE).value == 1
    c4 = cheeger_exact(gen_fixture("cycle", 4))
    assert c4.value == 0.5 and c4.boundary_size == 2 and c4.volume == 4
    p4 = cheeger_exact(gen_fixture("path", 4))
    assert p4.value == pytest.approx(1 / 3) and p4.boundary_size == 1 and p4.volume == 3
    with pytest.raises(TooLargeForExact):
        cheeger_exact(gen_fixture("path", 21))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.floats(0.2, 1.0), st.integers(0, 10**6))
def test_cheeger_exact_matches_brute_force(n, p, seed):
    g = gen_gnp(n, p, seed)
    if g.edge_count == 0:
        return
    res = cheeger_exact(g)
    assert res.value == pytest.approx(brute_cheeger(g))
    cert = res.certificate
    inside = np.zeros(g.n, bool)
    inside[cert] = True
    e = g.edges()
    assert (inside[e[:, 0]] != inside[e[:, 1]]).sum() == res.boundary_size
    assert g.degrees[cert].sum() == res.volume <= g.volume() / 2


def test_cheeger_sweep_examples():
    exact = cheeger_exact(gen_fixture("cycle", 4)).value
    assert exact <= cheeger_sweep(gen_fixture("cycle", 4)).value <= 2 * exact
    assert cheeger_sweep(gen_fixture("path", 10)).value <= 1 / 9 + 1e-12
    k4 = cheeger_exact(gen_fixture("complete", 4)).value
    assert k4 <= cheeger_sweep(gen_fixture("complete", 4)).value <= 1


def test_sweep_never_below_exact():
    for seed in range(40):
        g, _ = giant_component(gen_gnp(16, 3 / 16, seed))
        if g.n < 2:
            continue
        assert cheeger_sweep(g).value >= cheeger_exact(g).value - 1e-12


def test_sandwich_examples():
    rep = cheeger_sandwich_check(EDGE)
    assert rep.holds and rep.left_bound == pytest.approx(rep.lambda0)
    rep = cheeger_sandwich_check(gen_fixture("cycle", 4))
    assert rep.h == 0.5 and rep.lambda0 == pytest.approx(1)
    assert rep.right_bound == pytest.approx(1 - math.sqrt(0.75))
    for seed in range(50):
        g, _ = giant_component(gen_gnp(16, 3 / 16, seed))
        if g.n >= 2:
            assert cheeger_sandwich_check(g).holds


def test_sandwich_violation_raises(monkeypatch):
    import ergeom.spectral as spectral
    monkeypatch.setattr(spectral, "lambda0", lambda g, *a: 5.0)
    with pytest.raises(SandwichViolation):
        spectral.cheeger_sandwich_check(gen_fixture("cycle", 4))
    assert not spectral.cheeger_sandwich_check(gen_fixture("cycle", 4), raise_on_violation=False).holds


def test_measure_weights_checked():
    with pytest.raises(EmptyMeasure):
        SpectralMeasure(np.array([0.0, 1.0]), np.array([0.3, 0.3]))
