import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uflab import LatticeSpec, build_lattice
from uflab.lattice import PLANAR, TORIC, shortest_distance
from uflab.matcher import (
    MAX_EXACT_DEFECTS, TO_BOUNDARY, DefectGraph, MatchingError, decode_mwpm, defect_graph, mwpm_exact,
    mwpm_local, path_edges,
)
from uflab.noise import NoiseParams, compute_syndrome, sample_errors, syndrome_of_edges
from uflab.peeler import correction_mask


def blossom_weight(graph: DefectGraph) -> int:
    """Minimum perfect matching weight from networkx's blossom solver."""
    k = graph.size
    g = nx.Graph()
    big = 10**6
    for i, j in itertools.combinations(range(k), 2):
        g.add_edge(i, j, weight=big - int(graph.weights[i, j]))
    if graph.has_boundary:
        for i in range(k):
            for j in range(k):
                g.add_edge(i, k + j, weight=big - int(graph.boundary_weights[i]))
        for i, j in itertools.combinations(range(k), 2):
            g.add_edge(k + i, k + j, weight=big)
    m = nx.max_weight_matching(g, maxcardinality=True)
    return sum(big - g[a][b]["weight"] for a, b in m)


def pairings_weight(graph: DefectGraph) -> int:
    """Enumerate every pairing of 4 defects (3 of them) plus boundary options."""
    best = None
    k = graph.size
    items = list(range(k))

    def rec(rest, acc):
        nonlocal best
        if not rest:
            best = acc if best is None else min(best, acc)
            return
        i = rest[0]
        if graph.has_boundary:
            rec(rest[1:], acc + int(graph.boundary_weights[i]))
        for j in rest[1:]:
            rec([x for x in rest[1:] if x != j], acc + int(graph.weights[i, j]))

    rec(items, 0)
    return best


def random_graph(lattice, rng, k):
    checks = np.flatnonzero(lattice.checks)
    syn = np.zeros(lattice.vertex_count, dtype=bool)
    syn[rng.choice(checks, size=k, replace=False)] = True
    return defect_graph(lattice, syn)


def test_empty(lattices):
    m = mwpm_exact(defect_graph(lattices(TORIC, 5), np.zeros(25, bool)))
    assert m.pairs == () and m.total_weight == 0


def test_single_pair(lattices):
    lat = lattices(TORIC, 7)
    syn = np.zeros(lat.vertex_count, bool)
    syn[[lat.vertex_id(0, 0), lat.vertex_id(2, 1)]] = True
    m = mwpm_exact(defect_graph(lat, syn))
    assert m.pairs == ((0, 1),) and m.total_weight == 3
    assert mwpm_local(defect_graph(lat, syn)).pairs == m.pairs


def test_four_defects_against_pairings(lattices, rng):
    lat = lattices(TORIC, 9)
    for _ in range(200):
        g = random_graph(lat, rng, 4)
        assert mwpm_exact(g).total_weight == pairings_weight(g)


def test_limits(lattices):
    lat = lattices(TORIC, 9)
    syn = np.zeros(lat.vertex_count, bool)
    syn[:MAX_EXACT_DEFECTS + 2] = True
    with pytest.raises(MatchingError):
        mwpm_exact(defect_graph(lat, syn))
    syn[:] = False
    syn[:3] = True
    with pytest.raises(MatchingError):
        mwpm_exact(defect_graph(lat, syn))
    with pytest.raises(MatchingError):
        mwpm_local(defect_graph(lat, syn))


def test_planar_odd_count_allowed(lattices):
    lat = lattices(PLANAR, 7)
    syn = np.zeros(lat.vertex_count, bool)
    syn[lat.vertex_id(1, 3)] = True
    m = mwpm_exact(defect_graph(lat, syn))
    assert m.pairs == ((0, TO_BOUNDARY),) and m.total_weight == 1


@pytest.mark.parametrize("kind,L,R", [(TORIC, 9, 1), (PLANAR, 9, 1), (TORIC, 5, 5)])
def test_exact_equals_blossom(kind, L, R, rng):
    lat = build_lattice(LatticeSpec(kind, L, R))
    for _ in range(60):
        k = int(rng.integers(0, MAX_EXACT_DEFECTS // 2 + 1)) * 2
        if kind == PLANAR:
            k = int(rng.integers(0, MAX_EXACT_DEFECTS + 1))
        g = random_graph(lat, rng, k)
        m = mwpm_exact(g)
        assert m.total_weight == blossom_weight(g)
        # perfect: each defect exactly once
        used = [i for p in m.pairs for i in p if i != TO_BOUNDARY]
        assert sorted(used) == list(range(k))
        assert m.total_weight == sum(m.pair_weights)


@pytest.mark.parametrize("kind", [TORIC, PLANAR])
def test_local_never_beats_exact(kind, rng):
    lat = build_lattice(LatticeSpec(kind, 9))
    equal = 0
    for _ in range(300):
        g = random_graph(lat, rng, 8)
        ex, lo = mwpm_exact(g).total_weight, mwpm_local(g).total_weight
        assert lo >= ex
        equal += lo == ex
    assert equal >= 0.95 * 300


def test_local_scales_past_exact_limit(lattices, rng):
    lat = lattices(TORIC, 17)
    for _ in range(10):
        g = random_graph(lat, rng, 40)
        m = mwpm_local(g)
        assert m.total_weight >= blossom_weight(g)
        assert m.total_weight <= 1.1 * blossom_weight(g)


def test_pair_swaps_only_without_window(lattices, rng):
    lat = lattices(TORIC, 11)
    for _ in range(30):
        g = random_graph(lat, rng, 12)
        assert mwpm_local(g, window=0).total_weight >= mwpm_local(g).total_weight


@given(st.integers(0, 10**6), st.sampled_from([TORIC, PLANAR]))
def test_weight_invariant_under_relabelling(seed, kind):
    rng = np.random.default_rng(seed)
    lat = build_lattice(LatticeSpec(kind, 7))
    g = random_graph(lat, rng, 6)
    perm = rng.permutation(g.size)
    h = DefectGraph(g.defects[perm], g.weights[np.ix_(perm, perm)],
                    None if g.boundary_weights is None else g.boundary_weights[perm])
    assert mwpm_exact(g).total_weight == mwpm_exact(h).total_weight
    assert mwpm_local(g).total_weight >= mwpm_exact(h).total_weight


def test_exact_is_deterministic(lattices, rng):
    lat = lattices(TORIC, 9)
    g = random_graph(lat, rng, 10)
    assert mwpm_exact(g).pairs == mwpm_exact(g).pairs


def test_decode_examples(lattices):
    lat = lattices(TORIC, 5)
    assert len(decode_mwpm(lat, np.zeros(lat.vertex_count, bool))) == 0
    a, b = lat.vertex_id(3, 3), lat.vertex_id(3, 4)
    syn = np.zeros(lat.vertex_count, bool)
    syn[[a, b]] = True
    assert list(decode_mwpm(lat, syn)) == [lat.edge_between(a, b)]


@pytest.mark.parametrize("kind,L,R", [(TORIC, 7, 1), (PLANAR, 7, 1), (TORIC, 4, 4), (PLANAR, 4, 4),
                                      (TORIC, 13, 1)])
def test_decode_reproduces_syndrome(kind, L, R):
    lat = build_lattice(LatticeSpec(kind, L, R))
    for seed in range(300):
        syn = compute_syndrome(lat, sample_errors(lat, NoiseParams(0.08, 0.08), seed))
        corr = decode_mwpm(lat, syn)
        assert np.array_equal(syndrome_of_edges(lat, correction_mask(lat, corr)), syn)


@given(st.integers(0, 10**6))
def test_paths_are_shortest(seed):
    rng = np.random.default_rng(seed)
    lat = build_lattice(LatticeSpec(TORIC, 6, 3))
    u, v = (int(x) for x in rng.integers(0, lat.vertex_count, size=2))
    assert len(path_edges(lat, u, v)) == shortest_distance(lat, u, v)
