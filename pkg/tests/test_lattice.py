import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uflab.lattice import (
    BOUNDARY, HORIZONTAL, PLANAR, TORIC, VERTICAL, LatticeSpec, build_lattice, distances_from,
    logical_cut, pairwise_distances, shortest_distance,
)


def as_nx(lattice):
    g = nx.MultiGraph()
    g.add_nodes_from(range(lattice.vertex_count))
    g.add_edges_from(map(tuple, lattice.endpoints))
    return g


def test_toric_3x3(lattices):
    lat = lattices(TORIC, 3)
    assert lat.vertex_count == 9
    assert lat.edge_count == 18
    assert np.all(lat.degree == 4)


def test_toric_3d_stack(lattices):
    lat = lattices(TORIC, 3, 3)
    assert lat.vertex_count == 27
    middle = lat.coords[:, 2] == 1
    assert np.all(lat.degree[middle] == 6)
    # outer layers miss one timelike edge each
    assert np.all(lat.degree[~middle] == 5)


def test_planar_boundary_columns(lattices):
    lat = lattices(PLANAR, 3)
    x = lat.coords[:, 0]
    assert np.array_equal(lat.boundary, (x == 0) | (x == lat.width - 1))
    assert lat.boundary.sum() == 2 * 3


@pytest.mark.parametrize("L", range(2, 7))
@pytest.mark.parametrize("R", [1, 2, 3])
def test_toric_edge_counts(L, R):
    lat = build_lattice(LatticeSpec(TORIC, L, R))
    assert (~lat.timelike).sum() == 2 * L * L * R
    # perfect last round: no timelike edges above it
    assert lat.timelike.sum() == L * L * (R - 1)


@pytest.mark.parametrize("kind", [TORIC, PLANAR])
@pytest.mark.parametrize("L,R", [(3, 1), (4, 1), (5, 1), (3, 3), (4, 4)])
def test_edges_simple_and_symmetric(kind, L, R):
    lat = build_lattice(LatticeSpec(kind, L, R))
    u, v = lat.endpoints.T
    assert np.all(u != v)
    assert np.all(u < v)
    ptr, edges, nbrs = lat.adjacency
    for w in range(lat.vertex_count):
        for e, x in zip(edges[ptr[w]:ptr[w + 1]], nbrs[ptr[w]:ptr[w + 1]]):
            assert w in lat.neighbours(x)
            assert set(lat.endpoints[e]) == {w, x}


def test_interior_degree_3d_toric():
    lat = build_lattice(LatticeSpec(TORIC, 4, 4))
    inner = (lat.coords[:, 2] > 0) & (lat.coords[:, 2] < 3)
    assert np.all(lat.degree[inner] == 6)


def test_numbering_is_row_major_and_edges_sorted(lattices):
    lat = lattices(TORIC, 4, 2)
    for v in range(lat.vertex_count):
        x, y, t = lat.coords[v]
        assert lat.vertex_id(x, y, t) == v
    keys = [(int(min(a, b)), int(ax)) for (a, b), ax in zip(lat.endpoints, lat.axis)]
    assert keys == sorted(keys)


def test_planar_geometry_flags_only_open_sides(lattices):
    lat = lattices(PLANAR, 5)
    y = lat.coords[:, 1]
    top_or_bottom = (y == 0) | (y == lat.height - 1)
    inner_cols = (lat.coords[:, 0] > 0) & (lat.coords[:, 0] < lat.width - 1)
    assert not lat.boundary[top_or_bottom & inner_cols].any()
    # boundary vertices hang off the bulk by a single edge
    assert np.all(lat.degree[lat.boundary] == 1)


def test_invalid_specs():
    with pytest.raises(ValueError):
        LatticeSpec(TORIC, 1)
    with pytest.raises(ValueError):
        LatticeSpec(TORIC, 3, 0)
    with pytest.raises(ValueError):
        LatticeSpec("hexagonal", 3)


def test_distance_examples(lattices):
    lat = lattices(TORIC, 5)
    assert shortest_distance(lat, lat.vertex_id(0, 0), lat.vertex_id(0, 3)) == 2
    assert shortest_distance(lat, 7, 7) == 0
    lat4 = lattices(TORIC, 4)
    assert shortest_distance(lat4, lat4.vertex_id(0, 0), lat4.vertex_id(2, 2)) == 4


def test_boundary_distance(lattices):
    lat = lattices(PLANAR, 5)
    assert shortest_distance(lat, lat.vertex_id(1, 2), BOUNDARY) == 1
    # six columns: x=0 and x=5 are the open sides
    assert shortest_distance(lat, lat.vertex_id(2, 0), BOUNDARY) == 2
    assert shortest_distance(lat, lat.vertex_id(3, 0), BOUNDARY) == 2
    assert shortest_distance(lat, lat.vertex_id(4, 4), BOUNDARY) == 1


def test_distance_out_of_range(lattices):
    lat = lattices(TORIC, 3)
    with pytest.raises(ValueError):
        shortest_distance(lat, 0, 99)


@pytest.mark.parametrize("kind,L,R", [(TORIC, 5, 1), (TORIC, 4, 1), (PLANAR, 4, 1), (TORIC, 3, 3), (PLANAR, 3, 3)])
def test_distances_match_bfs(kind, L, R):
    lat = build_lattice(LatticeSpec(kind, L, R))
    truth = dict(nx.all_pairs_shortest_path_length(as_nx(lat)))
    for u in range(lat.vertex_count):
        got = distances_from(lat, u)
        assert [truth[u][v] for v in range(lat.vertex_count)] == list(got)
    vs = np.arange(lat.vertex_count)
    full = pairwise_distances(lat, vs)
    assert np.array_equal(full, np.array([[truth[a][b] for b in vs] for a in vs]))


@given(st.sampled_from([(TORIC, 6, 1), (PLANAR, 6, 1), (TORIC, 4, 3)]), st.data())
def test_distance_is_metric(shape, data):
    lat = build_lattice(LatticeSpec(*shape))
    pick = st.integers(0, lat.vertex_count - 1)
    a, b, c = data.draw(pick), data.draw(pick), data.draw(pick)
    d = lambda u, v: shortest_distance(lat, u, v)  # noqa: E731
    assert d(a, a) == 0
    assert d(a, b) == d(b, a)
    assert d(a, c) <= d(a, b) + d(b, c)


def test_logical_cut_sizes(lattices):
    assert len(logical_cut(lattices(TORIC, 3), HORIZONTAL)) == 3
    assert len(logical_cut(lattices(TORIC, 5), VERTICAL)) == 5
    assert len(logical_cut(lattices(PLANAR, 3), HORIZONTAL)) == 3
    assert len(logical_cut(lattices(TORIC, 3, 3), HORIZONTAL)) == 9


def test_planar_has_no_vertical_cut(lattices):
    with pytest.raises(ValueError):
        logical_cut(lattices(PLANAR, 3), VERTICAL)
    with pytest.raises(ValueError):
        logical_cut(lattices(TORIC, 3), "diagonal")


@pytest.mark.parametrize("L", [3, 4, 5])
def test_cut_separates_noncontractible_loops(L):
    lat = build_lattice(LatticeSpec(TORIC, L))
    row = [lat.edge_between(lat.vertex_id(x, 0), lat.vertex_id((x + 1) % L, 0)) for x in range(L)]
    col = [lat.edge_between(lat.vertex_id(0, y), lat.vertex_id(0, (y + 1) % L)) for y in range(L)]
    h, v = set(logical_cut(lat, HORIZONTAL)), set(logical_cut(lat, VERTICAL))
    assert len(h & set(row)) == 1 and not h & set(col)
    assert len(v & set(col)) == 1 and not v & set(row)
    # a plaquette crosses each cut an even number of times
    for x, y in itertools.product(range(L), range(L)):
        a, b = lat.vertex_id(x, y), lat.vertex_id((x + 1) % L, y)
        c, d = lat.vertex_id((x + 1) % L, (y + 1) % L), lat.vertex_id(x, (y + 1) % L)
        plaquette = {lat.edge_between(a, b), lat.edge_between(b, c), lat.edge_between(d, c),
                     lat.edge_between(a, d)}
        assert len(plaquette & h) % 2 == 0 and len(plaquette & v) % 2 == 0
