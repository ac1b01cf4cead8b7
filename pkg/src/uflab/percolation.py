"""Bond percolation and percolation of decoder erasures."""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .growth import Erasure
from .lattice import Lattice, distances_from
from .matcher import TO_BOUNDARY, defect_graph, mwpm


def sample_bonds(L: int, p: float, rng_seed) -> tuple[np.ndarray, np.ndarray]:
    """Open bonds of an ``L x L`` open square lattice.

    The lattice has ``L`` columns and ``L + 1`` rows of sites, so every
    column carries ``L`` vertical bonds. This rectangle is isomorphic to its
    own dual, which puts the top-to-bottom crossing probability at exactly
    one half when ``p = 1/2`` for every ``L``.

    Returns
    -------
    horizontal : ndarray of bool, shape ``(L + 1, L - 1)``
        Bond ``(y, x)``-``(y, x + 1)``. Drawn first.
    vertical : ndarray of bool, shape ``(L, L)``
        Bond ``(y, x)``-``(y + 1, x)``.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    horizontal = rng.random((L + 1, L - 1)) < p
    vertical = rng.random((L, L)) < p
    return horizontal, vertical


def spans_top_to_bottom(horizontal: np.ndarray, vertical: np.ndarray) -> bool:
    rows_, cols_ = vertical.shape[0] + 1, vertical.shape[1]
    ids = np.arange(rows_ * cols_).reshape(rows_, cols_)
    rows = np.concatenate([ids[:, :-1][horizontal], ids[:-1, :][vertical]])
    cols = np.concatenate([ids[:, 1:][horizontal], ids[1:, :][vertical]])
    n = rows_ * cols_
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return bool(np.intersect1d(labels[ids[0]], labels[ids[-1]]).size)


def bond_percolation_trial(L: int, p: float, rng_seed) -> bool:
    """Whether some cluster joins the top row to the bottom row."""
    if L < 2:
        raise ValueError("L must be at least 2")
    return spans_top_to_bottom(*sample_bonds(L, p, rng_seed))


@njit(cache=True)
def _wraps(adj_ptr, adj_edge, adj_nbr, in_erasure, coords, L, n_axes):
    """Label unwrapped coordinates per component; a clash means wrapping."""
    n = len(adj_ptr) - 1
    seen = np.zeros(n, dtype=np.uint8)
    pos = np.zeros((n, 2), dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = 1
        pos[s, 0] = coords[s, 0]
        pos[s, 1] = coords[s, 1]
        queue[0] = s
        size = 1
        head = 0
        while head < size:
            v = queue[head]
            head += 1
            for k in range(adj_ptr[v], adj_ptr[v + 1]):
                if not in_erasure[adj_edge[k]]:
                    continue
                w = adj_nbr[k]
                # unwrapped position of w reached from v
                px = pos[v, 0]
                py = pos[v, 1]
                for a in range(n_axes):
                    step = coords[w, a] - coords[v, a]
                    if step > 1:
                        step -= L
                    elif step < -1:
                        step += L
                    if a == 0:
                        px += step
                    else:
                        py += step
                if not seen[w]:
                    seen[w] = 1
                    pos[w, 0] = px
                    pos[w, 1] = py
                    queue[size] = w
                    size += 1
                elif pos[w, 0] != px or pos[w, 1] != py:
                    return True
    return False


def erasure_percolates(lattice: Lattice, erasure: Erasure) -> bool:
    """Whether an erasure component wraps (toric) or spans (planar) the lattice.

    Toric: a component percolates when it contains a noncontractible loop
    in a spatial direction, detected as two paths to one vertex that
    disagree in unwrapped position. Planar: a component touches both open
    boundaries. Timelike extent never counts.
    """
    in_erasure = np.zeros(lattice.edge_count, dtype=np.uint8)
    in_erasure[erasure.edges] = 1
    ptr, adj_edge, adj_nbr = lattice.adjacency
    if lattice.is_toric:
        L = lattice.distance
        if L == 2:
            raise ValueError("wrap detection needs L >= 3")
        return bool(_wraps(ptr, adj_edge, adj_nbr, in_erasure, lattice.coords, L, 2))
    ends = lattice.endpoints[in_erasure.astype(bool)]
    n = lattice.vertex_count
    graph = coo_matrix((np.ones(len(ends), dtype=np.int8), (ends[:, 0], ends[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    x = lattice.coords[:, 0]
    left = labels[(x == 0)]
    right = labels[(x == lattice.width - 1)]
    # isolated boundary vertices are singleton components and cannot match
    return bool(np.intersect1d(left, right).size)


def mwpm_ball_erasure(lattice: Lattice, syndrome) -> Erasure:
    """Erasure estimate from balls of radius ``w // 2`` around matched defects.

    ``w`` is the weight of the pair each defect belongs to (its boundary
    distance for boundary terminations). Edges are included when both ends
    are.
    """
    graph = defect_graph(lattice, np.asarray(syndrome, dtype=bool))
    matching = mwpm(graph)
    included = np.zeros(lattice.vertex_count, dtype=bool)
    for (i, j), w in zip(matching.pairs, matching.pair_weights):
        radius = w // 2
        members = (i,) if j == TO_BOUNDARY else (i, j)
        for k in members:
            u = int(graph.defects[k])
            if radius == 0:
                included[u] = True
            else:
                included |= distances_from(lattice, u) <= radius
    ends = lattice.endpoints
    edges = np.flatnonzero(included[ends[:, 0]] & included[ends[:, 1]])
    return Erasure(edges=edges, vertices=np.flatnonzero(included))
