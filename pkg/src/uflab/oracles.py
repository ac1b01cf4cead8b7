"""Slow brute-force references for checking the fast code paths.

Nothing here shares logic with the structures it checks: components come
from label propagation, peeling from subset enumeration, matchings from
enumerating every pairing.
"""

from __future__ import annotations

import numpy as np

from .lattice import Graph


def components(n: int, pairs) -> np.ndarray:
    """Smallest member of each element's connected component."""
    label = np.arange(n)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    changed = True
    while changed:
        changed = False
        for a, b in pairs:
            lo = min(label[a], label[b])
            if label[a] != lo or label[b] != lo:
                label[a] = label[b] = lo
                changed = True
    return label


def edge_syndrome(graph: Graph, edges) -> np.ndarray:
    """Odd-degree non-boundary vertices of an edge set."""
    deg = np.zeros(graph.vertex_count, dtype=np.int64)
    for e in edges:
        u, v = graph.endpoints[e]
        deg[u] += 1
        deg[v] += 1
    return (deg % 2 == 1) & ~graph.boundary


def peel_solutions(graph: Graph, tree_edges, syndrome) -> list[frozenset]:
    """Every subset of ``tree_edges`` whose syndrome equals ``syndrome``."""
    tree_edges = list(tree_edges)
    if len(tree_edges) > 20:
        raise ValueError("too many edges to enumerate")
    syndrome = np.asarray(syndrome, dtype=bool)
    out = []
    for bits in range(1 << len(tree_edges)):
        subset = [e for i, e in enumerate(tree_edges) if bits >> i & 1]
        if np.array_equal(edge_syndrome(graph, subset), syndrome):
            out.append(frozenset(subset))
    return out


def random_tree(rng: np.random.Generator, n_edges: int, n_boundary: int = 0) -> tuple[Graph, np.ndarray]:
    """A random labelled tree as a :class:`Graph`, plus its edge ids.

    ``n_boundary`` distinct vertices are flagged as boundary.
    """
    n = n_edges + 1
    order = rng.permutation(n)
    ends = []
    for k in range(1, n):
        ends.append((order[k], order[rng.integers(0, k)]))
    ends = np.sort(np.asarray(ends, dtype=np.int64).reshape(-1, 2), axis=1)
    boundary = np.zeros(n, dtype=bool)
    boundary[rng.choice(n, size=min(n_boundary, n), replace=False)] = True
    return Graph(n, ends, boundary), np.arange(n_edges)


def min_matching_weight(weights, boundary_weights=None) -> int:
    """Minimum perfect matching weight by enumerating all pairings.

    With ``boundary_weights`` a defect may instead terminate on the
    boundary at that cost.
    """
    w = np.asarray(weights)
    k = len(w)
    best = [None]

    def rec(remaining: tuple, acc: int):
        if best[0] is not None and acc >= best[0]:
            return
        if not remaining:
            best[0] = acc
            return
        i, rest = remaining[0], remaining[1:]
        if boundary_weights is not None:
            rec(rest, acc + int(boundary_weights[i]))
        for idx, j in enumerate(rest):
            rec(rest[:idx] + rest[idx + 1:], acc + int(w[i, j]))

    if boundary_weights is None and k % 2:
        raise ValueError("odd defect count without boundary")
    rec(tuple(range(k)), 0)
    return int(best[0])
