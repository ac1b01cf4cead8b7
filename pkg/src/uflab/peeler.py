"""Cycle removal and the peeling decoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import Graph


class PeelingError(RuntimeError):
    """Defects left that the forest cannot explain."""


@dataclass(frozen=True, eq=False)
class SpanningForest:
    """Acyclic subset of the erasure covering every occupied vertex.

    ``edges`` are graph edge ids in discovery order; ``vertices`` is the
    occupied vertex set the forest spans.
    """

    edges: np.ndarray
    vertices: np.ndarray


@njit(cache=True)
def _dfs_forest(adj_ptr, adj_edge, adj_nbr, in_erasure, occupied):
    n = len(occupied)
    seen = np.zeros(n, dtype=np.uint8)
    cursor = adj_ptr[:-1].copy()
    stack = np.empty(n, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    n_out = 0
    for s in range(n):
        if not occupied[s] or seen[s]:
            continue
        seen[s] = 1
        stack[0] = s
        depth = 1
        while depth:
            v = stack[depth - 1]
            if cursor[v] == adj_ptr[v + 1]:
                depth -= 1
                continue
            k = cursor[v]
            cursor[v] += 1
            e = adj_edge[k]
            w = adj_nbr[k]
            if in_erasure[e] and not seen[w]:
                seen[w] = 1
                out[n_out] = e
                n_out += 1
                stack[depth] = w
                depth += 1
    return out[:n_out]


def spanning_forest(graph: Graph, erasure) -> SpanningForest:
    """Depth-first spanning forest of the erasure.

    Trees are started from the lowest unvisited occupied vertex and edges
    are explored in adjacency (edge id) order.
    """
    ptr, adj_edge, adj_nbr = graph.adjacency
    in_erasure = np.zeros(graph.edge_count, dtype=np.uint8)
    in_erasure[erasure.edges] = 1
    occupied = np.zeros(graph.vertex_count, dtype=np.uint8)
    occupied[erasure.vertices] = 1
    occupied[graph.endpoints[erasure.edges].ravel()] = 1
    edges = _dfs_forest(ptr, adj_edge, adj_nbr, in_erasure, occupied)
    return SpanningForest(edges=edges, vertices=np.flatnonzero(occupied))


@njit(cache=True)
def _peel(n, eu, ev, forest_edges, defect, boundary):
    """Return a mask over ``forest_edges`` selecting the correction.

    Each tree is rooted at its lowest boundary vertex if it has one, else its
    lowest vertex, and leaves are peeled towards the root. Returns the
    leftover defect vertex or -1 on success.
    """
    k = len(forest_edges)
    deg = np.zeros(n, dtype=np.int64)
    for i in range(k):
        deg[eu[forest_edges[i]]] += 1
        deg[ev[forest_edges[i]]] += 1
    ptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        ptr[v + 1] = ptr[v] + deg[v]
    fill = ptr[:-1].copy()
    inc = np.empty(2 * k, dtype=np.int64)
    for i in range(k):
        a = eu[forest_edges[i]]
        b = ev[forest_edges[i]]
        inc[fill[a]] = i
        fill[a] += 1
        inc[fill[b]] = i
        fill[b] += 1

    d = defect.copy()
    chosen = np.zeros(k, dtype=np.uint8)
    seen = np.zeros(n, dtype=np.uint8)
    order = np.empty(n, dtype=np.int64)
    via = np.empty(n, dtype=np.int64)
    up = np.empty(n, dtype=np.int64)
    comp = np.empty(n, dtype=np.int64)
    for s in range(n):
        if seen[s] or (deg[s] == 0 and not d[s]):
            continue
        # gather the component to pick its root
        seen[s] = 1
        comp[0] = s
        size = 1
        head = 0
        root = s
        root_on_boundary = boundary[s]
        while head < size:
            v = comp[head]
            head += 1
            if boundary[v] and (not root_on_boundary or v < root):
                root = v
                root_on_boundary = True
            for j in range(ptr[v], ptr[v + 1]):
                i = inc[j]
                w = eu[forest_edges[i]] + ev[forest_edges[i]] - v
                if not seen[w]:
                    seen[w] = 1
                    comp[size] = w
                    size += 1
        # orient the tree from the root, then peel leaves first
        order[0] = root
        via[root] = -1
        up[root] = -1
        cnt = 1
        head = 0
        while head < cnt:
            v = order[head]
            head += 1
            for j in range(ptr[v], ptr[v + 1]):
                i = inc[j]
                if i == via[v]:
                    continue
                w = eu[forest_edges[i]] + ev[forest_edges[i]] - v
                via[w] = i
                up[w] = v
                order[cnt] = w
                cnt += 1
        for t in range(cnt - 1, 0, -1):
            v = order[t]
            if d[v]:
                chosen[via[v]] = 1
                d[v] = 0
                d[up[v]] ^= 1
        if d[root] and not boundary[root]:
            return chosen, root
        d[root] = 0
    return chosen, -1


def peel(graph: Graph, forest: SpanningForest, syndrome) -> np.ndarray:
    """Correction (edge ids) reproducing ``syndrome`` on the forest.

    Leaf edges are stripped repeatedly: a leaf that is a defect keeps its
    edge in the correction and hands the defect to its parent; otherwise
    the edge is discarded. Trees touching an open boundary are rooted there
    so an odd number of defects can terminate on it.
    """
    syndrome = np.asarray(syndrome, dtype=bool)
    defects = np.flatnonzero(syndrome)
    covered = np.zeros(graph.vertex_count, dtype=bool)
    covered[forest.vertices] = True
    outside = defects[~covered[defects]]
    if len(outside):
        raise PeelingError(f"defects outside the forest: {outside.tolist()}")
    eu = graph.endpoints[:, 0]
    ev = graph.endpoints[:, 1]
    chosen, leftover = _peel(
        graph.vertex_count, eu, ev, np.asarray(forest.edges, dtype=np.int64),
        syndrome.astype(np.uint8), graph.boundary.astype(np.uint8),
    )
    if leftover >= 0:
        raise PeelingError(f"odd tree without boundary (root {leftover})")
    return np.sort(np.asarray(forest.edges)[chosen.astype(bool)])


def correction_mask(graph: Graph, correction) -> np.ndarray:
    """Edge mask of a correction; repeated edges cancel in pairs."""
    idx = np.asarray(correction, dtype=np.int64)
    return np.bincount(idx, minlength=graph.edge_count) % 2 == 1
