"""Syndrome validation: cluster growth over the instrumented forest.

Clusters grow by half-edges from stored boundary lists. Within one
iteration every odd, unconfined cluster is grown (ascending root id) with
all edge writes deferred to the new edge stack; edges completed by those
writes go to the fusion edge stack, which is drained afterwards to perform
the unions. Each cluster's boundary list and new edge stack form a double
buffer: the sites grown this iteration become the next boundary list.

Boundary sites are encoded as ``2 * edge + side`` where ``side`` selects
the endpoint inside the cluster (0 for the lower vertex id). Sites whose
edge has since filled are dropped lazily the next time the list is read.
Lists live in one growable arena; a list is ``(offset, length, capacity)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dsu import AccessCounts, DsuMode, dsu_union
from .lattice import Graph

# columns of the list tables
OFF, LEN, CAP = 0, 1, 2


@njit(cache=True)
def _reserve(arena, top, need):
    if top[0] + need <= len(arena):
        return arena
    size = max(2 * len(arena), top[0] + need)
    bigger = np.empty(size, dtype=np.int64)
    for i in range(top[0]):
        bigger[i] = arena[i]
    return bigger


@njit(cache=True)
def _append(arena, top, lists, r, site):
    if lists[r, LEN] == lists[r, CAP]:
        cap = max(4, 2 * lists[r, CAP])
        arena = _reserve(arena, top, cap)
        off = top[0]
        top[0] += cap
        old = lists[r, OFF]
        for i in range(lists[r, LEN]):
            arena[off + i] = arena[old + i]
        lists[r, OFF] = off
        lists[r, CAP] = cap
    arena[lists[r, OFF] + lists[r, LEN]] = site
    lists[r, LEN] += 1
    return arena


@njit(cache=True)
def _init_clusters(adj_ptr, adj_edge, eu, defect, occupied, parity, is_root, csize, blist, arena, top):
    n = len(defect)
    for v in range(n):
        if defect[v]:
            occupied[v] = 1
            parity[v] = 1
            is_root[v] = 1
            csize[v] = 1
            for k in range(adj_ptr[v], adj_ptr[v + 1]):
                e = adj_edge[k]
                side = 0 if eu[e] == v else 1
                arena = _append(arena, top, blist, v, 2 * e + side)
    return arena


@njit(cache=True)
def _grow_once(
    adj_ptr, adj_edge, eu, ev, boundary,
    stage, occupied, parity, confined, is_root, csize, blist, nlist,
    arena, top, parent, size, counts, by_size, compression,
    nes_e, nes_root, nes_far, fes, events,
):
    """One growth iteration. Returns ``(arena, n_grown, n_events)``.

    ``events[k] = (survivor, absorbed)`` for every union that joined two
    distinct sets, including occupation of a fresh vertex.
    """
    n = len(occupied)
    grown = 0
    # growth: read boundary lists, defer every edge write to the NES
    for r in range(n):
        if not is_root[r] or parity[r] == 0 or confined[r]:
            continue
        nlist[r, LEN] = 0
        off = blist[r, OFF]
        for i in range(blist[r, LEN]):
            site = arena[off + i]
            e = site >> 1
            if stage[e] >= 2:
                continue
            arena = _append(arena, top, nlist, r, site)
            off = blist[r, OFF]  # arena may have moved
            nes_e[grown] = e
            nes_root[grown] = r
            nes_far[grown] = ev[e] if (site & 1) == 0 else eu[e]
            grown += 1
        # double buffer: the new edge stack becomes the boundary list
        for c in range(3):
            tmp = blist[r, c]
            blist[r, c] = nlist[r, c]
            nlist[r, c] = tmp
        nlist[r, LEN] = 0
    # commit the NES; completed edges go to the FES exactly once
    n_fes = 0
    for k in range(grown):
        e = nes_e[k]
        if stage[e] < 2:
            stage[e] += 1
            if stage[e] == 2:
                fes[n_fes] = k
                n_fes += 1
    # drain the FES
    n_events = 0
    for i in range(n_fes):
        k = fes[i]
        r = nes_root[k]
        w = nes_far[k]
        if not occupied[w]:
            occupied[w] = 1
            s, a = dsu_union(parent, size, counts, r, w, by_size, compression)
            if s == w:
                # fresh vertex won the link: move the cluster record to it
                parity[w] = parity[a]
                confined[w] = confined[a]
                csize[w] = csize[a]
                is_root[a] = 0
                for c in range(3):
                    blist[w, c] = blist[a, c]
                    nlist[w, c] = nlist[a, c]
                    blist[a, c] = 0
                    nlist[a, c] = 0
            is_root[s] = 1
            csize[s] += 1
            if boundary[w]:
                confined[s] = 1
            else:
                for j in range(adj_ptr[w], adj_ptr[w + 1]):
                    e2 = adj_edge[j]
                    if stage[e2] < 2:
                        side = 0 if eu[e2] == w else 1
                        arena = _append(arena, top, blist, s, 2 * e2 + side)
        else:
            s, a = dsu_union(parent, size, counts, r, w, by_size, compression)
            if a < 0:
                continue
            parity[s] ^= parity[a]
            confined[s] |= confined[a]
            csize[s] += csize[a]
            is_root[a] = 0
            # concatenate, copying the shorter list onto the longer
            if blist[a, LEN] > blist[s, LEN]:
                for c in range(3):
                    tmp = blist[s, c]
                    blist[s, c] = blist[a, c]
                    blist[a, c] = tmp
            src = blist[a, OFF]
            for j in range(blist[a, LEN]):
                arena = _append(arena, top, blist, s, arena[src + j])
            for c in range(3):
                blist[a, c] = 0
                nlist[a, c] = 0
        events[n_events, 0] = s
        events[n_events, 1] = a
        n_events += 1
    return arena, grown, n_events


@njit(cache=True)
def _any_active(is_root, parity, confined):
    for r in range(len(is_root)):
        if is_root[r] and parity[r] and not confined[r]:
            return True
    return False


@njit(cache=True)
def _validate(
    adj_ptr, adj_edge, eu, ev, boundary,
    stage, occupied, parity, confined, is_root, csize, blist, nlist,
    arena, top, parent, size, counts, by_size, compression,
    nes_e, nes_root, nes_far, fes, events, max_iterations,
):
    iterations = 0
    while _any_active(is_root, parity, confined):
        if iterations >= max_iterations:
            return arena, -1
        arena, grown, _ = _grow_once(
            adj_ptr, adj_edge, eu, ev, boundary,
            stage, occupied, parity, confined, is_root, csize, blist, nlist,
            arena, top, parent, size, counts, by_size, compression,
            nes_e, nes_root, nes_far, fes, events,
        )
        iterations += 1
        if grown == 0:
            return arena, -2
    return arena, iterations


@njit(cache=True)
def _perimeters(roots, blist, arena, stage):
    out = np.zeros(len(roots), dtype=np.int64)
    for i in range(len(roots)):
        off = blist[roots[i], 0]
        for k in range(off, off + blist[roots[i], 1]):
            if stage[arena[k] >> 1] < 2:
                out[i] += 1
    return out


@dataclass(frozen=True, eq=False)
class Erasure:
    """Fully grown edges and occupied vertices at the end of validation."""

    edges: np.ndarray
    vertices: np.ndarray

    @property
    def edge_mask_size(self) -> int:
        return len(self.edges)


@dataclass(frozen=True, eq=False)
class ClusterStats:
    """Final clusters: occupied-vertex counts, live boundary sites, count."""

    roots: np.ndarray
    sizes: np.ndarray
    perimeters: np.ndarray

    @property
    def count(self) -> int:
        return len(self.roots)


class GrowthState:
    """Mutable validation state for one syndrome on one graph.

    Attributes
    ----------
    stage : ndarray of uint8, per edge
        0 empty, 1 half grown, 2 fully grown.
    occupied : ndarray of uint8, per vertex
    forest_parent, forest_size : ndarray
        Root table and size table of the instrumented forest.
    iterations : int
        Growth iterations performed so far.
    """

    def __init__(self, graph: Graph, syndrome, mode: DsuMode = DsuMode()):
        syndrome = np.asarray(syndrome, dtype=bool)
        if syndrome.shape != (graph.vertex_count,):
            raise ValueError("syndrome does not match the graph")
        if np.any(syndrome & graph.boundary):
            raise ValueError("boundary vertices cannot carry defects")
        toric = not graph.boundary.any()
        if toric and syndrome.sum() % 2:
            raise ValueError("odd number of defects on a graph without boundary")
        n = graph.vertex_count
        m = graph.edge_count
        self.graph = graph
        self.mode = mode
        self.defects = syndrome.astype(np.uint8)
        self.stage = np.zeros(m, dtype=np.uint8)
        self.occupied = np.zeros(n, dtype=np.uint8)
        self.parity = np.zeros(n, dtype=np.uint8)
        self.confined = np.zeros(n, dtype=np.uint8)
        self.is_root = np.zeros(n, dtype=np.uint8)
        self.csize = np.zeros(n, dtype=np.int64)
        self.blist = np.zeros((n, 3), dtype=np.int64)
        self.nlist = np.zeros((n, 3), dtype=np.int64)
        self.forest_parent = np.arange(n, dtype=np.int64)
        self.forest_size = np.ones(n if mode.by_size else 0, dtype=np.int64)
        self.counters = np.zeros(4, dtype=np.int64)
        self._top = np.zeros(1, dtype=np.int64)
        self._arena = np.empty(max(64, 16 * int(syndrome.sum())), dtype=np.int64)
        self._nes_e = np.empty(2 * m, dtype=np.int64)
        self._nes_root = np.empty(2 * m, dtype=np.int64)
        self._nes_far = np.empty(2 * m, dtype=np.int64)
        self._fes = np.empty(2 * m, dtype=np.int64)
        self._events = np.empty((n, 2), dtype=np.int64)
        self.iterations = 0
        ptr, adj_edge, _ = graph.adjacency
        self._graph_arrays = (ptr, adj_edge, *graph.endpoint_columns, graph.boundary_u8)
        self._arena = _init_clusters(
            ptr, adj_edge, self._graph_arrays[2], self.defects, self.occupied,
            self.parity, self.is_root, self.csize, self.blist, self._arena, self._top,
        )

    def _state_args(self):
        return (
            self.stage, self.occupied, self.parity, self.confined, self.is_root,
            self.csize, self.blist, self.nlist,
        )

    def _scratch_args(self):
        return (
            self.forest_parent, self.forest_size, self.counters,
            self.mode.by_size, self.mode.compression,
            self._nes_e, self._nes_root, self._nes_far, self._fes, self._events,
        )

    @property
    def counts(self) -> AccessCounts:
        return AccessCounts.from_array(self.counters)

    def active_roots(self) -> np.ndarray:
        """Roots of odd, unconfined clusters, ascending."""
        return np.flatnonzero(self.is_root.astype(bool) & (self.parity == 1) & (self.confined == 0))

    def cluster_roots(self) -> np.ndarray:
        return np.flatnonzero(self.is_root)

    def boundary_sites(self, root: int, live_only: bool = True) -> list[tuple[int, int]]:
        """``(vertex, edge)`` sites stored for the cluster rooted at ``root``."""
        off, length, _ = self.blist[root]
        eu, ev = self._graph_arrays[2], self._graph_arrays[3]
        sites = []
        for site in self._arena[off: off + length]:
            e = int(site >> 1)
            if live_only and self.stage[e] >= 2:
                continue
            v = int(eu[e] if site & 1 == 0 else ev[e])
            sites.append((v, e))
        return sites

    def grow_iteration(self) -> list[tuple[int, int]]:
        """Grow every odd unconfined cluster once and apply the merges.

        Returns the ``(survivor, absorbed)`` root pairs of all unions that
        joined distinct sets.
        """
        if not len(self.active_roots()):
            raise RuntimeError("no odd unconfined cluster left to grow")
        self._arena, _, n_events = _grow_once(
            *self._graph_arrays, *self._state_args(), self._arena, self._top, *self._scratch_args()
        )
        self.iterations += 1
        return [tuple(int(v) for v in ev) for ev in self._events[:n_events]]

    def run(self, max_iterations: int | None = None) -> int:
        """Grow until every cluster is even or confined; return iterations."""
        if max_iterations is None:
            max_iterations = self.graph.vertex_count + 1
        self._arena, iterations = _validate(
            *self._graph_arrays, *self._state_args(), self._arena, self._top,
            *self._scratch_args(), max_iterations,
        )
        if iterations == -1:
            raise RuntimeError("validation did not terminate")
        if iterations == -2:
            raise RuntimeError("odd cluster has no room to grow")
        self.iterations += iterations
        return iterations

    def erasure(self) -> Erasure:
        return Erasure(
            edges=np.flatnonzero(self.stage == 2),
            vertices=np.flatnonzero(self.occupied),
        )

    def cluster_of(self) -> np.ndarray:
        """Cluster root per vertex (-1 when unoccupied), without counting."""
        labels = np.full(self.graph.vertex_count, -1, dtype=np.int64)
        occ = np.flatnonzero(self.occupied)
        roots = occ.copy()
        parent = self.forest_parent
        while True:
            nxt = parent[roots]
            if np.array_equal(nxt, roots):
                break
            roots = nxt
        labels[occ] = roots
        return labels

    def statistics(self) -> ClusterStats:
        """Size (occupied vertices) and perimeter (live boundary sites) per cluster."""
        roots = self.cluster_roots()
        perimeters = _perimeters(roots, self.blist, self._arena, self.stage)
        return ClusterStats(roots=roots, sizes=self.csize[roots].copy(), perimeters=perimeters)


def validate_syndrome(graph: Graph, syndrome, mode: DsuMode = DsuMode()):
    """Grow clusters until each is even or confined.

    Returns
    -------
    erasure : Erasure
    stats : ClusterStats
    counts : AccessCounts
    """
    state = GrowthState(graph, syndrome, mode)
    state.run()
    return state.erasure(), state.statistics(), state.counts


def cluster_statistics(state: GrowthState) -> ClusterStats:
    return state.statistics()
