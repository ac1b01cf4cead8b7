"""Minimum-weight perfect matching of defects.

Two engines: an exact dynamic programme over defect subsets (feasible up
to 16 defects) and a local matcher (greedy, then pair-swap descent) for
larger instances. Planar boundaries are handled as one virtual partner per
defect at its boundary distance; virtual pairs cost nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import Lattice, boundary_distance, pairwise_distances

MAX_EXACT_DEFECTS = 16
# partner value meaning "matched to the open boundary"
TO_BOUNDARY = -1
# pairs per exactly re-solved neighbourhood in the local matcher
LOCAL_WINDOW = 8

_INF = np.iinfo(np.int64).max // 4


class MatchingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DefectGraph:
    """Defects with pairwise distances and, on planar codes, boundary distances."""

    defects: np.ndarray
    weights: np.ndarray
    boundary_weights: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.defects)

    @property
    def has_boundary(self) -> bool:
        return self.boundary_weights is not None


@dataclass(frozen=True, eq=False)
class Matching:
    """Pairs of defect indices; ``(i, TO_BOUNDARY)`` terminates on the boundary."""

    pairs: tuple[tuple[int, int], ...]
    pair_weights: tuple[int, ...]

    @property
    def total_weight(self) -> int:
        return int(sum(self.pair_weights))


def defect_graph(lattice: Lattice, syndrome) -> DefectGraph:
    syndrome = np.asarray(syndrome)
    defects = np.flatnonzero(syndrome) if syndrome.dtype == bool else syndrome.astype(np.int64)
    weights = pairwise_distances(lattice, defects) if len(defects) else np.zeros((0, 0), np.int64)
    bw = None if lattice.is_toric else boundary_distance(lattice, defects).astype(np.int64)
    return DefectGraph(defects=defects, weights=weights.astype(np.int64), boundary_weights=bw)


def _validate_graph(graph: DefectGraph):
    if not graph.has_boundary and graph.size % 2:
        raise MatchingError(f"odd number of defects ({graph.size}) without a boundary")


def _as_matching(graph: DefectGraph, partner: np.ndarray) -> Matching:
    pairs = []
    weights = []
    for i, j in enumerate(partner):
        if j == TO_BOUNDARY:
            pairs.append((i, TO_BOUNDARY))
            weights.append(int(graph.boundary_weights[i]))
        elif i < j:
            pairs.append((i, int(j)))
            weights.append(int(graph.weights[i, j]))
    return Matching(pairs=tuple(pairs), pair_weights=tuple(weights))


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _lowest(mask):
    i = 0
    while not (mask >> i) & 1:
        i += 1
    return i


@njit(cache=True)
def _exact_partner(w, bw, use_boundary):
    """Subset DP, memoised over the subsets reachable from the full set.

    The lowest remaining defect is always matched first, so only a small
    fraction of all subsets is ever visited.
    """
    k = w.shape[0]
    full = (1 << k) - 1
    seen = np.zeros(full + 1, dtype=np.uint8)
    states = np.empty(min(full + 1, 1 << 12), dtype=np.int64)
    stack = np.empty(k * k + 2, dtype=np.int64)
    n_states = 0
    depth = 1
    stack[0] = full
    seen[full] = 1
    while depth:
        depth -= 1
        mask = stack[depth]
        if n_states == len(states):
            bigger = np.empty(2 * len(states), dtype=np.int64)
            bigger[:n_states] = states[:n_states]
            states = bigger
        states[n_states] = mask
        n_states += 1
        if mask == 0:
            continue
        rest = mask & ~(1 << _lowest(mask))
        if use_boundary and not seen[rest]:
            seen[rest] = 1
            stack[depth] = rest
            depth += 1
        for j in range(k):
            if (rest >> j) & 1:
                child = rest & ~(1 << j)
                if not seen[child]:
                    seen[child] = 1
                    stack[depth] = child
                    depth += 1
    # evaluate children before parents
    pops = np.empty(n_states, dtype=np.int64)
    for s in range(n_states):
        pops[s] = _popcount(states[s])
    order = np.argsort(pops, kind="mergesort")
    cost = np.empty(full + 1, dtype=np.int64)
    pick = np.empty(full + 1, dtype=np.int64)
    for s in order:
        mask = states[s]
        if mask == 0:
            cost[0] = 0
            continue
        i = _lowest(mask)
        rest = mask & ~(1 << i)
        best = _INF
        choice = -2
        # partners in ascending order, boundary last: lexicographic tie-break
        for j in range(i + 1, k):
            if (rest >> j) & 1:
                sub = cost[rest & ~(1 << j)]
                if sub < _INF and w[i, j] + sub < best:
                    best = w[i, j] + sub
                    choice = j
        if use_boundary and cost[rest] < _INF and bw[i] + cost[rest] < best:
            best = bw[i] + cost[rest]
            choice = -1
        cost[mask] = best
        pick[mask] = choice
    partner = np.full(k, -2, dtype=np.int64)
    mask = full
    while mask:
        i = _lowest(mask)
        j = pick[mask]
        partner[i] = j
        mask &= ~(1 << i)
        if j >= 0:
            partner[j] = i
            mask &= ~(1 << j)
    return partner


def mwpm_exact(graph: DefectGraph) -> Matching:
    """Globally minimum matching by subset dynamic programming.

    Ties resolve to the lexicographically smallest pair list.
    """
    _validate_graph(graph)
    if graph.size > MAX_EXACT_DEFECTS:
        raise MatchingError(f"{graph.size} defects exceed the exact limit of {MAX_EXACT_DEFECTS}")
    if graph.size == 0:
        return Matching((), ())
    bw = graph.boundary_weights if graph.has_boundary else np.zeros(graph.size, np.int64)
    partner = _exact_partner(graph.weights, bw, graph.has_boundary)
    return _as_matching(graph, partner)


@njit(cache=True)
def _local_partner(w):
    n = w.shape[0]
    n_pairs = n * (n - 1) // 2
    pw = np.empty(n_pairs, dtype=np.int64)
    pi = np.empty(n_pairs, dtype=np.int64)
    pj = np.empty(n_pairs, dtype=np.int64)
    c = 0
    for i in range(n):
        for j in range(i + 1, n):
            pw[c] = w[i, j]
            pi[c] = i
            pj[c] = j
            c += 1
    order = np.argsort(pw, kind="mergesort")
    partner = np.full(n, -1, dtype=np.int64)
    for c in order:
        i = pi[c]
        j = pj[c]
        if partner[i] < 0 and partner[j] < 0:
            partner[i] = j
            partner[j] = i
    # pair-swap descent
    a_of = np.empty(n // 2, dtype=np.int64)
    b_of = np.empty(n // 2, dtype=np.int64)
    m = 0
    for i in range(n):
        if i < partner[i]:
            a_of[m] = i
            b_of[m] = partner[i]
            m += 1
    improved = True
    while improved:
        improved = False
        for p in range(m):
            for q in range(p + 1, m):
                a = a_of[p]
                b = b_of[p]
                c2 = a_of[q]
                d = b_of[q]
                cur = w[a, b] + w[c2, d]
                alt1 = w[a, c2] + w[b, d]
                alt2 = w[a, d] + w[b, c2]
                if alt1 < cur and alt1 <= alt2:
                    b_of[p] = c2
                    a_of[q] = b
                    improved = True
                elif alt2 < cur:
                    b_of[p] = d
                    b_of[q] = b
                    a_of[q] = c2
                    improved = True
    for p in range(m):
        partner[a_of[p]] = b_of[p]
        partner[b_of[p]] = a_of[p]
    return partner


@njit(cache=True)
def _window_descent(w, partner, n_real, window):
    """Re-solve the neighbourhood of each pair exactly until nothing improves.

    A window is one pair plus its ``window - 1`` nearest pairs (by closest
    real-real member distance); pairs of two virtual nodes join last.
    """
    n = w.shape[0]
    m = n // 2
    a_of = np.empty(m, dtype=np.int64)
    b_of = np.empty(m, dtype=np.int64)
    c = 0
    for i in range(n):
        if i < partner[i]:
            a_of[c] = i
            b_of[c] = partner[i]
            c += 1
    size = min(window, m)
    if size < 3:
        return partner
    big = np.iinfo(np.int64).max
    prox = np.empty(m, dtype=np.int64)
    nodes = np.empty(2 * size, dtype=np.int64)
    # stamp of the last change to each pair / last check of each centre
    changed = np.zeros(m, dtype=np.int64)
    checked = np.full(m, -1, dtype=np.int64)
    clock = 0
    improved = True
    while improved:
        improved = False
        for p in range(m):
            for q in range(m):
                best = big
                for x in (a_of[p], b_of[p]):
                    for y in (a_of[q], b_of[q]):
                        if x < n_real and y < n_real and w[x, y] < best:
                            best = w[x, y]
                if best == big and a_of[q] >= n_real:
                    best = big - 1  # virtual pairs after every real one
                prox[q] = best
            prox[p] = -1
            chosen = np.argsort(prox, kind="mergesort")[:size]
            stale = False
            for t in range(size):
                if changed[chosen[t]] > checked[p]:
                    stale = True
            if not stale:
                continue
            clock += 1
            checked[p] = clock
            for t in range(size):
                nodes[2 * t] = a_of[chosen[t]]
                nodes[2 * t + 1] = b_of[chosen[t]]
            sub = np.empty((2 * size, 2 * size), dtype=np.int64)
            cur = 0
            for s in range(2 * size):
                for t in range(2 * size):
                    sub[s, t] = w[nodes[s], nodes[t]]
            for t in range(size):
                cur += sub[2 * t, 2 * t + 1]
            sp = _exact_partner(sub, np.zeros(2 * size, dtype=np.int64), False)
            new = 0
            for s in range(2 * size):
                if s < sp[s]:
                    new += sub[s, sp[s]]
            if new < cur:
                improved = True
                t = 0
                for s in range(2 * size):
                    if s < sp[s]:
                        a_of[chosen[t]] = nodes[s]
                        b_of[chosen[t]] = nodes[sp[s]]
                        changed[chosen[t]] = clock
                        t += 1
    for p in range(m):
        partner[a_of[p]] = b_of[p]
        partner[b_of[p]] = a_of[p]
    return partner


def mwpm_local(graph: DefectGraph, window: int = LOCAL_WINDOW) -> Matching:
    """Greedy shortest-first matching refined by local descent.

    Two pairs ``(a, b), (c, d)`` are re-paired whenever one of the other two
    pairings is strictly lighter, until no swap helps. Then each pair and
    its ``window - 1`` nearest pairs are re-matched exactly, repeating until
    no window improves. ``window < 3`` stops after the pair swaps.
    """
    _validate_graph(graph)
    k = graph.size
    if k == 0:
        return Matching((), ())
    if graph.has_boundary:
        n = 2 * k
        w = np.zeros((n, n), dtype=np.int64)
        w[:k, :k] = graph.weights
        w[:k, k:] = graph.boundary_weights[:, None]
        w[k:, :k] = graph.boundary_weights[None, :]
    else:
        w = np.ascontiguousarray(graph.weights, dtype=np.int64)
    partner = _local_partner(w)
    if window >= 3:
        partner = _window_descent(w, partner, k, min(window, MAX_EXACT_DEFECTS // 2))
    partner = partner[:k]
    if graph.has_boundary:
        partner = np.where(partner >= k, TO_BOUNDARY, partner)
    return _as_matching(graph, partner)


def mwpm(graph: DefectGraph) -> Matching:
    """Exact matching when small enough, local matching otherwise."""
    if graph.size <= MAX_EXACT_DEFECTS:
        return mwpm_exact(graph)
    return mwpm_local(graph)


def _walk(lattice: Lattice, u: int, direction: int, count: int, flips: list):
    steps = lattice.steps
    for _ in range(count):
        nbr, e = steps[u, direction]
        flips.append(e)
        u = nbr
    return u


def path_edges(lattice: Lattice, u: int, v: int) -> list[int]:
    """Edges of the staircase path from ``u`` to ``v``: x, then y, then t.

    Toric axes take the shorter way round (ties go in the + direction).
    """
    flips: list[int] = []
    cu = lattice.coords[u]
    cv = lattice.coords[v]
    for axis, extent in ((0, lattice.width), (1, lattice.height), (2, lattice.rounds)):
        delta = int(cv[axis] - cu[axis])
        if delta == 0:
            continue
        if lattice.is_toric and axis < 2:
            fwd = delta % extent
            if fwd <= extent - fwd:
                u = _walk(lattice, u, 2 * axis, fwd, flips)
            else:
                u = _walk(lattice, u, 2 * axis + 1, extent - fwd, flips)
        elif delta > 0:
            u = _walk(lattice, u, 2 * axis, delta, flips)
        else:
            u = _walk(lattice, u, 2 * axis + 1, -delta, flips)
    return flips


def boundary_path_edges(lattice: Lattice, u: int) -> list[int]:
    """Straight path from ``u`` to the nearer open boundary (left on ties)."""
    x = int(lattice.coords[u, 0])
    right = lattice.width - 1 - x
    flips: list[int] = []
    if x <= right:
        _walk(lattice, u, 1, x, flips)
    else:
        _walk(lattice, u, 0, right, flips)
    return flips


def decode_mwpm(lattice: Lattice, syndrome) -> np.ndarray:
    """MWPM correction: matched pairs joined by staircase paths (edge ids)."""
    graph = defect_graph(lattice, np.asarray(syndrome, dtype=bool))
    matching = mwpm(graph)
    flips: list[int] = []
    for i, j in matching.pairs:
        u = int(graph.defects[i])
        if j == TO_BOUNDARY:
            flips.extend(boundary_path_edges(lattice, u))
        else:
            flips.extend(path_edges(lattice, u, int(graph.defects[j])))
    parity = np.bincount(np.asarray(flips, dtype=np.int64), minlength=lattice.edge_count) & 1
    return np.flatnonzero(parity)
