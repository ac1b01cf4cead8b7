"""Disjoint-set forest with access counting.

Counting convention
-------------------
Every read of a parent-table entry is one root read and every write one
root write. Detecting a root costs a read of its own entry. Full
compression is two-pass: the second pass re-reads and then rewrites each
non-root element visited. Path splitting reads parent and grandparent and
writes the parent once per step. Size-table traffic is tallied separately.

Under this convention a find on a depth-1 element costs 4 accesses with
compression or splitting, and 2 without.

Linking: with union-by-size the smaller tree goes under the larger, ties to
the lower id. Without it the lower id survives by default. The alternative
``"coin"`` rule picks the survivor by a fair coin hashed from the two roots,
which looks random whatever the argument order yet repeats exactly; the
random-merge benchmark uses it, since a lower-id rule keeps every root at its
set minimum and caps the depth of random forests near log n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

NO_COMPRESSION = 0
FULL_COMPRESSION = 1
SPLITTING = 2

_COMPRESSION_NAMES = {
    "none": NO_COMPRESSION,
    "full_compression": FULL_COMPRESSION,
    "splitting": SPLITTING,
}

LINKINGS = ("lower-id", "coin")

# counter slots
ROOT_READS, ROOT_WRITES, SIZE_READS, SIZE_WRITES = range(4)


@dataclass(frozen=True)
class DsuMode:
    """Linking rule and find-time flattening."""

    by_size: bool = False
    compression: int = NO_COMPRESSION

    def __post_init__(self):
        if self.compression not in (NO_COMPRESSION, FULL_COMPRESSION, SPLITTING):
            raise ValueError(f"unknown compression {self.compression!r}")

    @property
    def name(self) -> str:
        parts = []
        if self.by_size:
            parts.append("ubs")
        if self.compression == FULL_COMPRESSION:
            parts.append("pc")
        elif self.compression == SPLITTING:
            parts.append("ps")
        return "+".join(parts) or "naive"

    @classmethod
    def parse(cls, name: str) -> "DsuMode":
        """Parse ``naive``, ``ubs``, ``pc``, ``ps``, ``ubs+pc`` or ``ubs+ps``."""
        name = name.strip().lower()
        if name == "naive":
            return cls()
        by_size = False
        compression = NO_COMPRESSION
        for part in name.split("+"):
            if part == "ubs" and not by_size:
                by_size = True
            elif part == "pc" and compression == NO_COMPRESSION:
                compression = FULL_COMPRESSION
            elif part == "ps" and compression == NO_COMPRESSION:
                compression = SPLITTING
            else:
                raise ValueError(f"unknown DSU mode {name!r}")
        return cls(by_size, compression)

    def __str__(self):
        return self.name


ALL_MODES = tuple(DsuMode.parse(s) for s in ("naive", "ubs", "pc", "ps", "ubs+pc", "ubs+ps"))


@dataclass(frozen=True)
class AccessCounts:
    root_reads: int = 0
    root_writes: int = 0
    size_reads: int = 0
    size_writes: int = 0

    @property
    def root_accesses(self) -> int:
        return self.root_reads + self.root_writes

    @property
    def size_accesses(self) -> int:
        return self.size_reads + self.size_writes

    @classmethod
    def from_array(cls, counts) -> "AccessCounts":
        return cls(*(int(c) for c in counts[:4]))


@njit(cache=True)
def dsu_find(parent, counts, x, compression):
    if compression == SPLITTING:
        while True:
            p = parent[x]
            counts[ROOT_READS] += 1
            if p == x:
                return x
            g = parent[p]
            counts[ROOT_READS] += 1
            parent[x] = g
            counts[ROOT_WRITES] += 1
            x = p
    root = x
    while True:
        p = parent[root]
        counts[ROOT_READS] += 1
        if p == root:
            break
        root = p
    if compression == FULL_COMPRESSION:
        while x != root:
            nxt = parent[x]
            counts[ROOT_READS] += 1
            parent[x] = root
            counts[ROOT_WRITES] += 1
            x = nxt
    return root


_MIX0 = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def link_coin(a, b):
    """True when the higher of two roots should survive a naive link.

    A splitmix64 finaliser over the unordered pair; heads on about half of
    all pairs.
    """
    lo = np.uint64(min(a, b))
    hi = np.uint64(max(a, b))
    z = lo * _MIX0 + hi
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(63)) == np.uint64(1)


@njit(cache=True)
def dsu_union(parent, size, counts, x, y, by_size, compression, coin=False):
    """Merge the sets of ``x`` and ``y``; return ``(survivor, absorbed)``.

    ``absorbed`` is -1 when both were already in one set. ``coin`` selects
    hashed-coin linking when not ``by_size``.
    """
    rx = dsu_find(parent, counts, x, compression)
    ry = dsu_find(parent, counts, y, compression)
    if rx == ry:
        return rx, -1
    if by_size:
        sx = size[rx]
        sy = size[ry]
        counts[SIZE_READS] += 2
        if sy > sx or (sy == sx and ry < rx):
            rx, ry = ry, rx
        size[rx] = sx + sy
        counts[SIZE_WRITES] += 1
    elif (ry < rx) != (coin and link_coin(rx, ry)):
        rx, ry = ry, rx
    parent[ry] = rx
    counts[ROOT_WRITES] += 1
    return rx, ry


@njit(cache=True)
def _random_merges(parent, size, counts, xs, ys, by_size, compression, coin):
    for i in range(len(xs)):
        dsu_union(parent, size, counts, xs[i], ys[i], by_size, compression, coin)


class DisjointSetForest:
    """Parent table plus optional size table over elements ``0..n-1``.

    Examples
    --------
    >>> f = DisjointSetForest(3)
    >>> f.union(0, 1)
    0
    >>> f.find(1), f.counts.root_reads
    (0, 4)
    """

    def __init__(self, n: int, mode: DsuMode = DsuMode(), linking: str = "lower-id"):
        if int(n) != n or n < 1:
            raise ValueError(f"forest size must be a positive integer, got {n}")
        if linking not in LINKINGS:
            raise ValueError(f"unknown linking {linking!r}; choose from {', '.join(LINKINGS)}")
        self.n = int(n)
        self.mode = mode
        self.linking = linking
        self.parent = np.arange(self.n, dtype=np.int64)
        # unused but typed consistently when not by_size
        self.size = np.ones(self.n if mode.by_size else 0, dtype=np.int64)
        self._counts = np.zeros(4, dtype=np.int64)

    @property
    def counts(self) -> AccessCounts:
        return AccessCounts.from_array(self._counts)

    def _check(self, x):
        if not 0 <= x < self.n:
            raise IndexError(f"element {x} out of range for forest of size {self.n}")

    def find(self, x: int) -> int:
        self._check(x)
        return int(dsu_find(self.parent, self._counts, x, self.mode.compression))

    def union(self, x: int, y: int) -> int:
        """Merge the sets containing ``x`` and ``y``; return the surviving root."""
        self._check(x)
        self._check(y)
        root, _ = dsu_union(
            self.parent, self.size, self._counts, x, y,
            self.mode.by_size, self.mode.compression, self.linking == "coin",
        )
        return int(root)

    def height(self, x: int) -> int:
        """Depth of ``x`` below its root, without touching the counters."""
        depth = 0
        while self.parent[x] != x:
            x = self.parent[x]
            depth += 1
        return depth

    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == np.arange(self.n))


def make_forest(n: int, mode: DsuMode = DsuMode(), linking: str = "lower-id") -> DisjointSetForest:
    return DisjointSetForest(n, mode, linking)


def bench_random_merges(n: int, m: int, mode: DsuMode, rng_seed, linking: str = "coin") -> float:
    """Root-table accesses per merge over ``m`` unions of uniform random pairs."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    rng = np.random.default_rng(rng_seed)
    pairs = rng.integers(0, n, size=(m, 2))
    forest = DisjointSetForest(n, mode, linking)
    _random_merges(
        forest.parent, forest.size, forest._counts,
        pairs[:, 0].copy(), pairs[:, 1].copy(), mode.by_size, mode.compression, linking == "coin",
    )
    return forest.counts.root_accesses / m
