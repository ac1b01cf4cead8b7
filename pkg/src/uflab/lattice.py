"""Decoding graphs for toric and planar surface codes.

Only one stabiliser sector is modelled. Vertices are checks, edges are
qubits (spacelike) or repeated measurements of one check (timelike).

Toric lattices are ``L x L`` vertex grids with periodic boundaries in both
spatial axes. Planar lattices have ``d`` rows and ``d + 1`` columns: columns
``x = 0`` and ``x = d`` hold virtual boundary vertices (one per row, each
with a single edge into the bulk), so a boundary-to-boundary string needs
``d`` edges. In 3D the ``rounds`` layers are stacked along ``t`` with
timelike edges between consecutive layers only; the final layer is a
perfect measurement round and has no edges above it.

Numbering is row-major in ``(t, y, x)``; edges are sorted by
``(lower endpoint, axis)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TORIC = "toric"
PLANAR = "planar"
CODE_KINDS = (TORIC, PLANAR)

X_AXIS, Y_AXIS, T_AXIS = 0, 1, 2

# Sentinel vertex id for "the open boundary" in distance queries.
BOUNDARY = -1

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class LatticeSpec:
    """Code family, distance and number of measurement rounds."""

    code_kind: str
    distance: int
    rounds: int = 1

    def __post_init__(self):
        if self.code_kind not in CODE_KINDS:
            raise ValueError(f"unknown code kind {self.code_kind!r}")
        if int(self.distance) != self.distance or self.distance < 2:
            raise ValueError(f"distance must be an integer >= 2, got {self.distance}")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValueError(f"rounds must be an integer >= 1, got {self.rounds}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected multigraph given by an edge endpoint table.

    ``boundary`` flags vertices where strings may terminate (planar open
    boundaries). Peeling and spanning-forest routines only need this much.
    """

    vertex_count: int
    endpoints: np.ndarray
    boundary: np.ndarray = field(default=None)

    def __post_init__(self):
        endpoints = np.asarray(self.endpoints, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "endpoints", endpoints)
        if self.boundary is None:
            object.__setattr__(self, "boundary", np.zeros(self.vertex_count, dtype=bool))
        else:
            object.__setattr__(self, "boundary", np.asarray(self.boundary, dtype=bool))

    @property
    def edge_count(self) -> int:
        return len(self.endpoints)

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR adjacency ``(ptr, incident_edge, neighbour)``, edges in id order."""
        n = self.vertex_count
        m = self.edge_count
        ends = np.concatenate([self.endpoints[:, 0], self.endpoints[:, 1]])
        others = np.concatenate([self.endpoints[:, 1], self.endpoints[:, 0]])
        edge_ids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((edge_ids, ends))
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, ends + 1, 1)
        ptr = np.cumsum(ptr)
        return ptr, edge_ids[order].astype(np.int64), others[order].astype(np.int64)

    @cached_property
    def endpoint_columns(self) -> tuple[np.ndarray, np.ndarray]:
        """Contiguous ``(lo, hi)`` endpoint columns."""
        return (
            np.ascontiguousarray(self.endpoints[:, 0]),
            np.ascontiguousarray(self.endpoints[:, 1]),
        )

    @cached_property
    def boundary_u8(self) -> np.ndarray:
        return self.boundary.astype(np.uint8)

    @cached_property
    def degree(self) -> np.ndarray:
        ptr = self.adjacency[0]
        return np.diff(ptr)

    def incident_edges(self, v: int) -> np.ndarray:
        ptr, edges, _ = self.adjacency
        return edges[ptr[v]:ptr[v + 1]]

    def neighbours(self, v: int) -> np.ndarray:
        ptr, _, nbrs = self.adjacency
        return nbrs[ptr[v]:ptr[v + 1]]


@dataclass(frozen=True, eq=False)
class Lattice(Graph):
    """Surface-code decoding graph with coordinates.

    Attributes
    ----------
    spec : LatticeSpec
    coords : ndarray, shape (vertex_count, 3)
        Integer ``(x, y, t)`` per vertex.
    axis : ndarray, shape (edge_count,)
        0, 1 for spacelike x/y edges, 2 for timelike edges.
    steps : ndarray, shape (vertex_count, 6, 2)
        ``steps[v, k] = (neighbour, edge)`` for direction ``k`` in
        ``(+x, -x, +y, -y, +t, -t)``; ``(-1, -1)`` where no edge exists.
    """

    spec: LatticeSpec = None
    coords: np.ndarray = None
    axis: np.ndarray = None
    steps: np.ndarray = None

    @property
    def code_kind(self) -> str:
        return self.spec.code_kind

    @property
    def distance(self) -> int:
        return self.spec.distance

    @property
    def rounds(self) -> int:
        return self.spec.rounds

    @property
    def is_toric(self) -> bool:
        return self.spec.code_kind == TORIC

    @property
    def width(self) -> int:
        return self.distance if self.is_toric else self.distance + 1

    @property
    def height(self) -> int:
        return self.distance

    @property
    def layer_size(self) -> int:
        return self.width * self.height

    @cached_property
    def timelike(self) -> np.ndarray:
        return self.axis == T_AXIS

    @cached_property
    def checks(self) -> np.ndarray:
        """Vertices that carry a real parity check (everything but boundary)."""
        return ~self.boundary

    def vertex_id(self, x: int, y: int, t: int = 0) -> int:
        return (t * self.height + y) * self.width + x

    def edge_between(self, u: int, v: int) -> int:
        """Id of the lowest-numbered edge joining ``u`` and ``v``."""
        for nbr, e in self.steps[u]:
            if nbr == v:
                return int(e) if e >= 0 else -1
        raise ValueError(f"vertices {u} and {v} are not adjacent")


def build_lattice(spec: LatticeSpec) -> Lattice:
    """Construct the decoding graph described by ``spec``."""
    L = spec.distance
    R = spec.rounds
    toric = spec.code_kind == TORIC
    W = L if toric else L + 1
    H = L
    n = W * H * R

    t, y, x = np.meshgrid(np.arange(R), np.arange(H), np.arange(W), indexing="ij")
    coords = np.stack([x.ravel(), y.ravel(), t.ravel()], axis=1).astype(np.int64)
    boundary = np.zeros(n, dtype=bool)
    if not toric:
        boundary = (coords[:, 0] == 0) | (coords[:, 0] == W - 1)

    def vid(xx, yy, tt):
        return (tt * H + yy) * W + xx

    a_list, b_list, ax_list = [], [], []
    cx, cy, ct = coords[:, 0], coords[:, 1], coords[:, 2]
    ids = np.arange(n)
    # +x edges
    if toric:
        sel = np.ones(n, dtype=bool)
        nx = (cx + 1) % W
    else:
        sel = cx < W - 1
        nx = cx + 1
    a_list.append(ids[sel])
    b_list.append(vid(nx, cy, ct)[sel])
    ax_list.append(np.full(sel.sum(), X_AXIS))
    # +y edges
    if toric:
        sel = np.ones(n, dtype=bool)
        ny = (cy + 1) % H
    else:
        sel = (cy < H - 1) & ~boundary
        ny = cy + 1
    a_list.append(ids[sel])
    b_list.append(vid(cx, ny, ct)[sel])
    ax_list.append(np.full(sel.sum(), Y_AXIS))
    # +t edges, none above the final round
    sel = (ct < R - 1) & ~boundary
    a_list.append(ids[sel])
    b_list.append(vid(cx, cy, ct + 1)[sel])
    ax_list.append(np.full(sel.sum(), T_AXIS))

    a = np.concatenate(a_list)
    b = np.concatenate(b_list)
    axis = np.concatenate(ax_list).astype(np.int8)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    order = np.lexsort((axis, lo))
    endpoints = np.stack([lo[order], hi[order]], axis=1).astype(np.int64)
    axis = axis[order]
    src = a[order]
    dst = b[order]

    steps = np.full((n, 6, 2), -1, dtype=np.int64)
    edge_ids = np.arange(len(endpoints))
    for ax in (X_AXIS, Y_AXIS, T_AXIS):
        sel = axis == ax
        steps[src[sel], 2 * ax, 0] = dst[sel]
        steps[src[sel], 2 * ax, 1] = edge_ids[sel]
        steps[dst[sel], 2 * ax + 1, 0] = src[sel]
        steps[dst[sel], 2 * ax + 1, 1] = edge_ids[sel]

    return Lattice(
        vertex_count=n,
        endpoints=endpoints,
        boundary=boundary,
        spec=spec,
        coords=coords,
        axis=axis,
        steps=steps,
    )


def _axis_gaps(lattice: Lattice, u, v):
    cu = lattice.coords[u]
    cv = lattice.coords[v]
    gap = np.abs(cu - cv)
    if lattice.is_toric:
        L = lattice.distance
        gap[..., :2] = np.minimum(gap[..., :2], L - gap[..., :2])
    return gap


def shortest_distance(lattice: Lattice, u: int, v: int) -> int:
    """Number of edges on a shortest path between ``u`` and ``v``.

    ``v`` may be :data:`BOUNDARY` on planar lattices, giving the distance
    from ``u`` to the nearest open boundary.
    """
    n = lattice.vertex_count
    if not 0 <= u < n:
        raise ValueError(f"vertex {u} out of range")
    if v == BOUNDARY:
        return int(boundary_distance(lattice, u))
    if not 0 <= v < n:
        raise ValueError(f"vertex {v} out of range")
    return int(distances_from(lattice, u)[v])


def distances_from(lattice: Lattice, u: int) -> np.ndarray:
    """Graph distance from ``u`` to every vertex."""
    gap = _axis_gaps(lattice, u, np.arange(lattice.vertex_count))
    dist = gap.sum(axis=1)
    if not lattice.is_toric and lattice.boundary[u]:
        # boundary vertices are leaves: two on the same side are joined via the bulk
        xu = lattice.coords[u, 0]
        same_side = lattice.boundary & (lattice.coords[:, 0] == xu)
        dist[same_side] += 2
        dist[u] = 0
    return dist


def pairwise_distances(lattice: Lattice, vertices) -> np.ndarray:
    """Distance matrix between the listed vertices."""
    vs = np.asarray(vertices, dtype=np.int64)
    gap = _axis_gaps(lattice, vs[:, None], vs[None, :])
    dist = gap.sum(axis=2)
    if not lattice.is_toric:
        b = lattice.boundary[vs]
        xs = lattice.coords[vs, 0]
        same = b[:, None] & b[None, :] & (xs[:, None] == xs[None, :])
        same &= vs[:, None] != vs[None, :]
        dist = dist + 2 * same
    return dist


def boundary_distance(lattice: Lattice, vertices) -> np.ndarray:
    """Distance from each vertex to the nearest open boundary (planar only)."""
    if lattice.is_toric:
        raise ValueError("toric lattices have no open boundary")
    x = lattice.coords[np.asarray(vertices, dtype=np.int64), 0]
    return np.minimum(x, lattice.width - 1 - x)


def logical_cut(lattice: Lattice, axis: str) -> np.ndarray:
    """Edge ids crossing a fixed cut; odd crossing parity marks a logical.

    ``horizontal`` cuts the x-direction edges leaving column 0 (toric: the
    wraparound edges into column 0), ``vertical`` cuts the y-direction
    wraparound edges into row 0. Planar lattices only expose
    ``horizontal``, joining the two open boundaries. 3D lattices include the
    cut in every round.
    """
    coords = lattice.coords
    if axis == HORIZONTAL:
        # toric: the +x edges leaving the last column wrap into column 0
        col = lattice.width - 1 if lattice.is_toric else 0
        start = np.flatnonzero(coords[:, 0] == col)
        cut = lattice.steps[start, 0, 1]
    elif axis == VERTICAL:
        if not lattice.is_toric:
            raise ValueError("planar lattices only have a horizontal logical cut")
        start = np.flatnonzero(coords[:, 1] == lattice.height - 1)
        cut = lattice.steps[start, 2, 1]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return np.sort(cut[cut >= 0])


def logical_axes(lattice: Lattice) -> tuple[str, ...]:
    return (HORIZONTAL, VERTICAL) if lattice.is_toric else (HORIZONTAL,)
