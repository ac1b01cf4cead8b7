"""Independent and phenomenological noise, and (difference) syndromes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice


@dataclass(frozen=True)
class NoiseParams:
    """Physical error rate ``p`` per qubit and measurement error rate ``q``."""

    p: float
    q: float = 0.0

    def __post_init__(self):
        for name in ("p", "q"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True, eq=False)
class ErrorSample:
    """One draw of qubit and measurement errors.

    Attributes
    ----------
    qubit : ndarray of bool, shape (edge_count,)
        Error bit per lattice edge; always False on timelike edges.
    measurement : ndarray of bool, shape (rounds, layer_size)
        Outcome flip per check and round. Boundary vertices never flip.
    """

    qubit: np.ndarray
    measurement: np.ndarray

    def edge_bits(self, lattice: Lattice) -> np.ndarray:
        """Errors as a bit per lattice edge, measurement flips on timelike edges.

        A flip in the final round is absorbed by the perfect last round and
        has no edge.
        """
        bits = self.qubit.copy()
        timelike = np.flatnonzero(lattice.timelike)
        if len(timelike):
            lower = lattice.endpoints[timelike, 0]
            bits[timelike] = self.measurement.reshape(-1)[lower]
        return bits


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, derived only from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial_index)]))


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def sample_errors(lattice: Lattice, params: NoiseParams, rng_seed) -> ErrorSample:
    """Draw qubit errors (rate ``p``) then measurement flips (rate ``q``).

    Bits are drawn in lattice edge order followed by check order, so the
    sample depends only on the seed. 2D lattices ignore ``q``.
    """
    rng = _as_rng(rng_seed)
    spacelike = ~lattice.timelike
    qubit = np.zeros(lattice.edge_count, dtype=bool)
    qubit[spacelike] = rng.random(int(spacelike.sum())) < params.p
    measurement = np.zeros((lattice.rounds, lattice.layer_size), dtype=bool)
    if lattice.rounds > 1:
        flips = rng.random(lattice.vertex_count) < params.q
        measurement = (flips & lattice.checks).reshape(lattice.rounds, lattice.layer_size)
    return ErrorSample(qubit=qubit, measurement=measurement)


def syndrome_of_edges(lattice, edge_bits) -> np.ndarray:
    """Defect mask flagging checks with an odd number of incident set edges."""
    edge_bits = np.asarray(edge_bits, dtype=bool)
    ends = lattice.endpoints[edge_bits].ravel()
    parity = np.bincount(ends, minlength=lattice.vertex_count) & 1
    return parity.astype(bool) & ~lattice.boundary


def compute_syndrome(lattice: Lattice, errors: ErrorSample) -> np.ndarray:
    """Defect mask of the (difference) syndrome.

    Each round's check values accumulate all qubit errors up to that round
    and are then flipped by that round's measurement errors; a vertex is a
    defect when its value differs from the previous round. The final round
    is read out perfectly.
    """
    R = lattice.rounds
    S = lattice.layer_size
    spacelike = ~lattice.timelike
    # per-round qubit error sets, each checked against its own layer
    round_of_edge = lattice.coords[lattice.endpoints[:, 0], 2]
    layer_local = lattice.endpoints % S
    checks = lattice.checks[:S]
    cumulative = np.zeros(S, dtype=bool)
    previous = np.zeros(S, dtype=bool)
    defects = np.zeros((R, S), dtype=bool)
    for t in range(R):
        sel = spacelike & (round_of_edge == t) & errors.qubit
        ends = layer_local[sel].ravel()
        cumulative ^= (np.bincount(ends, minlength=S) & 1).astype(bool)
        measured = cumulative & checks
        if t < R - 1:
            measured = measured ^ errors.measurement[t]
        defects[t] = measured ^ previous
        previous = measured
    return defects.reshape(-1)


def defect_list(syndrome: np.ndarray) -> np.ndarray:
    return np.flatnonzero(syndrome)
