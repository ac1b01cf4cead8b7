"""End-to-end decoders: union-find (validate, forest, peel) and MWPM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsu import AccessCounts, DsuMode
from .growth import ClusterStats, Erasure, GrowthState
from .lattice import Lattice
from .matcher import decode_mwpm
from .peeler import peel, spanning_forest


@dataclass(frozen=True, eq=False)
class UFResult:
    correction: np.ndarray
    erasure: Erasure
    stats: ClusterStats
    counts: AccessCounts
    iterations: int
    state: GrowthState


def decode_uf(lattice: Lattice, syndrome, mode: DsuMode = DsuMode(), correct: bool = True) -> UFResult:
    """Union-find decoding; ``correct=False`` stops after validation."""
    state = GrowthState(lattice, syndrome, mode)
    iterations = state.run()
    erasure = state.erasure()
    correction = np.zeros(0, dtype=np.int64)
    if correct:
        correction = peel(lattice, spanning_forest(lattice, erasure), syndrome)
    return UFResult(correction, erasure, state.statistics(), state.counts, iterations, state)


def decode(lattice: Lattice, syndrome, decoder: str = "uf", mode: DsuMode = DsuMode()) -> np.ndarray:
    if decoder == "uf":
        return decode_uf(lattice, syndrome, mode).correction
    if decoder == "mwpm":
        return decode_mwpm(lattice, syndrome)
    raise ValueError(f"unknown decoder {decoder!r}")
