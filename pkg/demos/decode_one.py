"""Decode a single planar-code syndrome with union-find and with matching."""

import numpy as np

from uflab import (
    DsuMode, LatticeSpec, NoiseParams, build_lattice, compute_syndrome, decode_mwpm, decode_uf,
    logical_failure, sample_errors,
)

lattice = build_lattice(LatticeSpec("planar", 7))
errors = sample_errors(lattice, NoiseParams(0.06), rng_seed=11)
syndrome = compute_syndrome(lattice, errors)
bits = errors.edge_bits(lattice)


def picture(marks):
    rows = []
    for y in range(lattice.height):
        row = ""
        for x in range(lattice.width):
            v = lattice.vertex_id(x, y)
            row += "|" if lattice.boundary[v] else ("X" if marks[v] else ".")
        rows.append("  " + row)
    return "\n".join(rows)


print(f"{bits.sum()} qubit errors, {syndrome.sum()} defects")
print(picture(syndrome))

uf = decode_uf(lattice, syndrome, DsuMode.parse("ubs+pc"))
occupied = np.zeros(lattice.vertex_count, dtype=bool)
occupied[uf.erasure.vertices] = True
print(f"\nunion-find: {uf.iterations} growth rounds, {uf.stats.count} clusters, "
      f"{len(uf.erasure.edges)} erased edges, {len(uf.correction)} correction edges")
print(picture(occupied))
print(f"  logical failure: {logical_failure(lattice, bits, uf.correction)}")
c = uf.counts
print(f"  table accesses: root {c.root_reads + c.root_writes}, size {c.size_reads + c.size_writes}")

mw = decode_mwpm(lattice, syndrome)
print(f"\nmatching: {len(mw)} correction edges, logical failure: {logical_failure(lattice, bits, mw)}")
