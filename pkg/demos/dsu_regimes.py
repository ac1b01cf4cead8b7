"""Accesses per merge for random unions in the two regimes.

Saturated: many more merges than elements, so the forest collapses into a
few big trees and the optimisations matter. Unsaturated: few merges, small
trees, and every mode costs about the same.
"""

from uflab import DsuMode, bench_random_merges

MODES = ["naive", "ubs", "pc", "ubs+pc"]

for label, m, ks in (("saturated, m = 2^18", 2 ** 18, (8, 10, 12, 14)),
                     ("unsaturated, m = 2^10", 2 ** 10, (10, 12, 14, 16))):
    print(label)
    print("   n     " + "".join(f"{mode:>9}" for mode in MODES))
    for k in ks:
        row = [bench_random_merges(2 ** k, m, DsuMode.parse(mode), rng_seed=k) for mode in MODES]
        print(f"  2^{k:<5} " + "".join(f"{v:9.2f}" for v in row))
    print()
