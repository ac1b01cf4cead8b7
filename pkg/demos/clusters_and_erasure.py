"""Cluster statistics and erasure percolation below threshold.

Mean cluster size levels off as d grows while the number of clusters
tracks the area, so the forest never holds one lattice-sized tree.
"""

from uflab import ExperimentConfig, run_experiment

res = run_experiment(ExperimentConfig(kind="cluster-stats", code="planar", distances=(9, 13, 17, 25),
                                      p=(0.08,), trials=1000))
print("planar, p = 0.08")
print("   d   mean size  perimeter   clusters")
for r in res.table.records():
    print(f"  {r['d']:>2}   {r['mean_size']:9.3f}  {r['mean_perimeter']:9.3f}  {r['mean_count']:9.2f}")
for f in res.fits.records():
    if f["model"] == "A-B/d":
        print(f"  {f['quantity']}: A = {f['A']:.3f}, B = {f['B']:.3f}, R^2 = {f['r_squared']:.4f}")
    else:
        print(f"  count: {f['slope']:.4f} d^2 + {f['intercept']:.3f}, R^2 = {f['r_squared']:.5f}")

print("\ntoric erasure wrapping rate")
perc = run_experiment(ExperimentConfig(kind="erasure-perc", distances=(8, 16, 32), p=(0.03, 0.06),
                                       trials=300)).table
for r in perc.records():
    print(f"  L={r['L']:<3} p={r['p']:.2f}  {r['rate']:.3f}  [{r['lower']:.3f}, {r['upper']:.3f}]")
