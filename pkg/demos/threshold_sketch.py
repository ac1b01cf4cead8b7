"""A quick look at the union-find threshold on small toric codes.

A couple of thousand trials per point is enough to see the curves swap
order near p = 0.1. The acceptance run uses far more.
"""

from uflab import ExperimentConfig, crossing_point, run_experiment

ps = (0.07, 0.08, 0.09, 0.10, 0.11, 0.12)
table = run_experiment(ExperimentConfig(kind="threshold", distances=(5, 9), p=ps, trials=2000)).table

rates = {}
for row in table.records():
    rates.setdefault(row["d"], []).append(row["rate"])

print("   p     " + "".join(f"d={d:<8}" for d in rates))
for i, p in enumerate(ps):
    print(f"  {p:.2f}  " + "".join(f"{rates[d][i]:<10.4f}" for d in rates))
cross = crossing_point(ps, rates[5], rates[9])
print("\ncurves cross near p =", "n/a" if cross is None else f"{cross:.4f}")
