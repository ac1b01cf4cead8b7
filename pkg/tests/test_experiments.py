import numpy as np
import pytest

from uflab.experiments import ConfigError, ExperimentConfig, _tally, iter_trials, run_experiment
from uflab.lattice import PLANAR, TORIC


def test_rejects_bad_fields():
    for bad in (
        dict(kind="nope"), dict(kind="threshold", code="klein"), dict(kind="threshold", p=(1.5,)),
        dict(kind="threshold", trials=0), dict(kind="threshold", distances=()),
        dict(kind="threshold", distances=(1,)), dict(kind="threshold", modes=("ubs+zz",)),
        dict(kind="threshold", decoder="bp"), dict(kind="threshold", rounds="2"),
        dict(kind="dsu-bench", linking="random"), dict(kind="threshold", fmt="xml"),
    ):
        with pytest.raises(ConfigError):
            ExperimentConfig(**bad)


def test_error_names_field():
    with pytest.raises(ConfigError, match="trials"):
        ExperimentConfig(kind="threshold", trials=-3)


@pytest.mark.parametrize("kind", ["threshold", "access-count", "cluster-stats", "erasure-perc", "bond-perc"])
def test_deterministic(kind):
    p = (0.5,) if kind == "bond-perc" else (0.09,)
    cfg = ExperimentConfig(kind=kind, distances=(6,), p=p, trials=40, modes=("naive", "ubs+pc"))
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.table.to_csv() == b.table.to_csv()
    other = run_experiment(ExperimentConfig(kind=kind, distances=(6,), p=p, trials=40,
                                            modes=("naive", "ubs+pc"), seed=cfg.seed + 1))
    assert other.table.to_csv() != a.table.to_csv()


def test_zero_rate_gives_zero_failures():
    for code in (TORIC, PLANAR):
        t = run_experiment(ExperimentConfig(kind="threshold", code=code, distances=(5, 7), p=(0.0,), trials=30))
        assert t.table.column("failures") == [0, 0]
        t = run_experiment(ExperimentConfig(kind="erasure-perc", code=code, distances=(6,), p=(0.0,), trials=30))
        assert t.table.column("rate") == [0.0]


def test_access_scale_factor_of_naive_is_one():
    t = run_experiment(ExperimentConfig(kind="access-count", code=PLANAR, distances=(7,), p=(0.08,),
                                        trials=50, modes=("naive", "ubs", "pc")))
    rows = {r["mode"]: r for r in t.table.records()}
    assert rows["naive"]["scale_factor_vs_naive"] == 1.0
    assert rows["ubs"]["size_accesses"] > 0 and rows["naive"]["size_accesses"] == 0
    assert rows["pc"]["root_accesses"] >= rows["naive"]["root_accesses"]


def test_naive_added_when_missing():
    t = run_experiment(ExperimentConfig(kind="access-count", distances=(5,), p=(0.08,), trials=10,
                                        modes=("ubs",)))
    assert t.table.column("mode") == ["ubs"]
    assert t.table.column("scale_factor_vs_naive")[0] > 0


def test_records_aggregate_to_table():
    cfg = ExperimentConfig(kind="threshold", distances=(5,), p=(0.08, 0.1), trials=60)
    res = run_experiment(cfg, keep_records=True)
    assert len(res.records) == 120
    for row in res.table.records():
        fails = sum(r.failed for r in res.records if r.p == row["p"])
        assert fails == row["failures"]


def test_aggregation_ignores_record_order():
    cfg = ExperimentConfig(kind="cluster-stats", distances=(5, 7), p=(0.08,), trials=30)
    records = list(iter_trials(cfg))
    perm = np.random.default_rng(0).permutation(len(records))
    a, b = _tally(records), _tally([records[i] for i in perm])
    assert a.keys() == b.keys()
    for k in a:
        assert (a[k].trials, a[k].size, a[k].perimeter, a[k].clusters) == \
               (b[k].trials, b[k].size, b[k].perimeter, b[k].clusters)


def test_failure_rate_monotone_in_p():
    ps = (0.02, 0.05, 0.08, 0.11, 0.14)
    t = run_experiment(ExperimentConfig(kind="threshold", distances=(5,), p=ps, trials=400))
    rates = t.table.column("rate")
    for a, b in zip(rates, rates[1:]):
        sigma = np.sqrt((a * (1 - a) + b * (1 - b)) / 400)
        assert b >= a - 3 * sigma


def test_cluster_fits_present():
    res = run_experiment(ExperimentConfig(kind="cluster-stats", distances=(5, 7, 9), p=(0.05,), trials=40))
    quantities = res.fits.column("quantity")
    assert quantities == ["size", "perimeter", "count"]
    assert all(0 <= r <= 1 for r in res.fits.column("r_squared"))


def test_dsu_bench_reps_and_linking():
    base = dict(kind="dsu-bench", sizes=(64,), ms=(500,), modes=("naive",), reps=3)
    coin = run_experiment(ExperimentConfig(**base))
    low = run_experiment(ExperimentConfig(**base, linking="lower-id"))
    assert coin.table.column("reps") == [3]
    assert coin.table.column("stderr")[0] >= 0
    assert coin.table.to_csv() != low.table.to_csv()


def test_soundness_and_oracles_clean():
    s = run_experiment(ExperimentConfig(kind="soundness", code=PLANAR, distances=(5,), p=(0.1,), trials=50))
    row = s.table.records()[0]
    assert (row["uneven_clusters"], row["uncovered_defects"], row["mode_mismatches"], row["bad_corrections"]) \
        == (0, 0, 0, 0)
    o = run_experiment(ExperimentConfig(kind="oracle-check", trials=40))
    rows = {r["check"]: r for r in o.table.records()}
    assert all(r["violations"] == 0 for r in rows.values())
