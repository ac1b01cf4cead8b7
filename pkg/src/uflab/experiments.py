"""Monte Carlo campaigns behind every CLI subcommand.

Each trial draws its randomness from ``trial_rng(seed, index)``, so the same
trial index sees the same uniforms at every grid point and in every DSU
mode. Aggregation walks records in generation order and sums integers, so
tables are bit-stable.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .decoders import decode
from .dsu import ALL_MODES, LINKINGS, AccessCounts, DisjointSetForest, DsuMode, bench_random_merges
from .growth import GrowthState
from .lattice import CODE_KINDS, PLANAR, TORIC, Lattice, LatticeSpec, build_lattice
from .matcher import defect_graph, mwpm_exact, mwpm_local
from .noise import NoiseParams, compute_syndrome, sample_errors, syndrome_of_edges, trial_rng
from .peeler import correction_mask, peel, spanning_forest
from .percolation import bond_percolation_trial, erasure_percolates, mwpm_ball_erasure
from .stats import fit_hyperbolic, fit_linear, logical_failure, wilson_interval
from .tables import Table

DEFAULT_SEED = 20240917

KINDS = (
    "dsu-bench", "access-count", "threshold", "cluster-stats",
    "bond-perc", "erasure-perc", "soundness", "oracle-check",
)
DECODERS = ("uf", "mwpm")
ESTIMATORS = ("auto", "validation", "mwpm-ball")


class ConfigError(ValueError):
    """An experiment configuration field is invalid."""


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    ``distances`` doubles as the lattice size list ``L`` for percolation
    runs; ``sizes`` and ``ms`` are the element and merge counts of the DSU
    benchmark, whose naive linking rule is ``linking``. ``rounds`` is ``"1"`` or ``"L"`` (as many rounds as the
    distance) and ``q`` is ``"0"`` or ``"p"``.
    """

    kind: str
    code: str = TORIC
    distances: tuple[int, ...] = (9,)
    p: tuple[float, ...] = (0.05,)
    trials: int = 1000
    seed: int = DEFAULT_SEED
    modes: tuple[str, ...] = ("naive",)
    rounds: str = "1"
    q: str = "0"
    decoder: str = "uf"
    estimator: str = "auto"
    sizes: tuple[int, ...] = (1024,)
    ms: tuple[int, ...] = (2 ** 20,)
    reps: int = 1
    linking: str = "coin"
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        _require(self.kind in KINDS, f"kind must be one of {', '.join(KINDS)}")
        _require(self.code in CODE_KINDS, f"code must be one of {', '.join(CODE_KINDS)}")
        for name in ("distances", "p", "modes", "sizes", "ms"):
            _require(len(getattr(self, name)) > 0, f"{name} must be a nonempty list")
        _require(all(int(d) == d and d >= 2 for d in self.distances), "distances must be integers >= 2")
        _require(all(0.0 <= p <= 1.0 for p in self.p), "p values must lie in [0, 1]")
        _require(self.trials >= 1, "trials must be >= 1")
        _require(self.reps >= 1, "reps must be >= 1")
        _require(all(n >= 2 for n in self.sizes), "sizes must be >= 2")
        _require(all(m >= 1 for m in self.ms), "merge counts must be >= 1")
        _require(self.rounds in ("1", "L"), "rounds policy must be '1' or 'L'")
        _require(self.q in ("0", "p"), "q policy must be '0' or 'p'")
        _require(self.decoder in DECODERS, f"decoder must be one of {', '.join(DECODERS)}")
        _require(self.estimator in ESTIMATORS, f"estimator must be one of {', '.join(ESTIMATORS)}")
        _require(self.linking in LINKINGS, f"linking must be one of {', '.join(LINKINGS)}")
        _require(self.fmt in ("csv", "json"), "format must be csv or json")
        try:
            self.mode_objects
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def mode_objects(self) -> tuple[DsuMode, ...]:
        return tuple(DsuMode.parse(m) for m in self.modes)

    def lattice(self, d: int) -> Lattice:
        return build_lattice(LatticeSpec(self.code, d, d if self.rounds == "L" else 1))

    def noise(self, p: float) -> NoiseParams:
        return NoiseParams(p, p if self.q == "p" else 0.0)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial at one grid point (and DSU mode, where relevant)."""

    index: int
    seed: int
    d: int
    p: float
    mode: str | None = None
    counts: AccessCounts | None = None
    clusters: int = 0
    size_total: int = 0
    perimeter_total: int = 0
    percolated: bool | None = None
    failed: bool | None = None
    iterations: int = 0


@dataclass
class ExperimentResult:
    table: Table
    fits: Table | None = None
    records: list[TrialRecord] = field(default_factory=list)


def _validated(lattice: Lattice, syndrome, mode: DsuMode) -> GrowthState:
    state = GrowthState(lattice, syndrome, mode)
    state.run()
    return state


def _record_from_state(config, i, d, p, state: GrowthState, **extra) -> TrialRecord:
    stats = state.statistics()
    return TrialRecord(
        index=i, seed=config.seed, d=d, p=p, mode=state.mode.name, counts=state.counts,
        clusters=stats.count, size_total=int(stats.sizes.sum()),
        perimeter_total=int(stats.perimeters.sum()), iterations=state.iterations, **extra,
    )


def _syndromes(config: ExperimentConfig, lattice: Lattice, p: float):
    noise = config.noise(p)
    for i in range(config.trials):
        errors = sample_errors(lattice, noise, trial_rng(config.seed, i))
        yield i, errors, compute_syndrome(lattice, errors)


def _access_modes(config: ExperimentConfig) -> tuple[DsuMode, ...]:
    modes = config.mode_objects
    return modes if DsuMode() in modes else (DsuMode(),) + modes


def _estimator(config: ExperimentConfig) -> str:
    if config.estimator != "auto":
        return config.estimator
    return "mwpm-ball" if config.rounds == "L" else "validation"


def iter_trials(config: ExperimentConfig) -> Iterator[TrialRecord]:
    """Stream the trial records of a Monte Carlo experiment, in a fixed order."""
    kind = config.kind
    if kind == "bond-perc":
        for L in config.distances:
            for p in config.p:
                for i in range(config.trials):
                    hit = bond_percolation_trial(L, p, trial_rng(config.seed, i))
                    yield TrialRecord(i, config.seed, L, p, percolated=hit)
        return
    if kind not in ("access-count", "threshold", "cluster-stats", "erasure-perc"):
        raise ConfigError(f"{kind} does not produce trial records")
    mode = config.mode_objects[0]
    for d in config.distances:
        lattice = config.lattice(d)
        for p in config.p:
            for i, errors, syndrome in _syndromes(config, lattice, p):
                if kind == "access-count":
                    for m in _access_modes(config):
                        yield _record_from_state(config, i, d, p, _validated(lattice, syndrome, m))
                elif kind == "cluster-stats":
                    yield _record_from_state(config, i, d, p, _validated(lattice, syndrome, mode))
                elif kind == "threshold":
                    correction = decode(lattice, syndrome, config.decoder, mode)
                    failed = logical_failure(lattice, errors.edge_bits(lattice), correction)
                    yield TrialRecord(i, config.seed, d, p, failed=failed)
                else:
                    if _estimator(config) == "validation":
                        erasure = _validated(lattice, syndrome, mode).erasure()
                    else:
                        erasure = mwpm_ball_erasure(lattice, syndrome)
                    yield TrialRecord(i, config.seed, d, p,
                                      percolated=erasure_percolates(lattice, erasure))


class _Tally:
    __slots__ = ("trials", "hits", "counts", "clusters", "size", "perimeter", "iterations")

    def __init__(self):
        self.trials = 0
        self.hits = 0
        self.counts = np.zeros(4, dtype=np.int64)
        self.clusters = 0
        self.size = 0
        self.perimeter = 0
        self.iterations = 0

    def add(self, rec: TrialRecord):
        self.trials += 1
        self.hits += bool(rec.failed) or bool(rec.percolated)
        if rec.counts is not None:
            c = rec.counts
            self.counts += (c.root_reads, c.root_writes, c.size_reads, c.size_writes)
        self.clusters += rec.clusters
        self.size += rec.size_total
        self.perimeter += rec.perimeter_total
        self.iterations += rec.iterations


def _tally(records) -> dict:
    tallies: dict = {}
    for rec in records:
        key = (rec.d, rec.p, rec.mode)
        if key not in tallies:
            tallies[key] = _Tally()
        tallies[key].add(rec)
    return tallies


def _rate_table(first: str, tallies: dict, hit_name: str) -> Table:
    table = Table((first, "p", "trials", hit_name, "rate", "lower", "upper"))
    for (d, p, _), t in tallies.items():
        w = wilson_interval(t.hits, t.trials, 2.0)
        table.append(d, p, t.trials, t.hits, w.estimate, w.lower, w.upper)
    return table


def _access_table(config: ExperimentConfig, tallies: dict) -> Table:
    table = Table((
        "d", "p", "mode", "trials", "root_reads", "root_writes", "size_reads", "size_writes",
        "root_accesses", "size_accesses", "scale_factor_vs_naive",
    ))
    for d in config.distances:
        for p in config.p:
            base = tallies[(d, p, "naive")].counts
            base_root = int(base[0] + base[1])
            for mode in config.mode_objects:
                t = tallies[(d, p, mode.name)]
                n = t.trials
                c = t.counts
                root = int(c[0] + c[1])
                scale = root / base_root if base_root else float("nan")
                table.append(
                    d, p, mode.name, n, c[0] / n, c[1] / n, c[2] / n, c[3] / n,
                    root / n, int(c[2] + c[3]) / n, scale,
                )
    return table


def _cluster_tables(config: ExperimentConfig, tallies: dict) -> tuple[Table, Table]:
    table = Table(("d", "p", "trials", "clusters", "mean_size", "mean_perimeter", "mean_count", "mean_iterations"))
    for (d, p, _), t in tallies.items():
        mean_size = t.size / t.clusters if t.clusters else 0.0
        mean_perimeter = t.perimeter / t.clusters if t.clusters else 0.0
        table.append(d, p, t.trials, t.clusters, mean_size, mean_perimeter,
                     t.clusters / t.trials, t.iterations / t.trials)
    fits = Table(("p", "quantity", "model", "A", "B", "slope", "intercept", "intercept_stderr", "r_squared"))
    distinct = sorted(set(config.distances))
    for p in config.p:
        rows = [r for r in table.records() if r["p"] == p]
        ds = [r["d"] for r in rows]
        if len(distinct) >= 3:
            for q in ("size", "perimeter"):
                f = fit_hyperbolic(ds, [r[f"mean_{q}"] for r in rows])
                fits.append(p, q, "A-B/d", f.A, f.B, None, None, None, f.r_squared)
        if len(distinct) >= 2:
            f = fit_linear([d * d for d in ds], [r["mean_count"] for r in rows])
            fits.append(p, "count", "linear-d2", None, None, f.slope, f.intercept,
                        f.intercept_stderr, f.r_squared)
    return table, fits


def _dsu_bench(config: ExperimentConfig) -> Table:
    table = Table(("n", "m", "mode", "reps", "accesses_per_merge", "stderr"))
    for n in config.sizes:
        for m in config.ms:
            for mode in config.mode_objects:
                values = [
                    bench_random_merges(n, m, mode, np.random.SeedSequence([config.seed, n, m, r]),
                                        config.linking)
                    for r in range(config.reps)
                ]
                mean = math.fsum(values) / len(values)
                err = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
                table.append(n, m, mode.name, config.reps, mean, err)
    return table


def _soundness(config: ExperimentConfig) -> Table:
    """Cross-mode and end-to-end consistency counts (all zero when sound)."""
    table = Table((
        "code", "d", "rounds", "p", "trials", "uneven_clusters", "uncovered_defects",
        "mode_mismatches", "bad_corrections",
    ))
    for d in config.distances:
        lattice = config.lattice(d)
        for p in config.p:
            uneven = uncovered = mismatched = bad = 0
            for _, _, syndrome in _syndromes(config, lattice, p):
                states = [_validated(lattice, syndrome, mode) for mode in ALL_MODES]
                ref = states[0].erasure()
                if any(
                    not (np.array_equal(s.erasure().edges, ref.edges)
                         and np.array_equal(s.erasure().vertices, ref.vertices))
                    for s in states[1:]
                ):
                    mismatched += 1
                if any(
                    np.any((s.parity[r] == 1) & (s.confined[r] == 0))
                    for s in states for r in [s.cluster_roots()]
                ):
                    uneven += 1
                if np.any(syndrome & ~states[0].occupied.astype(bool)):
                    uncovered += 1
                correction = peel(lattice, spanning_forest(lattice, ref), syndrome)
                if not np.array_equal(syndrome_of_edges(lattice, correction_mask(lattice, correction)), syndrome):
                    bad += 1
            table.append(config.code, d, lattice.rounds, p, config.trials,
                         uneven, uncovered, mismatched, bad)
    return table


def _oracle_dsu(rng, instances: int) -> int:
    bad = 0
    for _ in range(instances):
        n = int(rng.integers(2, 65))
        pairs = rng.integers(0, n, size=(int(rng.integers(0, 2 * n)), 2))
        truth = oracles.components(n, pairs)
        same = truth[:, None] == truth[None, :]
        for mode in ALL_MODES:
            forest = DisjointSetForest(n, mode)
            for a, b in pairs:
                forest.union(int(a), int(b))
            roots = np.array([forest.find(x) for x in range(n)])
            if not np.array_equal(roots[:, None] == roots[None, :], same):
                bad += 1
                break
    return bad


def _oracle_peel(rng, instances: int) -> int:
    bad = 0
    for _ in range(instances):
        n_edges = int(rng.integers(1, 13))
        graph, edges = oracles.random_tree(rng, n_edges, int(rng.integers(0, 3)))
        syndrome = (rng.random(graph.vertex_count) < 0.4) & ~graph.boundary
        if not graph.boundary.any() and syndrome.sum() % 2:
            syndrome[np.flatnonzero(~graph.boundary)[0]] ^= True
        forest = spanning_forest(graph, _FullErasure(edges, np.arange(graph.vertex_count)))
        solutions = oracles.peel_solutions(graph, edges, syndrome)
        got = frozenset(int(e) for e in peel(graph, forest, syndrome))
        if got not in solutions or (graph.boundary.sum() <= 1 and len(solutions) != 1):
            bad += 1
    return bad


@dataclass(frozen=True)
class _FullErasure:
    edges: np.ndarray
    vertices: np.ndarray


def _random_defect_graph(rng, lattice: Lattice, k: int):
    checks = np.flatnonzero(lattice.checks)
    syndrome = np.zeros(lattice.vertex_count, dtype=bool)
    syndrome[rng.choice(checks, size=k, replace=False)] = True
    return defect_graph(lattice, syndrome)


def _oracle_exact(rng, instances: int) -> int:
    toric = build_lattice(LatticeSpec(TORIC, 7))
    planar = build_lattice(LatticeSpec(PLANAR, 7))
    bad = 0
    for i in range(instances):
        lattice = toric if i % 2 == 0 else planar
        k = int(rng.integers(0, 5)) * 2 if lattice.is_toric else int(rng.integers(0, 9))
        graph = _random_defect_graph(rng, lattice, k)
        if mwpm_exact(graph).total_weight != oracles.min_matching_weight(graph.weights, graph.boundary_weights):
            bad += 1
    return bad


def _oracle_local(rng, instances: int) -> tuple[int, int]:
    """Returns (instances below exact, instances equal to exact)."""
    lattice = build_lattice(LatticeSpec(TORIC, 9))
    below = equal = 0
    for _ in range(instances):
        graph = _random_defect_graph(rng, lattice, 8)
        exact = mwpm_exact(graph).total_weight
        local = mwpm_local(graph).total_weight
        below += local < exact
        equal += local == exact
    return below, equal


def _oracle_check(config: ExperimentConfig) -> Table:
    table = Table(("check", "instances", "violations", "agreement"))
    n = config.trials

    def rng(tag: int):
        return np.random.default_rng(np.random.SeedSequence([config.seed, tag]))

    for tag, (name, fn) in enumerate((
        ("dsu-components", _oracle_dsu), ("peel-subsets", _oracle_peel), ("exact-matching", _oracle_exact),
    )):
        bad = fn(rng(tag), n)
        table.append(name, n, bad, (n - bad) / n)
    below, equal = _oracle_local(rng(3), n)
    table.append("local-matching", n, below, equal / n)
    return table


def run_experiment(config: ExperimentConfig, keep_records: bool = False) -> ExperimentResult:
    """Run ``config`` and aggregate its table (plus fits for cluster statistics)."""
    if config.kind == "dsu-bench":
        return ExperimentResult(_dsu_bench(config))
    if config.kind == "soundness":
        return ExperimentResult(_soundness(config))
    if config.kind == "oracle-check":
        return ExperimentResult(_oracle_check(config))
    records = []

    def stream():
        for rec in iter_trials(config):
            if keep_records:
                records.append(rec)
            yield rec

    tallies = _tally(stream())
    fits = None
    if config.kind == "access-count":
        table = _access_table(config, tallies)
    elif config.kind == "cluster-stats":
        table, fits = _cluster_tables(config, tallies)
    elif config.kind == "threshold":
        table = _rate_table("d", tallies, "failures")
    else:
        table = _rate_table("L", tallies, "percolated")
    return ExperimentResult(table, fits, records)
