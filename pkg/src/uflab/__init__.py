"""Union-find decoding laboratory for surface codes.

The decoder pipeline runs ``sample_errors`` -> ``compute_syndrome`` ->
``validate_syndrome`` -> ``spanning_forest`` -> ``peel``, with every
parent/size table access of the disjoint-set forest counted.
"""

from .decoders import UFResult, decode, decode_uf
from .dsu import ALL_MODES, AccessCounts, DisjointSetForest, DsuMode, bench_random_merges, make_forest
from .experiments import ConfigError, ExperimentConfig, ExperimentResult, TrialRecord, iter_trials, run_experiment
from .growth import ClusterStats, Erasure, GrowthState, cluster_statistics, validate_syndrome
from .lattice import (
    BOUNDARY, PLANAR, TORIC, Graph, Lattice, LatticeSpec, build_lattice, logical_cut, shortest_distance,
)
from .matcher import DefectGraph, Matching, MatchingError, decode_mwpm, defect_graph, mwpm, mwpm_exact, mwpm_local
from .noise import ErrorSample, NoiseParams, compute_syndrome, sample_errors, trial_rng
from .peeler import PeelingError, SpanningForest, peel, spanning_forest
from .percolation import bond_percolation_trial, erasure_percolates, mwpm_ball_erasure
from .stats import (
    FitResult, PipelineError, WilsonInterval, crossing_point, fit_hyperbolic, fit_linear,
    logical_failure, wilson_interval,
)
from .tables import SchemaError, Table

__version__ = "0.1.0"
