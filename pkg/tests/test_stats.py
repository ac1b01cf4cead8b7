import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from uflab import LatticeSpec, build_lattice
from uflab.lattice import PLANAR, TORIC
from uflab.matcher import decode_mwpm
from uflab.noise import NoiseParams, compute_syndrome, sample_errors
from uflab.stats import (
    PipelineError, crossing_point, fit_hyperbolic, fit_linear, logical_failure, wilson_interval,
)


def plaquette_matrix(lattice) -> np.ndarray:
    L = lattice.distance
    rows = []
    for y in range(L):
        for x in range(L):
            a, b = lattice.vertex_id(x, y), lattice.vertex_id((x + 1) % L, y)
            c, d = lattice.vertex_id((x + 1) % L, (y + 1) % L), lattice.vertex_id(x, (y + 1) % L)
            row = np.zeros(lattice.edge_count, dtype=np.uint8)
            for u, v in ((a, b), (b, c), (c, d), (d, a)):
                row[lattice.edge_between(u, v)] ^= 1
            rows.append(row)
    return np.array(rows)


def gf2_rank(m: np.ndarray) -> int:
    m = m.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = np.flatnonzero(m[rank:, col])
        if not len(pivot):
            continue
        p = rank + pivot[0]
        m[[rank, p]] = m[[p, rank]]
        others = np.flatnonzero(m[:, col])
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


def homologically_nontrivial(lattice, cycle_mask) -> bool:
    """A cycle is a logical error iff it is not a sum of plaquettes."""
    plaq = plaquette_matrix(lattice)
    return gf2_rank(np.vstack([plaq, cycle_mask.astype(np.uint8)])) > gf2_rank(plaq)


def _loop(lattice, y=0):
    L = lattice.distance
    m = np.zeros(lattice.edge_count, dtype=bool)
    for x in range(L):
        m[lattice.edge_between(lattice.vertex_id(x, y), lattice.vertex_id((x + 1) % L, y))] = True
    return m


def test_failure_examples(lattices):
    lat = lattices(TORIC, 5)
    errors = np.zeros(lat.edge_count, bool)
    errors[[3, 11]] = True
    assert not logical_failure(lat, errors, errors)
    assert not logical_failure(lat, errors, np.array([3, 11]))
    single = np.zeros(lat.edge_count, bool)
    single[7] = True
    assert not logical_failure(lat, single, [7])
    assert logical_failure(lat, _loop(lat), [])
    # two parallel loops cancel
    assert not logical_failure(lat, _loop(lat) ^ _loop(lat, 2), [])


def test_planar_spanning_chain_fails(lattices):
    lat = lattices(PLANAR, 5)
    row = [lat.vertex_id(x, 1) for x in range(lat.width)]
    chain = [lat.edge_between(u, v) for u, v in zip(row, row[1:])]
    assert logical_failure(lat, np.zeros(lat.edge_count, bool), chain)
    # a detour that returns to the same boundary is harmless
    a, b, c, d = (lat.vertex_id(x, y) for x, y in [(0, 1), (1, 1), (1, 2), (0, 2)])
    detour = [lat.edge_between(a, b), lat.edge_between(b, c), lat.edge_between(c, d)]
    assert not logical_failure(lat, np.zeros(lat.edge_count, bool), detour)


def test_spacetime_loop_is_trivial(lattices):
    lat = lattices(TORIC, 4, 4)
    vs = [lat.vertex_id(x, 1, t) for x, t in [(3, 0), (0, 0), (0, 1), (3, 1)]]
    loop = [lat.edge_between(u, v) for u, v in zip(vs, vs[1:] + vs[:1])]
    # the loop crosses the horizontal cut twice, once per round
    assert not logical_failure(lat, np.zeros(lat.edge_count, bool), loop)
    spatial = np.zeros(lat.edge_count, bool)
    for x in range(4):
        spatial[lat.edge_between(lat.vertex_id(x, 2, 1), lat.vertex_id((x + 1) % 4, 2, 1))] = True
    assert logical_failure(lat, spatial, [])


def test_nonzero_residual_raises(lattices):
    lat = lattices(TORIC, 5)
    with pytest.raises(PipelineError):
        logical_failure(lat, np.zeros(lat.edge_count, bool), [0])


@pytest.mark.parametrize("L", [3, 4, 5])
def test_failure_matches_gf2_homology(L):
    lat = build_lattice(LatticeSpec(TORIC, L))
    hits = 0
    for seed in range(150):
        sample = sample_errors(lat, NoiseParams(0.15), seed)
        errors = sample.edge_bits(lat)
        corr = decode_mwpm(lat, compute_syndrome(lat, sample))
        mask = errors.copy()
        mask[corr] ^= True
        expect = homologically_nontrivial(lat, mask)
        hits += expect
        assert logical_failure(lat, errors, corr) == expect
    assert hits > 0


def test_wilson_zero_successes():
    w = wilson_interval(0, 100, 2.0)
    assert w.lower == 0.0 and w.estimate == 0.0
    assert w.upper == pytest.approx(4 / 104, abs=1e-12)


def test_wilson_symmetry():
    w = wilson_interval(50, 100)
    assert w.lower + w.upper == pytest.approx(1.0)
    for s in (0, 3, 17, 64):
        a, b = wilson_interval(s, 64), wilson_interval(64 - s, 64)
        assert a.lower == pytest.approx(1 - b.upper) and a.upper == pytest.approx(1 - b.lower)


def test_wilson_rejects():
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


@given(st.integers(1, 5000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))),
       st.sampled_from([1.0, 1.96, 2.0, 3.0]))
def test_wilson_against_statsmodels(sn, z):
    s, n = sn
    w = wilson_interval(s, n, z)
    lo, hi = proportion_confint(s, n, alpha=2 * (1 - __import__("scipy").stats.norm.cdf(z)), method="wilson")
    assert w.lower == pytest.approx(lo, abs=1e-9) and w.upper == pytest.approx(hi, abs=1e-9)
    assert 0.0 <= w.lower <= w.estimate <= w.upper <= 1.0


def test_hyperbolic_exact():
    d = np.array([5, 9, 13, 25])
    f = fit_hyperbolic(d, 3 - 2 / d)
    assert f.A == pytest.approx(3) and f.B == pytest.approx(2) and f.r_squared == pytest.approx(1)
    f = fit_hyperbolic(d, np.full(4, 1.5))
    assert f.A == pytest.approx(1.5) and f.B == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_hyperbolic([5, 5, 9], [1, 2, 3])


def test_linear_exact():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    f = fit_linear(x, 5 * x)
    assert f.slope == pytest.approx(5) and f.intercept == pytest.approx(0, abs=1e-12)
    assert f.r_squared == pytest.approx(1)
    with pytest.raises(ValueError):
        fit_linear([2, 2], [1, 3])


@given(st.lists(st.floats(-100, 100), min_size=4, max_size=12))
def test_r_squared_in_unit_interval(ys):
    x = np.arange(len(ys), dtype=float)
    assert 0.0 <= fit_linear(x, ys).r_squared <= 1.0


def test_crossing_point():
    p = [0.08, 0.09, 0.10, 0.11]
    assert crossing_point(p, [0.1, 0.2, 0.3, 0.4], [0.05, 0.15, 0.35, 0.5]) == pytest.approx(0.095)
    assert crossing_point(p, [0.1, 0.2, 0.3, 0.4], [0.0, 0.1, 0.2, 0.3]) is None
    # a touch at a grid point followed by divergence counts at that point
    assert crossing_point(p, [0.1, 0.2, 0.3, 0.4], [0.05, 0.2, 0.4, 0.5]) == pytest.approx(0.09)
    # a tie on the first point is not evidence of a crossing
    assert crossing_point(p[:2], [0.1, 0.2], [0.1, 0.3]) is None
