"""Logical failure detection, binomial intervals and curve fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .lattice import Lattice, logical_axes, logical_cut
from .noise import syndrome_of_edges


class PipelineError(RuntimeError):
    """A correction left a nonzero syndrome."""


def _edge_mask(lattice: Lattice, edges) -> np.ndarray:
    edges = np.asarray(edges)
    if edges.dtype == bool:
        return edges.copy()
    return (np.bincount(edges.astype(np.int64), minlength=lattice.edge_count) & 1).astype(bool)


def residual(lattice: Lattice, errors, correction) -> np.ndarray:
    """Edge mask of ``errors`` xor ``correction`` (masks or id lists)."""
    return _edge_mask(lattice, errors) ^ _edge_mask(lattice, correction)


def logical_failure(lattice: Lattice, errors, correction) -> bool:
    """Whether the residual error crosses some logical cut an odd number of times.

    ``errors`` is the per-edge error mask (timelike entries included in 3D);
    only spacelike edges matter for the logical class. Raises
    :class:`PipelineError` when the residual has a syndrome.
    """
    res = residual(lattice, errors, correction)
    if syndrome_of_edges(lattice, res).any():
        raise PipelineError("correction does not reproduce the syndrome")
    return any(res[logical_cut(lattice, axis)].sum() % 2 for axis in logical_axes(lattice))


@dataclass(frozen=True)
class WilsonInterval:
    estimate: float
    lower: float
    upper: float
    z: float


def wilson_interval(successes: int, trials: int, z: float = 2.0) -> WilsonInterval:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    lower = max(0.0, centre - half)
    upper = min(1.0, centre + half)
    # guard rounding at the extremes
    if successes == 0:
        lower = 0.0
    if successes == trials:
        upper = 1.0
    return WilsonInterval(phat, lower, upper, z)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit. Hyperbolic fits set ``A``/``B``; linear fits set slope/intercept."""

    r_squared: float
    A: float | None = None
    B: float | None = None
    slope: float | None = None
    intercept: float | None = None
    slope_stderr: float | None = None
    intercept_stderr: float | None = None


def _r_squared(y, fitted) -> float:
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def fit_linear(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < 2:
        raise ValueError("linear fit needs at least two distinct x values")
    res = sps.linregress(x, y)
    fitted = res.intercept + res.slope * x
    return FitResult(
        r_squared=_r_squared(y, fitted),
        slope=float(res.slope),
        intercept=float(res.intercept),
        slope_stderr=float(res.stderr),
        intercept_stderr=float(res.intercept_stderr),
    )


def fit_hyperbolic(d, y) -> FitResult:
    """Fit ``y = A - B / d``."""
    d = np.asarray(d, dtype=float)
    if len(np.unique(d)) < 3:
        raise ValueError("hyperbolic fit needs at least three distinct d values")
    line = fit_linear(1.0 / d, y)
    return FitResult(r_squared=line.r_squared, A=line.intercept, B=-line.slope)


def crossing_point(p, rate_small, rate_large) -> float | None:
    """Where the larger code's curve crosses the smaller's, by linear interpolation.

    Uses the first upward sign change of ``rate_large - rate_small`` in
    ``p``; ties count only when the difference goes on to turn positive.
    ``None`` if the curves never cross on the grid.
    """
    p = np.asarray(p, dtype=float)
    diff = np.asarray(rate_large, dtype=float) - np.asarray(rate_small, dtype=float)
    for i in range(len(p) - 1):
        if diff[i] <= 0.0 < diff[i + 1]:
            if diff[i] == 0.0 and (i == 0 or diff[i - 1] >= 0.0):
                continue
            return float(p[i] + (p[i + 1] - p[i]) * (-diff[i]) / (diff[i + 1] - diff[i]))
    return None
