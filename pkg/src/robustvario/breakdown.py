"""Closed-form finite-sample explosion breakdown points for directional
variogram estimators on a one-row grid (n_y = 1), plus an empirical checker
that plants worst-case contamination and watches the estimates explode.

Both contamination scenarios are covered: a single contiguous outlier block,
and isolated outliers.  All values are exact rationals.  Conventions, with
n_x the series length, h_max the lag depth, m the dependence range and
p = h_max + 1 (org vectors) or h_max (difference vectors):

* modified estimators use n* = floor((n_x - h_max - 1)/(h_max + 1 + m)) + 1
  non-overlapping vectors; ell* = n* - floor((n* + p + 1)/2) + 1 of them must
  be disturbed, and a block needs l_ell = 1 + (ell-2)(m + h_max + 1) + m + 1
  cells to disturb ell > 1 of them (a single vector needs one cell);
* the plain estimators use n* = n_x - h_max overlapping vectors; a block of
  l cells disturbs up to h_max + l of them, an isolated outlier up to
  h_max + 1;
* the Genton estimator at lag h inherits the Qn breakdown
  floor((n*+1)/2)/n* over its n* = n_x - h differences.

For the plain MCD estimators the isolated-scenario value is only a lower
bound; the empirical check is one-sided there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EstimatorUnusableError
from .estimators import ModConfig, genton, matheron, mcd_diff, mcd_mod, mcd_org, non_overlapping_count
from .grid import Direction, Grid, build_lag_set
from .mcd import McdConfig
from .numerics import RngStream

__all__ = ["BreakdownQuery", "breakdown_point", "empirical_breakdown_check"]

_ESTIMATORS = ("mcd_org", "mcd_diff", "mcd_org_mod", "mcd_diff_mod", "genton")


@dataclass(frozen=True)
class BreakdownQuery:
    scenario: str  # "block" or "isolated"
    estimator: str
    n_x: int
    h_max: int
    m: int = 0

    def __post_init__(self):
        if self.scenario not in ("block", "isolated"):
            raise ValueError(f"scenario must be 'block' or 'isolated', got {self.scenario!r}")
        if self.estimator not in _ESTIMATORS:
            raise ValueError(f"estimator must be one of {_ESTIMATORS}, got {self.estimator!r}")
        if self.h_max < 1 or self.n_x <= self.h_max:
            raise ValueError(f"need n_x > h_max >= 1, got n_x={self.n_x}, h_max={self.h_max}")
        if self.m < 0:
            raise ValueError(f"dependence range must be >= 0, got {self.m}")

    @property
    def p(self) -> int:
        return self.h_max + 1 if "org" in self.estimator else self.h_max


def _ell_star(n_star: int, p: int) -> int:
    """Minimal number of disturbed vectors that breaks the maximal-breakdown
    MCD with k = floor((n+p+1)/2) on n_star vectors."""
    return n_star - (n_star + p + 1) // 2 + 1


def _mod_block_length(ell: int, h_max: int, m: int) -> int:
    """Minimal block length disturbing ell vectors at stride h_max + 1 + m."""
    if ell <= 1:
        return 1
    return 1 + (ell - 2) * (m + h_max + 1) + m + 1


def breakdown_point(q: BreakdownQuery) -> Fraction:
    """Exact explosion breakdown fraction for the query."""
    if q.estimator == "genton":
        if q.scenario != "block":
            raise ValueError("no closed form for Genton under isolated contamination")
        n_star = q.n_x - q.h_max
        need = (n_star + 1) // 2  # ceil(eps_Qn * n*) with eps_Qn = floor((n*+1)/2)/n*
        l_min = max(Fraction(need - q.h_max), Fraction(need, 2))
        return l_min / q.n_x

    if q.estimator.endswith("_mod"):
        n_star = non_overlapping_count(q.n_x, q.h_max, q.m)
        if n_star <= q.p:
            raise EstimatorUnusableError(
                f"only {n_star} non-overlapping vectors for dimension {q.p}; "
                "the modified estimator cannot be used"
            )
        ell = _ell_star(n_star, q.p)
        if q.scenario == "block":
            return Fraction(_mod_block_length(ell, q.h_max, q.m), q.n_x)
        return Fraction(ell, q.n_x)

    n_star = q.n_x - q.h_max
    ell = _ell_star(n_star, q.p)
    if q.scenario == "block":
        return Fraction(max(ell - q.h_max, 1), q.n_x)
    return Fraction(ell, (q.h_max + 1) * q.n_x)


def _critical_count(q: BreakdownQuery) -> int:
    """Number of contaminated cells at the breakdown point."""
    if q.scenario == "block":
        if q.estimator == "genton":
            n_star = q.n_x - q.h_max
            need = (n_star + 1) // 2
            return max(need - q.h_max, math.ceil(need / 2))
        if q.estimator.endswith("_mod"):
            n_star = non_overlapping_count(q.n_x, q.h_max, q.m)
            if n_star <= q.p:
                raise EstimatorUnusableError("modified estimator not usable here")
            return _mod_block_length(_ell_star(n_star, q.p), q.h_max, q.m)
        return max(_ell_star(q.n_x - q.h_max, q.p) - q.h_max, 1)
    if q.estimator.endswith("_mod"):
        n_star = non_overlapping_count(q.n_x, q.h_max, q.m)
        if n_star <= q.p:
            raise EstimatorUnusableError("modified estimator not usable here")
        return _ell_star(n_star, q.p)
    return math.ceil(_ell_star(q.n_x - q.h_max, q.p) / (q.h_max + 1))


def _outlier_values(q: BreakdownQuery, count: int, magnitude: float) -> np.ndarray:
    """Planted values: magnitude-scaled, pairwise distinct, with the sign
    pattern that prevents cancellation for the difference-based targets."""
    i = np.arange(1, count + 1, dtype=float)
    scales = magnitude * (1.0 + i / 8.0)
    if q.estimator == "genton":
        signs = np.where(((i - 1) // q.h_max) % 2 == 0, 1.0, -1.0)
    elif "diff" in q.estimator:
        signs = np.where(i % 2 == 0, 1.0, -1.0)
    else:
        signs = np.ones_like(i)
    return signs * scales


def _run_estimator(q: BreakdownQuery, g: Grid, rng: RngStream) -> np.ndarray:
    lags = build_lag_set(Direction.EW, q.h_max)
    if q.estimator == "genton":
        return genton(g, lags).values
    cfg = McdConfig()
    if q.estimator == "mcd_org":
        return mcd_org(g, lags, cfg, reweight=False, rng=rng).values
    if q.estimator == "mcd_diff":
        return mcd_diff(g, lags, cfg, reweight=False, rng=rng).values
    kind = "org" if "org" in q.estimator else "diff"
    mod = ModConfig(m_x=q.m, m_y=0, average_partitions=False, min_vectors=q.p)
    return mcd_mod(g, lags, kind, mod, cfg, reweight=False, rng=rng).values


def empirical_breakdown_check(
    q: BreakdownQuery,
    magnitude: float = 1e6,
    rng: RngStream = RngStream(0),
    size_offset: int = 0,
) -> bool:
    """Plant contamination of the formula's critical size (plus
    ``size_offset``) at the worst position and report whether any lag
    estimate exceeds magnitude^2 / 100.

    Blocks are scanned exhaustively over all start positions; isolated
    outliers go to the deterministic worst-case placement (one per
    non-overlapping vector for the modified estimators, spaced h_max + 1
    apart for the plain ones).  For the modified estimators the bound is
    exact: one outlier below the critical size must not break anything.
    """
    count = _critical_count(q) + size_offset
    gen = rng.generator()
    clean = gen.standard_normal(q.n_x)
    threshold = magnitude**2 / 100.0
    if count <= 0:
        values = _run_estimator(q, Grid(clean.reshape(1, -1)), rng.child(1))
        return bool(np.any(values > threshold))

    outliers = _outlier_values(q, count, magnitude)
    if q.scenario == "block":
        for pos, start in enumerate(range(q.n_x - count + 1)):
            values = clean.copy()
            values[start:start + count] = outliers
            est = _run_estimator(q, Grid(values.reshape(1, -1)), rng.child(pos + 1))
            if np.any(est > threshold):
                return True
        return False

    if q.estimator.endswith("_mod"):
        stride = q.h_max + 1 + q.m
        positions = [j * stride for j in range(count)]
    else:
        positions = [q.h_max + j * (q.h_max + 1) for j in range(count)]
    if positions and positions[-1] >= q.n_x:
        raise ValueError(f"cannot place {count} worst-case outliers on n_x={q.n_x}")
    values = clean.copy()
    values[positions] = outliers
    est = _run_estimator(q, Grid(values.reshape(1, -1)), rng.child(1))
    return bool(np.any(est > threshold))
