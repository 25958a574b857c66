"""Directional variogram estimators.

All estimators return the variogram 2*gammahat per lag (halve for the
semivariogram).  Matheron averages squared pairwise differences; Genton
squares a Qn scale of the pairwise differences.  The multivariate
estimators fit an MCD scatter to joint lag vectors:

* "diff" uses difference vectors, whose scatter diagonal is the variogram
  directly;
* "org" uses raw-observation vectors, whose scatter is Toeplitz under weak
  stationarity, so the variogram follows from averaged diagonals via
  2*gamma(h_l) = 2*(a_0 - a_l).

The modified (".mod") variants fit only non-overlapping vectors separated by
the dependence ranges (m_x, m_y) and average the fits over all partition
offsets; they are the theoretically tractable, consistent benchmark, at the
price of reduced robustness.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NoValidPartitionError
from .grid import (
    Direction,
    Grid,
    LagSet,
    VectorSample,
    extract_diff_vectors,
    extract_org_vectors,
    lag_differences,
)
from .mcd import McdConfig, fast_mcd, reweight_mcd
from .numerics import RngStream
from .scale import QnConfig, qn

__all__ = [
    "VariogramEstimate",
    "ModConfig",
    "ESTIMATOR_IDS",
    "parse_estimator_id",
    "matheron",
    "genton",
    "mcd_diff",
    "mcd_org",
    "mcd_mod",
    "org_scatter_to_variogram",
    "apply_correction",
    "non_overlapping_count",
]

ESTIMATOR_IDS = (
    "matheron",
    "genton",
    "mcd.org",
    "mcd.org.re",
    "mcd.diff",
    "mcd.diff.re",
    "mcd.org.mod",
    "mcd.org.mod.re",
    "mcd.diff.mod",
    "mcd.diff.mod.re",
)


@dataclass(frozen=True)
class EstimatorKind:
    family: str  # matheron | genton | org | diff
    mod: bool = False
    reweight: bool = False


def parse_estimator_id(estimator_id: str) -> EstimatorKind:
    eid = estimator_id.strip().lower()
    if eid not in ESTIMATOR_IDS:
        raise ValueError(f"unknown estimator id {estimator_id!r}; known: {ESTIMATOR_IDS}")
    if eid in ("matheron", "genton"):
        return EstimatorKind(eid)
    parts = eid.split(".")
    return EstimatorKind(family=parts[1], mod="mod" in parts, reweight="re" in parts)


@dataclass
class VariogramEstimate:
    """Per-lag 2*gammahat values with bookkeeping."""

    estimator_id: str
    direction: Direction
    lags: LagSet
    values: np.ndarray
    counts: np.ndarray
    correction_applied: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.counts = np.asarray(self.counts, dtype=int)
        if self.values.shape != (self.lags.h_max,) or self.counts.shape != (self.lags.h_max,):
            raise ValueError("values/counts must have one entry per lag")

    def semivariogram(self) -> np.ndarray:
        return 0.5 * self.values


def apply_correction(est: VariogramEstimate, c_opt: float) -> VariogramEstimate:
    """Multiply the estimate by a simulated finite-sample correction factor."""
    return replace(est, values=c_opt * est.values, correction_applied=c_opt)


@dataclass(frozen=True)
class ModConfig:
    """Partitioning for the modified estimators.

    ``m_x``/``m_y`` are the dependence ranges along x and y.  Vectors within a
    chain are separated by the in-direction range; chains are thinned by the
    cross-direction range.  A partition is used only if it keeps more than
    ``min_vectors`` vectors (default 2*h_max, guarding MCD singularity).
    """

    m_x: int
    m_y: int
    average_partitions: bool = True
    min_vectors: int | None = None

    def __post_init__(self):
        if self.m_x < 0 or self.m_y < 0:
            raise ValueError("dependence ranges must be >= 0")


def matheron(g: Grid, lags: LagSet) -> VariogramEstimate:
    """Mean of squared differences over all pairs at each exact lag."""
    values, counts = [], []
    for lag in lags.lag_vectors:
        diffs = lag_differences(g, lag)
        values.append(float(np.mean(diffs**2)))
        counts.append(diffs.size)
    return VariogramEstimate("matheron", lags.direction, lags, values, counts)


def genton(g: Grid, lags: LagSet, cfg: QnConfig = QnConfig()) -> VariogramEstimate:
    """Squared Qn scale of the difference set at each exact lag."""
    values, counts = [], []
    for lag in lags.lag_vectors:
        diffs = lag_differences(g, lag)
        values.append(qn(diffs, cfg) ** 2)
        counts.append(diffs.size)
    return VariogramEstimate("genton", lags.direction, lags, values, counts)


def _mcd_fit(sample: VectorSample, mcdcfg: McdConfig, reweight: bool, rng: RngStream):
    fit = fast_mcd(sample, mcdcfg, rng)
    if reweight:
        fit = reweight_mcd(sample, fit, mcdcfg)
    return fit


def mcd_diff(
    g: Grid,
    lags: LagSet,
    mcdcfg: McdConfig = McdConfig(),
    reweight: bool = False,
    rng: RngStream = RngStream(0),
) -> VariogramEstimate:
    """MCD scatter of difference vectors; its diagonal is 2*gammahat."""
    sample = extract_diff_vectors(g, lags)
    fit = _mcd_fit(sample, mcdcfg, reweight, rng)
    eid = "mcd.diff.re" if reweight else "mcd.diff"
    counts = np.full(lags.h_max, sample.n)
    return VariogramEstimate(eid, lags.direction, lags, np.diag(fit.sigma).copy(), counts)


def org_scatter_to_variogram(sigma: np.ndarray) -> np.ndarray:
    """Variogram (2*gammahat per lag) from a (h_max+1)-dim scatter of raw
    observation vectors: average the main and each minor diagonal of the
    Toeplitz-structured matrix, then 2*gamma(h_l) = 2*(a_0 - a_l)."""
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    a0 = float(np.mean(np.diag(sigma)))
    return np.array([2.0 * (a0 - float(np.mean(np.diag(sigma, l)))) for l in range(1, p)])


def mcd_org(
    g: Grid,
    lags: LagSet,
    mcdcfg: McdConfig = McdConfig(),
    reweight: bool = False,
    rng: RngStream = RngStream(0),
    drop_largest_lag: bool = False,
) -> VariogramEstimate:
    """MCD scatter of raw-observation vectors, reduced via the Toeplitz
    averaging.  ``drop_largest_lag`` trims the last lag from the report (the
    org construction is known to underestimate there when h_max is inside
    the variogram range); the fit itself always uses all h_max + 1
    components."""
    sample = extract_org_vectors(g, lags)
    fit = _mcd_fit(sample, mcdcfg, reweight, rng)
    values = org_scatter_to_variogram(fit.sigma)
    eid = "mcd.org.re" if reweight else "mcd.org"
    out_lags = lags
    if drop_largest_lag:
        if lags.h_max < 2:
            raise ValueError("cannot drop the only lag")
        out_lags = LagSet(lags.direction, lags.h_max - 1)
        values = values[:-1]
    counts = np.full(out_lags.h_max, sample.n)
    return VariogramEstimate(eid, lags.direction, out_lags, values, counts)


def non_overlapping_count(n_x: int, h_max: int, m: int) -> int:
    """Vectors per chain of length n_x at stride h_max + 1 + m, offset 0."""
    if n_x < h_max + 1:
        return 0
    return (n_x - h_max - 1) // (h_max + 1 + m) + 1


def _direction_chains(g: Grid, direction: Direction) -> list[list[tuple[int, int]]]:
    """Maximal cell chains along the direction generator, as 0-based
    (row, col) index lists, ordered by their starting cell in scan order."""
    gx, gy = direction.generator
    chains = []
    for y in range(1, g.ny + 1):
        for x in range(1, g.nx + 1):
            px, py = x - gx, y - gy
            if 1 <= px <= g.nx and 1 <= py <= g.ny:
                continue  # not a chain start
            chain = []
            cx, cy = x, y
            while 1 <= cx <= g.nx and 1 <= cy <= g.ny:
                chain.append((cy - 1, cx - 1))
                cx, cy = cx + gx, cy + gy
            chains.append(chain)
    return chains


def _mod_ranges(direction: Direction, mod: ModConfig) -> tuple[int, int]:
    """(in-chain, cross-chain) dependence ranges for the direction."""
    if direction is Direction.EW:
        return mod.m_x, mod.m_y
    if direction is Direction.SN:
        return mod.m_y, mod.m_x
    m = max(mod.m_x, mod.m_y)  # diagonal chains mix both axes
    return m, m


def mcd_mod(
    g: Grid,
    lags: LagSet,
    kind: str,
    mod: ModConfig,
    mcdcfg: McdConfig = McdConfig(),
    reweight: bool = False,
    rng: RngStream = RngStream(0),
) -> VariogramEstimate:
    """Averaged modified MCD estimator over non-overlapping vector partitions.

    A partition is one choice of (chain offset, in-chain start offset); its
    vectors are mutually independent under (m_x, m_y)-dependence.  Each
    qualifying partition is fitted separately and the per-lag estimates are
    averaged with equal weights.  With ``average_partitions`` off only the
    first (zero-offset, maximal) partition is used, which is the construction
    behind the closed-form breakdown values.
    """
    if kind not in ("org", "diff"):
        raise ValueError(f"kind must be 'org' or 'diff', got {kind!r}")
    h_max = lags.h_max
    p = h_max + 1 if kind == "org" else h_max
    m_par, m_perp = _mod_ranges(lags.direction, mod)
    stride = h_max + 1 + m_par
    min_vectors = 2 * h_max if mod.min_vectors is None else mod.min_vectors
    threshold = max(min_vectors, p)  # MCD additionally needs n > p

    chains = _direction_chains(g, lags.direction)
    per_partition = []
    partition_index = 0
    for c_off in range(m_perp + 1):
        used_chains = chains[c_off::m_perp + 1]
        for s_off in range(stride):
            rows = []
            for chain in used_chains:
                for t in range(s_off, len(chain) - h_max, stride):
                    cells = chain[t:t + h_max + 1]
                    if any(g.mask[r, c] for r, c in cells):
                        continue
                    vals = [g.values[r, c] for r, c in cells]
                    if kind == "org":
                        rows.append(vals)
                    else:
                        rows.append([vals[0] - v for v in vals[1:]])
            partition_index += 1
            if len(rows) <= threshold:
                continue
            sample = np.asarray(rows, dtype=float)
            fit = fast_mcd(sample, mcdcfg, rng.child(partition_index))
            if reweight:
                fit = reweight_mcd(sample, fit, mcdcfg)
            if kind == "org":
                values = org_scatter_to_variogram(fit.sigma)
            else:
                values = np.diag(fit.sigma).copy()
            per_partition.append((values, len(rows)))
            if not mod.average_partitions:
                break
        if per_partition and not mod.average_partitions:
            break
    if not per_partition:
        raise NoValidPartitionError(
            f"no partition keeps more than {threshold} vectors "
            f"(h_max={h_max}, m=({mod.m_x},{mod.m_y}), grid {g.nx}x{g.ny})"
        )
    values = np.mean([v for v, _ in per_partition], axis=0)
    total = sum(c for _, c in per_partition)
    eid = f"mcd.{kind}.mod" + (".re" if reweight else "")
    counts = np.full(h_max, total)
    return VariogramEstimate(eid, lags.direction, lags, values, counts)
