"""Raw and reweighted Minimum Covariance Determinant estimation.

The raw MCD of p-dimensional rows x_1..x_n with subset size k is the mean
and (consistency-scaled) sample covariance of the k rows whose covariance
determinant is minimal.  ``exact_mcd`` enumerates all C(n, k) subsets and is
the small-sample oracle; ``fast_mcd`` runs the usual randomized concentration
search: many (p+1)-row seeds, two C-steps each, then full C-step iteration of
the best few candidates.  A C-step re-ranks all rows by squared Mahalanobis
distance under the current fit, keeps the k closest and refits; the
determinant never increases.

Reweighting keeps rows whose squared robust distance is below a chi-square
cutoff and refits with its own consistency factor.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SampleTooSmallError, SingularDataError
from .numerics import RngStream, chisq_cdf, chisq_quantile, mahalanobis_sq_many

__all__ = [
    "McdConfig",
    "McdFit",
    "mcd_consistency_factor",
    "exact_mcd",
    "fast_mcd",
    "reweight_mcd",
]

_EXACT_MAX_N = 25
_EXACT_MAX_SUBSETS = 10_000_000
_LOGDET_SLACK = 1e-7  # fp tolerance for the C-step monotonicity assertion


@dataclass(frozen=True)
class McdConfig:
    """Tuning constants for the MCD search.

    ``k`` defaults to floor((n+p+1)/2), the maximal-breakdown choice; setting
    ``alpha`` instead derives k = floor(alpha*n), clamped to the admissible
    range floor((n+p+1)/2) <= k <= n.
    """

    k: int | None = None
    alpha: float | None = None
    n_initial_subsets: int = 500
    n_best_kept: int = 10
    max_csteps: int = 100
    cstep_tol: float = 1e-12
    apply_consistency: bool = True
    reweight_delta: float = 0.975
    exhaustive_seeds: bool = False

    def __post_init__(self):
        if not self.exhaustive_seeds and self.n_best_kept > self.n_initial_subsets:
            raise ValueError("n_best_kept cannot exceed n_initial_subsets")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.reweight_delta < 1.0:
            raise ValueError(f"reweight_delta must lie in (0, 1), got {self.reweight_delta}")

    def subset_size(self, n: int, p: int) -> int:
        k_min = (n + p + 1) // 2
        if self.k is not None:
            k = self.k
        elif self.alpha is not None:
            k = max(k_min, min(n, int(math.floor(self.alpha * n))))
        else:
            k = k_min
        if not k_min <= k <= n:
            raise ValueError(f"subset size k={k} outside [{k_min}, {n}] for n={n}, p={p}")
        return k


@dataclass
class McdFit:
    """Robust location/scatter fit with its support subset."""

    mu: np.ndarray
    sigma: np.ndarray
    support: tuple[int, ...]
    det: float
    log_det: float
    reweighted: bool = False
    weights: np.ndarray | None = None
    factors_applied: dict = field(default_factory=dict)
    singular: bool = False


def mcd_consistency_factor(alpha: float, p: int) -> float:
    """Fisher-consistency factor alpha / F_{chi2_{p+2}}(chi2_{p, alpha}) for
    Gaussian data; 1 at alpha = 1 and increasing as alpha shrinks."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if p < 1:
        raise ValueError(f"dimension must be >= 1, got {p}")
    if alpha == 1.0:
        return 1.0
    return alpha / chisq_cdf(chisq_quantile(alpha, p), p + 2)


def _rows(data) -> np.ndarray:
    rows = getattr(data, "rows", data)
    rows = np.ascontiguousarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError(f"expected a 2-D sample, got shape {rows.shape}")
    return rows


def _subset_logdet(x_sub: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    mu = x_sub.mean(axis=0)
    dev = x_sub - mu
    sigma = dev.T @ dev / (x_sub.shape[0] - 1)
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0 or not np.isfinite(logdet):
        logdet = -np.inf
    return mu, sigma, float(logdet)


def _finalize(x, k, n, p, cfg, mu, sigma, support, logdet) -> McdFit:
    singular = not np.isfinite(logdet)
    if singular:
        warnings.warn("MCD support subset has singular covariance", RuntimeWarning)
    c = mcd_consistency_factor(k / n, p) if cfg.apply_consistency else 1.0
    return McdFit(
        mu=mu,
        sigma=c * sigma,
        support=tuple(int(i) for i in support),
        det=float(np.exp(logdet)) if not singular else 0.0,
        log_det=float(logdet),
        factors_applied={"c": c},
        singular=singular,
    )


def exact_mcd(data, cfg: McdConfig = McdConfig()) -> McdFit:
    """Globally optimal MCD by exhaustive enumeration of all k-subsets."""
    x = _rows(data)
    n, p = x.shape
    if n <= p:
        raise SampleTooSmallError(f"need n > p, got n={n}, p={p}")
    if n > _EXACT_MAX_N:
        raise ValueError(f"exact enumeration is limited to n <= {_EXACT_MAX_N}, got {n}")
    k = cfg.subset_size(n, p)
    if math.comb(n, k) > _EXACT_MAX_SUBSETS:
        raise ValueError(f"C({n},{k}) subsets exceed the enumeration limit")
    best = None
    saw_singular = False
    for comb in itertools.combinations(range(n), k):
        mu, sigma, logdet = _subset_logdet(x[list(comb)])
        if not np.isfinite(logdet):
            saw_singular = True
        key = (logdet, comb)
        if best is None or key < best[0]:
            best = (key, mu, sigma)
    if saw_singular:
        warnings.warn("at least one k-subset had determinant 0", RuntimeWarning)
    (logdet, comb), mu, sigma = best
    return _finalize(x, k, n, p, cfg, mu, sigma, comb, logdet)


def _batch_fit(x: np.ndarray, supports: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean/covariance/logdet of many row subsets at once; supports is (m, k)."""
    subs = x[supports]
    mus = subs.mean(axis=1)
    dev = subs - mus[:, None, :]
    sigmas = np.einsum("mkp,mkq->mpq", dev, dev) / (supports.shape[1] - 1)
    signs, logdets = np.linalg.slogdet(sigmas)
    logdets = np.where((signs > 0) & np.isfinite(logdets), logdets, -np.inf)
    return mus, sigmas, logdets


def _batch_cstep(
    x: np.ndarray,
    k: int,
    mus: np.ndarray,
    sigmas: np.ndarray,
    logdets: np.ndarray,
    check_monotone: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One C-step for every nonsingular candidate; singular ones pass through
    unchanged (they are terminal).  Returns (supports, mus, sigmas, logdets)
    of the refitted candidates.

    Monotonicity (the determinant never increases) holds once the incoming
    fit is itself a k-subset fit; the first step after a (p+1)-seed is
    exempt.
    """
    m, p = mus.shape
    alive = np.isfinite(logdets)
    safe = sigmas.copy()
    safe[~alive] = np.eye(p)
    delta = x[None, :, :] - mus[:, None, :]
    sol = np.linalg.solve(safe, np.swapaxes(delta, 1, 2))
    d2 = np.einsum("mpn,mpn->mn", np.swapaxes(delta, 1, 2), sol)
    # stable argsort on distances: ties broken by row index, deterministically
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    supports = np.sort(order, axis=1)
    mus2, sigmas2, logdets2 = _batch_fit(x, supports)
    assert not check_monotone or np.all(
        logdets2[alive] <= logdets[alive] + _LOGDET_SLACK * np.maximum(1.0, np.abs(logdets[alive]))
    ), "C-step increased the covariance determinant"
    keep = ~alive
    if keep.any():
        mus2[keep], sigmas2[keep], logdets2[keep] = mus[keep], sigmas[keep], -np.inf
        supports[keep] = -1  # sentinel: support of a terminal candidate is fixed upstream
    return supports, mus2, sigmas2, logdets2


def _sample_subsets(n: int, size: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` sorted index subsets of the given size, drawn uniformly
    without replacement via random sort keys."""
    keys = gen.random((count, n))
    picked = np.argpartition(keys, size - 1, axis=1)[:, :size]
    return np.sort(picked, axis=1)


def _draw_seeds(x: np.ndarray, cfg: McdConfig, gen: np.random.Generator) -> np.ndarray:
    """Seed subsets of size p+1, redrawing singular ones; raises when every
    attempt within the budget is singular."""
    n, p = x.shape
    m = cfg.n_initial_subsets
    seeds = _sample_subsets(n, p + 1, m, gen)
    _, _, logdets = _batch_fit(x, seeds)
    attempts = m
    budget = 100 * m
    bad = np.flatnonzero(~np.isfinite(logdets))
    while bad.size and attempts < budget:
        n_redraw = min(bad.size, budget - attempts)
        redraw = bad[:n_redraw]
        seeds[redraw] = _sample_subsets(n, p + 1, n_redraw, gen)
        attempts += n_redraw
        _, _, sub_logdets = _batch_fit(x, seeds[redraw])
        logdets[redraw] = sub_logdets
        bad = np.flatnonzero(~np.isfinite(logdets))
    if bad.size == m:
        raise SingularDataError("all initial (p+1)-subsets are singular")
    return seeds[np.isfinite(logdets)] if bad.size else seeds


def fast_mcd(data, cfg: McdConfig = McdConfig(), rng: RngStream = RngStream(0)) -> McdFit:
    """Randomized MCD search; deterministic given (data, cfg, rng).

    With ``cfg.exhaustive_seeds`` every (p+1)-subset is used as a seed, which
    on small samples reproduces the exact optimum.
    """
    x = _rows(data)
    n, p = x.shape
    if n <= p:
        raise SampleTooSmallError(f"need n > p, got n={n}, p={p}")
    k = cfg.subset_size(n, p)
    if k == n:
        mu, sigma, logdet = _subset_logdet(x)
        return _finalize(x, k, n, p, cfg, mu, sigma, range(n), logdet)

    if cfg.exhaustive_seeds:
        if math.comb(n, p + 1) > _EXACT_MAX_SUBSETS:
            raise ValueError("too many (p+1)-subsets for exhaustive seeding")
        seeds = np.array(list(itertools.combinations(range(n), p + 1)), dtype=np.intp)
        _, _, logdets = _batch_fit(x, seeds)
        if not np.isfinite(logdets).any():
            raise SingularDataError("all initial (p+1)-subsets are singular")
        seeds = seeds[np.isfinite(logdets)]
    else:
        seeds = _draw_seeds(x, cfg, rng.generator())

    mus, sigmas, logdets = _batch_fit(x, seeds)
    supports = seeds
    for step in range(2):
        new_supports, mus, sigmas, logdets = _batch_cstep(
            x, k, mus, sigmas, logdets, check_monotone=(step > 0)
        )
        fixed = new_supports[:, 0] < 0
        if fixed.any():
            # terminal candidates keep their previous support (same width: a
            # candidate can only be terminal after at least one C-step)
            new_supports[fixed] = supports[fixed]
        supports = new_supports

    kept = _rank_candidates(logdets, supports, max(1, cfg.n_best_kept))
    mus, sigmas, logdets, supports = mus[kept], sigmas[kept], logdets[kept], supports[kept]

    # iterate the survivors to convergence (support fixed point, determinant
    # change below tolerance, singularity, or the step cap)
    active = np.isfinite(logdets)
    for _ in range(cfg.max_csteps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        sup2, mu2, sigma2, ld2 = _batch_cstep(
            x, k, mus[idx], sigmas[idx], logdets[idx]
        )
        unchanged = np.all(sup2 == supports[idx], axis=1)
        converged = unchanged | (
            np.abs(logdets[idx] - ld2) <= cfg.cstep_tol * np.maximum(1.0, np.abs(logdets[idx]))
        ) | ~np.isfinite(ld2)
        mus[idx], sigmas[idx], logdets[idx], supports[idx] = mu2, sigma2, ld2, sup2
        active[idx[converged]] = False

    order = _rank_candidates(logdets, supports, 1)
    i = order[0]
    return _finalize(x, k, n, p, cfg, mus[i], sigmas[i], tuple(supports[i]), logdets[i])


def _rank_candidates(logdets: np.ndarray, supports: np.ndarray, n_keep: int) -> list[int]:
    """Indices of the ``n_keep`` best distinct candidates, ordered by
    (determinant, support lexicographic)."""
    m = len(logdets)
    order = np.argsort(logdets, kind="stable")
    for shortlist in ([order[: 8 * n_keep], order] if m > 8 * n_keep else [order]):
        ranked = sorted(shortlist, key=lambda i: (logdets[i], tuple(supports[i])))
        kept, seen = [], set()
        for i in ranked:
            key = supports[i].tobytes()
            if key in seen:
                continue
            seen.add(key)
            kept.append(int(i))
            if len(kept) == n_keep:
                return kept
        if len(shortlist) == m:  # duplicates exhausted the shortlist; full pass done
            return kept
    return kept


def reweight_mcd(data, raw: McdFit, cfg: McdConfig = McdConfig()) -> McdFit:
    """One-pass hard-rejection reweighting of a raw MCD fit.

    Rows with squared robust distance above chi2_{p, delta} get weight 0; the
    scatter is the weighted sample covariance (divisor sum(w) - 1, the
    classical convention) times the consistency factor with alpha replaced
    by delta.
    """
    x = _rows(data)
    n, p = x.shape
    d2 = mahalanobis_sq_many(x, raw.mu, raw.sigma)  # raises if raw.sigma not PD
    cutoff = chisq_quantile(cfg.reweight_delta, p)
    w = d2 <= cutoff
    n_kept = int(w.sum())
    if n_kept == 0:
        raise SingularDataError("reweighting rejected every observation")
    if n_kept < 2:
        raise SingularDataError("reweighting kept a single observation")
    mu = x[w].mean(axis=0)
    dev = x[w] - mu
    sigma = dev.T @ dev / (n_kept - 1)
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0 or not np.isfinite(logdet):
        logdet = -np.inf
    c_star = mcd_consistency_factor(cfg.reweight_delta, p) if cfg.apply_consistency else 1.0
    return McdFit(
        mu=mu,
        sigma=c_star * sigma,
        support=raw.support,
        det=float(np.exp(logdet)) if np.isfinite(logdet) else 0.0,
        log_det=float(logdet),
        reweighted=True,
        weights=w.astype(np.int8),
        factors_applied={**raw.factors_applied, "c_star": c_star},
        singular=not np.isfinite(logdet),
    )
