"""Minimum singular values over row subsets.

For a subset S of rows, sigma_min(A_S) here means inf over unit x in R^n of
||A_S x||, so any subset with fewer rows than columns scores 0. The
subset-minimum over all subsets of a given size quantifies how much
redundancy survives adversarial row removal; it is exact only by
enumeration, so three modes are offered:

* exact enumeration, capped by a subset budget;
* the leave-one-out special case (subset size m-1, exactly m subproblems);
* random subset sampling, which upper-bounds the true minimum because it
  minimizes over fewer candidates.

Submatrix values are computed from Gram matrices (A_S^T A_S) with symmetric
eigensolves, accurate to ~1e-8 relative for well-scaled inputs; values at or
below that scale should be read as numerically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np
import scipy.linalg

from .errors import BudgetExceededError
from .linalg import as_matrix, extreme_singular_values
from .quantiles import round_half_up

DEFAULT_SUBSET_BUDGET = 1_000_000
_CHUNK = 8192


def _min_eig_batch(grams: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each (n, n) Gram matrix in a (c, n, n) stack."""
    return np.linalg.eigvalsh(grams)[:, 0]


def _sigma_from_eig(value: float) -> float:
    return math.sqrt(max(value, 0.0))


def subset_sigma_min(a: np.ndarray, alpha: float,
                     subset_budget: int = DEFAULT_SUBSET_BUDGET) -> float:
    """Exact minimum of sigma_min(A_S) over all row subsets of size round(alpha*m).

    Returns 0 immediately when the subset size is below n. Raises
    BudgetExceededError when the number of subsets exceeds ``subset_budget``;
    use ``subset_sigma_min_sampled`` in that case.
    """
    a = as_matrix(a)
    m, n = a.shape
    s = min(max(round_half_up(alpha * m), 0), m)
    if s < n:
        return 0.0
    total = math.comb(m, s)
    if total > subset_budget:
        raise BudgetExceededError(total, subset_budget)

    outers = a[:, :, None] * a[:, None, :]  # (m, n, n) per-row Gram contributions
    best = math.inf
    combo_iter = combinations(range(m), s)
    while True:
        chunk = list(islice(combo_iter, _CHUNK))
        if not chunk:
            break
        idx = np.asarray(chunk, dtype=np.intp)
        grams = outers[idx].sum(axis=1)
        best = min(best, float(_min_eig_batch(grams).min()))
    return _sigma_from_eig(best)


def leave_one_out_sigma_min(a: np.ndarray) -> float:
    """Minimum over i of sigma_min(A with row i deleted).

    The alpha = 1 - 1/m case of ``subset_sigma_min`` with exactly m
    subproblems, computed by downdating the full Gram matrix one row at a
    time.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < 2:
        raise ValueError("need at least two rows")
    if m - 1 < n:
        return 0.0
    gram = a.T @ a
    best = math.inf
    for i in range(m):
        gi = gram - np.outer(a[i], a[i])
        low = scipy.linalg.eigh(gi, eigvals_only=True, subset_by_index=(0, 0))[0]
        best = min(best, float(low))
    return _sigma_from_eig(best)


def subset_sigma_min_sampled(a: np.ndarray, alpha: float, trials: int, seed: int = 0) -> float:
    """Minimum of sigma_min(A_S) over ``trials`` uniformly sampled subsets.

    An upper bound on the exact subset minimum (fewer candidates).
    Deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a = as_matrix(a)
    m, n = a.shape
    s = min(max(round_half_up(alpha * m), 0), m)
    if s < n:
        return 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    outers = a[:, :, None] * a[:, None, :]
    best = math.inf
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        idx = np.stack([rng.choice(m, size=s, replace=False) for _ in range(count)])
        grams = outers[idx].sum(axis=1)
        best = min(best, float(_min_eig_batch(grams).min()))
        done += count
    return _sigma_from_eig(best)


@dataclass(frozen=True)
class SpectralEntry:
    alpha: float
    value: float
    mode: str  # "exact" or "sampled"
    trials: int | None = None


@dataclass(frozen=True)
class SpectralProfile:
    """Extreme singular values plus subset minima at requested alpha levels."""

    sigma_min: float
    sigma_max: float
    entries: tuple[SpectralEntry, ...]

    def value_at(self, alpha: float) -> float:
        for entry in self.entries:
            if abs(entry.alpha - alpha) <= 1e-12:
                return entry.value
        raise KeyError(f"no entry for alpha={alpha}")


def spectral_profile(
    a: np.ndarray,
    alphas,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    sample_trials: int = 2000,
    seed: int = 0,
) -> SpectralProfile:
    """Profile a matrix at several alpha levels.

    Uses exact enumeration where it fits the budget and falls back to
    sampled upper bounds (flagged in the entry mode) elsewhere.
    """
    a = as_matrix(a)
    smin, smax = extreme_singular_values(a)
    entries = []
    for alpha in alphas:
        try:
            value = subset_sigma_min(a, alpha, subset_budget=subset_budget)
            entries.append(SpectralEntry(alpha=float(alpha), value=value, mode="exact"))
        except BudgetExceededError:
            value = subset_sigma_min_sampled(a, alpha, trials=sample_trials, seed=seed)
            entries.append(SpectralEntry(alpha=float(alpha), value=value,
                                         mode="sampled", trials=sample_trials))
    return SpectralProfile(sigma_min=smin, sigma_max=smax, entries=tuple(entries))
