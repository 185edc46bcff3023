"""Multiset quantiles and two-sided quantile partitions.

The quantile of a multiset of size m at level q is the k-th order statistic
with k = round-half-up(q * m) clamped to [1, m]; when q*m is an integer this
is exactly the (q*m)-th smallest element. Partitions split index sets by
membership counts, never by interpolated values, because the row-selection
rules are defined by how many rows fall in each block.

Ties are broken deterministically: entries are ordered by (value, original
index), so among equal values the lowest indices fill the lower blocks
first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, InvalidQuantilesError


def round_half_up(x: float) -> int:
    """Nearest integer, with .5 rounding up. Deterministic, unlike round()."""
    return int(math.floor(x + 0.5))


def quantile_rank(q: float, size: int) -> int:
    """1-based order-statistic rank for quantile level q over ``size`` items."""
    return min(max(round_half_up(q * size), 1), size)


def multiset_quantile(values, q: float) -> float:
    """The q-th quantile of a multiset, as an order statistic.

    Raises EmptyInputError for an empty input and InvalidQuantilesError
    unless 0 < q <= 1.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        v = v.ravel()
    if v.size == 0:
        raise EmptyInputError("multiset_quantile needs at least one value")
    if not 0.0 < q <= 1.0:
        raise InvalidQuantilesError(f"q must be in (0, 1], got {q}")
    k = quantile_rank(q, v.size)
    return float(np.partition(v, k - 1)[k - 1])


@dataclass(frozen=True)
class QuantilePartition:
    """A disjoint split of indices into lower / admissible / upper blocks.

    ``lower`` holds the first round(q0*m) indices in (value, index) order,
    ``admissible`` the next round(q1*m) - round(q0*m), ``upper`` the rest.
    ``q0_value``/``q1_value`` are the boundary order statistics (q0_value is
    None when the lower block is empty).
    """

    q0: float | None
    q1: float
    q0_value: float | None
    q1_value: float
    lower: np.ndarray
    admissible: np.ndarray
    upper: np.ndarray


def partition_two_sided(values, q1: float, q0: float | None = None, keys=None) -> QuantilePartition:
    """Partition indices by a one- or two-sided quantile band.

    Entries are sorted by value with the original index as tiebreaker
    (stable), then split by counts: |lower| = round(q0*m) (0 when q0 is
    absent) and |lower| + |admissible| = round(q1*m). ``keys`` optionally
    supplies the original index labels; by default they are 0..m-1.

    Raises InvalidQuantilesError when the quantile ordering constraint is
    violated or when rounding would leave the admissible block empty.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    m = v.size
    if m == 0:
        raise EmptyInputError("partition_two_sided needs at least one value")
    if not 0.0 < q1 <= 1.0:
        raise InvalidQuantilesError(f"q1 must be in (0, 1], got {q1}")
    if q0 is not None and not 0.0 <= q0 < q1:
        raise InvalidQuantilesError(f"need 0 <= q0 < q1 <= 1, got q0={q0}, q1={q1}")
    if keys is None:
        keys = np.arange(m)
    else:
        keys = np.asarray(keys)
        if keys.shape != (m,):
            raise InvalidQuantilesError("keys must have one entry per value")

    k1 = quantile_rank(q1, m)
    k0 = 0 if q0 is None else min(round_half_up(q0 * m), m)
    if k0 >= k1:
        raise InvalidQuantilesError(
            f"admissible block is empty: round(q0*m)={k0}, round(q1*m)={k1} for m={m}"
        )

    order = np.argsort(v, kind="stable")
    return QuantilePartition(
        q0=q0,
        q1=q1,
        q0_value=float(v[order[k0 - 1]]) if k0 >= 1 else None,
        q1_value=float(v[order[k1 - 1]]),
        lower=keys[order[:k0]],
        admissible=keys[order[k0:k1]],
        upper=keys[order[k1:]],
    )
