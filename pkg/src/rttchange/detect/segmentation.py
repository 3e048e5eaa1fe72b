"""Exact penalised segmentation by pruned dynamic programming."""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np

from ..model import ChangepointSet, boundaries, check_positions
from .costs import CostFamily, make_cost, segment_cost
from .penalty import PenaltyCriterion, decompose, penalty_value

MIN_SEG_LEN = 2

#: Relative gap below which two objective values count as a tie.
TIE_TOL = 1e-10


def optimal_segmentation(
    values: Sequence[float] | np.ndarray,
    family: CostFamily,
    criterion: PenaltyCriterion | str,
    *,
    min_seg_len: int = MIN_SEG_LEN,
    theta_dim: int | None = None,
    prune: bool = True,
    method_tag: str = "",
) -> ChangepointSet:
    """Minimise total segment cost plus penalty over all segmentations.

    Every segment holds at least ``min_seg_len`` samples. With ``prune`` the
    search discards start candidates that can never again be optimal (PELT);
    without it the search is the plain O(n^2) optimal partitioning. Both
    return the same segmentation. Ties, up to a relative ``TIE_TOL``, go to
    fewer changepoints, then to the earlier last changepoint.
    """
    y = np.asarray(values, dtype=float)
    n = y.size
    if min_seg_len < 1:
        raise ValueError("min_seg_len must be >= 1")
    if n < 2 * min_seg_len:
        warnings.warn(
            f"series of {n} samples too short to split with min_seg_len={min_seg_len}",
            stacklevel=2,
        )
        return ChangepointSet((), method_tag)

    dim = family.theta_dim if theta_dim is None else theta_dim
    per_cp, _, length_term = decompose(criterion, n, dim)
    raw = make_cost(y, family)
    if length_term:
        log_n = math.log(n)

        def cost(starts: np.ndarray, end: int) -> np.ndarray:
            return raw(starts, end) + 0.5 * (np.log(end - starts) - log_n)
    else:
        cost = raw

    L = min_seg_len
    best = np.full(n + 1, np.inf)
    best[0] = -per_cp
    count = np.zeros(n + 1, dtype=int)
    last = np.zeros(n + 1, dtype=int)
    # a pruned start stays usable for L more steps: the dominance argument
    # needs the segment after the current end to be admissible
    retire_at = np.full(n + 1, n + 1, dtype=int)
    starts = np.empty(0, dtype=int)

    for t in range(L, n + 1):
        s = t - L
        if s == 0 or s >= L:
            starts = np.append(starts, s)
        if prune:
            starts = starts[retire_at[starts] > t]
        seg = cost(starts, t)
        total = best[starts] + seg + per_cp
        low = total.min()
        tied = np.flatnonzero(total <= low + TIE_TOL * (1.0 + abs(low)))
        j = tied[np.argmin(count[starts[tied]])] if tied.size > 1 else tied[0]
        tau = starts[j]
        best[t] = total[j]
        last[t] = tau
        count[t] = count[tau] + (tau > 0)
        if prune:
            margin = 10 * TIE_TOL * (1.0 + abs(low))
            dominated = best[starts] + seg > low + margin
            if dominated.any():
                idx = starts[dominated]
                retire_at[idx] = np.minimum(retire_at[idx], t + L)

    positions = []
    t = n
    while t > 0:
        tau = int(last[t])
        if tau > 0:
            positions.append(tau)
        t = tau
    return ChangepointSet(tuple(reversed(positions)), method_tag)


def total_cost(
    values: Sequence[float] | np.ndarray,
    positions: Sequence[int],
    family: CostFamily,
    criterion: PenaltyCriterion | str,
    theta_dim: int | None = None,
) -> float:
    """Penalised objective of one given segmentation, evaluated segment by segment."""
    y = np.asarray(values, dtype=float)
    n = y.size
    check_positions(positions, n)
    b = boundaries(positions, n)
    lengths = [b[i + 1] - b[i] for i in range(len(b) - 1)]
    fit = sum(segment_cost(y[b[i]:b[i + 1]], family, reference=y) for i in range(len(b) - 1))
    dim = family.theta_dim if theta_dim is None else theta_dim
    return fit + penalty_value(criterion, n, dim, lengths)
