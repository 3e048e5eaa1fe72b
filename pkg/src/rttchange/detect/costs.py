"""Segment cost functions (negative maximised log-likelihood).

Each family exists in two forms: :func:`segment_cost` evaluates one segment
directly from its values, and :func:`make_cost` precomputes cumulative
statistics over a whole series so the segmentation search can price many
candidate segments ending at the same sample in one vectorised call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..model import ValidationError

#: Lower bound on the Normal variance (ms^2); constant segments would give log 0.
VARIANCE_FLOOR = 1e-8

#: Exponential cost needs strictly positive samples; baseline removal yields 0.
EXPONENTIAL_FLOOR = 0.01

KINDS = ("normal", "poisson", "exponential", "empirical")


@dataclass(frozen=True)
class CostFamily:
    kind: str
    quantile_count: int = 10

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown cost family {self.kind!r}")
        if self.kind == "empirical" and self.quantile_count < 2:
            raise ValidationError("empirical cost needs quantile_count >= 2")

    @property
    def theta_dim(self) -> int:
        if self.kind == "normal":
            return 2
        if self.kind == "empirical":
            return self.quantile_count
        return 1


SegmentCostFn = Callable[[np.ndarray, int], np.ndarray]


def _xlogx(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def empirical_quantiles(reference: np.ndarray, quantile_count: int) -> np.ndarray:
    """Evaluation points of the empirical-distribution cost.

    Probabilities are spread so the tails get denser coverage than a uniform
    grid: ``p_k = 1 / (1 + (2n - 1) ** (1 - (2k - 1) / K))``.
    """
    n = reference.size
    k = np.arange(1, quantile_count + 1)
    probs = 1.0 / (1.0 + (2.0 * n - 1.0) ** (1.0 - (2.0 * k - 1.0) / quantile_count))
    return np.quantile(reference, probs)


def empirical_level_weight(n: int, quantile_count: int) -> float:
    return math.log(2 * n - 1) / quantile_count


def _edf(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    # ties count half, as in the mid-distribution function
    less = (values[:, None] < points[None, :]).sum(axis=0)
    equal = (values[:, None] == points[None, :]).sum(axis=0)
    return (less + 0.5 * equal) / values.size


def segment_cost(
    values: np.ndarray,
    family: CostFamily,
    reference: np.ndarray | None = None,
) -> float:
    """Cost of one segment under ``family``.

    ``reference`` is the full series the empirical quantiles are taken from;
    it defaults to ``values`` and is ignored by the parametric families.
    """
    y = np.asarray(values, dtype=float)
    n = y.size
    if n == 0:
        raise ValidationError("segment cost of an empty segment")
    kind = family.kind
    if kind == "normal":
        var = max(float(np.var(y)), VARIANCE_FLOOR)
        return n * (math.log(2 * math.pi) + math.log(var) + 1.0) / 2.0
    if kind == "poisson":
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise ValidationError("poisson cost needs non-negative integer values")
        total = float(y.sum())
        if total == 0:
            return 0.0
        lam = total / n
        return total - total * math.log(lam)
    if kind == "exponential":
        if np.any(y <= 0):
            raise ValidationError("exponential cost needs strictly positive values")
        mean = float(y.mean())
        return n * (math.log(mean) + 1.0)
    ref = y if reference is None else np.asarray(reference, dtype=float)
    points = empirical_quantiles(ref, family.quantile_count)
    f = _edf(y, points)
    ll = n * (_xlogx(f) + _xlogx(1.0 - f)).sum()
    return float(-empirical_level_weight(ref.size, family.quantile_count) * ll)


def make_cost(values: np.ndarray, family: CostFamily) -> SegmentCostFn:
    """Return ``cost(starts, end)`` pricing ``values[s:end]`` for each ``s``."""
    y = np.asarray(values, dtype=float)
    kind = family.kind
    if kind == "normal":
        return _normal_cost(y)
    if kind == "poisson":
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise ValidationError("poisson cost needs non-negative integer values")
        return _poisson_cost(y)
    if kind == "exponential":
        if np.any(y <= 0):
            raise ValidationError("exponential cost needs strictly positive values")
        return _exponential_cost(y)
    return _empirical_cost(y, family.quantile_count)


def _normal_cost(y: np.ndarray) -> SegmentCostFn:
    centred = y - (y.mean() if y.size else 0.0)
    s1 = np.concatenate(([0.0], np.cumsum(centred)))
    s2 = np.concatenate(([0.0], np.cumsum(centred * centred)))
    log2pi = math.log(2 * math.pi)
    eps = np.finfo(float).eps

    def cost(starts: np.ndarray, end: int) -> np.ndarray:
        length = end - starts
        mean = (s1[end] - s1[starts]) / length
        var = (s2[end] - s2[starts]) / length - mean * mean
        # below the cancellation error of the prefix sums the segment is constant
        noise = 8.0 * eps * (s2[end] + s2[starts]) / length
        var = np.where(var <= noise, VARIANCE_FLOOR, np.maximum(var, VARIANCE_FLOOR))
        return length * (log2pi + np.log(var) + 1.0) / 2.0

    return cost


def _poisson_cost(y: np.ndarray) -> SegmentCostFn:
    s1 = np.concatenate(([0.0], np.cumsum(y)))

    def cost(starts: np.ndarray, end: int) -> np.ndarray:
        length = end - starts
        total = s1[end] - s1[starts]
        return total - _xlogx(total) + total * np.log(length)

    return cost


def _exponential_cost(y: np.ndarray) -> SegmentCostFn:
    s1 = np.concatenate(([0.0], np.cumsum(y)))

    def cost(starts: np.ndarray, end: int) -> np.ndarray:
        length = end - starts
        return length * (np.log((s1[end] - s1[starts]) / length) + 1.0)

    return cost


def _empirical_cost(y: np.ndarray, quantile_count: int) -> SegmentCostFn:
    points = empirical_quantiles(y, quantile_count)
    below = (y[:, None] < points[None, :]) + 0.5 * (y[:, None] == points[None, :])
    cum = np.vstack((np.zeros((1, quantile_count)), np.cumsum(below, axis=0)))
    weight = empirical_level_weight(y.size, quantile_count)

    def cost(starts: np.ndarray, end: int) -> np.ndarray:
        length = (end - starts).astype(float)
        f = (cum[end][None, :] - cum[starts]) / length[:, None]
        ll = length * (_xlogx(f) + _xlogx(1.0 - f)).sum(axis=1)
        return -weight * ll

    return cost
