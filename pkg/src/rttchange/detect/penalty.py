"""Information-criterion penalties for the number of changepoints."""

from __future__ import annotations

import enum
import math
from typing import Sequence

from ..model import ValidationError


class PenaltyCriterion(str, enum.Enum):
    AIC = "AIC"
    BIC = "BIC"
    HQ = "HQ"
    MBIC = "MBIC"

    @classmethod
    def parse(cls, name: "str | PenaltyCriterion") -> "PenaltyCriterion":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("-", "").replace("_", "")
        aliases = {"SIC": "BIC", "HANNANQUINN": "HQ"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValidationError(f"unknown penalty criterion {name!r}") from None


def beta(criterion: PenaltyCriterion, n: int) -> float:
    """Multiplier applied to ``f(m) = m + (m + 1) * theta_dim``."""
    criterion = PenaltyCriterion.parse(criterion)
    if n < 2:
        raise ValidationError("penalty needs n >= 2")
    if criterion is PenaltyCriterion.AIC:
        return 2.0
    if criterion is PenaltyCriterion.BIC:
        return math.log(n)
    if criterion is PenaltyCriterion.HQ:
        if n < 3:
            raise ValidationError("Hannan-Quinn penalty needs n >= 3")
        return 2.0 * math.log(math.log(n))
    raise ValidationError("MBIC has no linear multiplier")


def penalty_value(
    criterion: PenaltyCriterion | str,
    n: int,
    theta_dim: int,
    segment_lengths: Sequence[int],
) -> float:
    """Total penalty of a segmentation with ``len(segment_lengths) - 1`` changepoints.

    Only MBIC looks at the lengths themselves; the linear criteria need just
    their count.
    """
    criterion = PenaltyCriterion.parse(criterion)
    if n < 2:
        raise ValidationError("penalty needs n >= 2")
    m = len(segment_lengths) - 1
    if m < 0:
        raise ValidationError("a segmentation has at least one segment")
    if criterion is PenaltyCriterion.MBIC:
        if sum(segment_lengths) != n:
            raise ValidationError("MBIC segment lengths must sum to n")
        return 1.5 * m * math.log(n) + 0.5 * sum(math.log(l / n) for l in segment_lengths)
    return beta(criterion, n) * (m + (m + 1) * theta_dim)


def decompose(
    criterion: PenaltyCriterion | str, n: int, theta_dim: int
) -> tuple[float, float, bool]:
    """Split a penalty into DP-friendly parts.

    Returns ``(per_changepoint, constant, length_term)``. When
    ``length_term`` is true, ``0.5 * log(length / n)`` must be added to each
    segment's cost; summed over a segmentation the three parts reproduce
    :func:`penalty_value` exactly.
    """
    criterion = PenaltyCriterion.parse(criterion)
    if criterion is PenaltyCriterion.MBIC:
        if n < 2:
            raise ValidationError("penalty needs n >= 2")
        return 1.5 * math.log(n), 0.0, True
    b = beta(criterion, n)
    return b * (1 + theta_dim), b * theta_dim, False
