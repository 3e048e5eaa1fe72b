"""Core data types for RTT traces, changepoints and segment statistics.

Changepoint positions follow one convention everywhere in the package: a
position ``p`` (``1 <= p <= n - 1``) is the Python index of the first sample
of the new segment, which is also the 1-based index of the last sample of the
segment on its left. Segments are therefore ``values[tau[i-1]:tau[i]]`` with
sentinels ``tau[0] = 0`` and ``tau[m+1] = n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Stored marker for a probe that received no reply.
TIMEOUT = float("nan")

#: Value substituted for timeouts before any statistic is computed.
TIMEOUT_RTT_MS = 1000.0

DEFAULT_INTERVAL_S = 240.0


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


def is_timeout(value: float) -> bool:
    return value != value


@dataclass(frozen=True)
class RttTrace:
    """Timestamped RTT samples; timeouts are stored as NaN."""

    epochs: np.ndarray
    rtts: np.ndarray
    interval_hint: float = DEFAULT_INTERVAL_S

    def __post_init__(self) -> None:
        epochs = np.asarray(self.epochs, dtype=float)
        rtts = np.asarray(self.rtts, dtype=float)
        if epochs.ndim != 1 or epochs.shape != rtts.shape:
            raise ValidationError("epochs and rtts must be 1-D arrays of equal length")
        if epochs.size > 1 and not np.all(np.diff(epochs) > 0):
            raise ValidationError("epochs must be strictly increasing")
        finite = rtts[~np.isnan(rtts)]
        # 0 is allowed: baseline-removed traces have a minimum of exactly 0
        if np.any(~np.isfinite(finite)) or np.any(finite < 0):
            raise ValidationError("rtt values must be finite and >= 0, or TIMEOUT")
        epochs.setflags(write=False)
        rtts.setflags(write=False)
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "rtts", rtts)

    @classmethod
    def from_values(
        cls,
        values: Iterable[float | None],
        interval: float = DEFAULT_INTERVAL_S,
        start: float = 0.0,
    ) -> "RttTrace":
        """Build a trace at a regular cadence; ``None`` marks a timeout."""
        rtts = np.array([TIMEOUT if v is None else v for v in values], dtype=float)
        epochs = start + interval * np.arange(rtts.size, dtype=float)
        return cls(epochs, rtts, interval_hint=interval)

    def __len__(self) -> int:
        return int(self.rtts.size)

    @property
    def timeout_mask(self) -> np.ndarray:
        return np.isnan(self.rtts)

    @property
    def timeout_count(self) -> int:
        return int(self.timeout_mask.sum())

    def mapped(self) -> np.ndarray:
        """RTT values with timeouts replaced by :data:`TIMEOUT_RTT_MS`."""
        return np.where(np.isnan(self.rtts), TIMEOUT_RTT_MS, self.rtts)


@dataclass(frozen=True)
class ChangepointSet:
    positions: tuple[int, ...]
    method_tag: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))

    def __len__(self) -> int:
        return len(self.positions)

    def validate(self, n: int) -> None:
        check_positions(self.positions, n)


@dataclass(frozen=True)
class GroundTruth:
    positions: tuple[int, ...]
    source: str = "human"

    def __post_init__(self) -> None:
        if self.source not in ("human", "synthetic"):
            raise ValidationError(f"unknown ground truth source {self.source!r}")
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))

    def __len__(self) -> int:
        return len(self.positions)

    def validate(self, n: int) -> None:
        check_positions(self.positions, n)


@dataclass(frozen=True)
class SegmentStats:
    median: float
    std: float
    length: int


def check_positions(positions: Sequence[int], n: int) -> None:
    prev = 0
    for p in positions:
        if p <= prev or p >= n:
            raise ValidationError(
                f"changepoint positions must be strictly increasing within 1..{n - 1}, "
                f"got {list(positions)}"
            )
        prev = p


def boundaries(positions: Sequence[int], n: int) -> list[int]:
    """Positions with the ``0`` and ``n`` sentinels added."""
    return [0, *positions, n]


def _stats(values: np.ndarray) -> SegmentStats:
    # population std: one-sample segments get 0 rather than NaN
    return SegmentStats(float(np.median(values)), float(np.std(values)), int(values.size))


def segments(trace: RttTrace, cps: ChangepointSet | GroundTruth) -> list[SegmentStats]:
    """Per-segment median, std and length, in order."""
    n = len(trace)
    cps.validate(n)
    values = trace.mapped()
    b = boundaries(cps.positions, n)
    return [_stats(values[b[i]:b[i + 1]]) for i in range(len(b) - 1)]


def level_and_volatility_diff(
    trace: RttTrace, truth: GroundTruth, i: int
) -> tuple[float, float]:
    """Median and std differences across the ``i``-th truth position (1-based).

    Returns ``(M, delta)`` where ``M`` is the absolute difference between the
    medians of the segments on either side of ``truth.positions[i-1]`` and
    ``delta`` the absolute difference of their standard deviations.
    """
    n = len(trace)
    truth.validate(n)
    k = len(truth)
    if not 1 <= i <= k:
        raise ValidationError(f"truth index {i} outside 1..{k}")
    b = boundaries(truth.positions, n)
    values = trace.mapped()
    left = _stats(values[b[i - 1]:b[i]])
    right = _stats(values[b[i]:b[i + 1]])
    return abs(left.median - right.median), abs(left.std - right.std)
