"""Scoring changepoint detections against ground truth.

Truth and detections are paired by a minimum-cost maximum-cardinality
matching: pairs must lie within a shift window, as many pairs as possible are
formed, and among those the total shift is minimal. Each truth position also
carries an importance weight so misses on long, large changes cost more than
misses on brief or subtle ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import (
    ChangepointSet,
    GroundTruth,
    RttTrace,
    ValidationError,
    boundaries,
    level_and_volatility_diff,
)


@dataclass(frozen=True)
class MatchConfig:
    window_w: float = 2
    rho: float = 2

    def __post_init__(self) -> None:
        if self.window_w < 0:
            raise ValidationError("window_w must be >= 0")
        if self.rho < 1:
            raise ValidationError("rho must be >= 1")

    @classmethod
    def from_minutes(
        cls, window_min: float = 8.0, rho_min: float = 8.0, interval_s: float = 240.0
    ) -> "MatchConfig":
        """Convert durations to sample counts at the trace's nominal cadence."""
        return cls(
            window_w=round(window_min * 60.0 / interval_s),
            rho=max(1, round(rho_min * 60.0 / interval_s)),
        )


@dataclass(frozen=True)
class MatchSet:
    pairs: tuple[tuple[float, float], ...]
    unmatched_truth: tuple[float, ...]
    unmatched_detections: tuple[float, ...]

    @property
    def total_shift(self) -> float:
        return float(sum(abs(a - b) for a, b in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


def _clusters(truth: np.ndarray, det: np.ndarray, window: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split both sides into groups that no in-window edge crosses."""
    points = np.concatenate((truth, det))
    side = np.concatenate((np.zeros(truth.size, bool), np.ones(det.size, bool)))
    order = np.argsort(points, kind="stable")
    points, side = points[order], side[order]
    cuts = np.flatnonzero(np.diff(points) > window) + 1
    out = []
    for p, s in zip(np.split(points, cuts), np.split(side, cuts)):
        if s.any() and (~s).any():
            out.append((p[~s], p[s]))
    return out


def optimal_match(
    truth: Sequence[float] | GroundTruth,
    detections: Sequence[float] | ChangepointSet,
    window: float | MatchConfig = 2,
) -> MatchSet:
    """Maximum-cardinality, minimum-total-shift one-to-one matching.

    Works on any ordered positions, sample indices or epochs alike. Each
    connected block of the window graph is solved as a rectangular
    assignment problem in which out-of-window pairs cost more than every
    in-window pair of the block combined, so pair count always dominates
    shift.
    """
    if isinstance(window, MatchConfig):
        window = window.window_w
    t_pos = np.asarray(getattr(truth, "positions", truth), dtype=float)
    d_pos = np.asarray(getattr(detections, "positions", detections), dtype=float)
    pairs: list[tuple[float, float]] = []
    for t_blk, d_blk in _clusters(t_pos, d_pos, window):
        shift = np.abs(t_blk[:, None] - d_blk[None, :])
        allowed = shift <= window
        big = float(min(t_blk.size, d_blk.size)) * max(window, 1.0) + 1.0
        rows, cols = linear_sum_assignment(np.where(allowed, shift, big))
        for r, c in zip(rows, cols):
            if allowed[r, c]:
                pairs.append((float(t_blk[r]), float(d_blk[c])))
    pairs.sort()
    used_t = {p[0] for p in pairs}
    used_d = {p[1] for p in pairs}
    return MatchSet(
        pairs=tuple(pairs),
        unmatched_truth=tuple(float(x) for x in t_pos if x not in used_t),
        unmatched_detections=tuple(float(x) for x in d_pos if x not in used_d),
    )


def following_lengths(truth: GroundTruth, n: int) -> list[int]:
    b = boundaries(truth.positions, n)
    return [b[i + 1] - b[i] for i in range(1, len(b) - 1)]


def omega_weights(trace: RttTrace, truth: GroundTruth, cfg: MatchConfig = MatchConfig()) -> list[float]:
    """Operational importance of each truth position.

    ``max(log2(following_length / rho), 0) * (M + delta)`` with ``M`` and
    ``delta`` the level and volatility differences across the position.
    """
    n = len(trace)
    truth.validate(n)
    weights = []
    for i, length in enumerate(following_lengths(truth, n), start=1):
        level, vol = level_and_volatility_diff(trace, truth, i)
        weights.append(max(math.log2(length / cfg.rho), 0.0) * (level + vol))
    return weights


@dataclass
class ScoreReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    recall_w: float
    f2: float
    f2_w: float
    omega: list[float] = field(default_factory=list)
    ignored: int = 0
    ignored_matched: int = 0
    total_shift: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    CSV_FIELDS = ("tp", "fp", "fn", "ignored", "precision", "recall", "recall_w", "f2", "f2_w")

    def csv_row(self) -> dict:
        return {k: getattr(self, k) for k in self.CSV_FIELDS}


def f_beta(precision: float, recall: float, beta: float = 2.0) -> float:
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1 + b2) * precision * recall / denom


def score(
    truth: GroundTruth,
    detections: ChangepointSet,
    trace: RttTrace,
    cfg: MatchConfig = MatchConfig(),
) -> ScoreReport:
    """Precision, recall, weighted recall and the F2 variants.

    Truth positions followed by a segment shorter than ``rho`` still take
    part in matching, so a detection on them is not a false positive, but
    they are left out of both recall denominators. ``tp`` counts matched
    truths that are not ignored; ``ignored_matched`` counts the others.
    """
    n = len(trace)
    truth.validate(n)
    detections.validate(n)
    omega = omega_weights(trace, truth, cfg)
    ignored = {
        p for p, length in zip(truth.positions, following_lengths(truth, n)) if length < cfg.rho
    }
    match = optimal_match(truth, detections, cfg.window_w)
    matched_truth = {int(t) for t, _ in match.pairs}

    tp = sum(1 for t in matched_truth if t not in ignored)
    ignored_matched = len(matched_truth) - tp
    fp = len(detections) - len(match.pairs)
    counted = len(truth) - len(ignored)
    fn = counted - tp

    precision = 1.0 if len(detections) == 0 else len(match.pairs) / len(detections)
    recall = 1.0 if counted == 0 else tp / counted
    total_w = sum(w for p, w in zip(truth.positions, omega) if p not in ignored)
    if total_w > 0:
        hit_w = sum(w for p, w in zip(truth.positions, omega) if p in matched_truth and p not in ignored)
        recall_w = hit_w / total_w
    else:
        # no weight anywhere: nothing to discriminate, fall back to plain recall
        recall_w = recall
    return ScoreReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        recall_w=recall_w,
        f2=f_beta(precision, recall),
        f2_w=f_beta(precision, recall_w),
        omega=omega,
        ignored=len(ignored),
        ignored_matched=ignored_matched,
        total_shift=match.total_shift,
    )
