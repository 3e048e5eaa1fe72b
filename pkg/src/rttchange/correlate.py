"""Pair RTT changes with path changes that happened close in time."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .pathscan import KINDS, PathChange
from .score import optimal_match

#: Traceroute cadence of the built-in measurements; the default match window.
DEFAULT_WINDOW_S = 1800.0


@dataclass
class CorrelationReport:
    pairs: list[tuple[float, PathChange]]
    counts: dict[str, int]
    matched: dict[str, int]
    unmatched_rtt_count: int
    unmatched_path_count: int
    window: float = DEFAULT_WINDOW_S

    @property
    def precision_per_kind(self) -> dict[str, float | None]:
        """Share of each kind's path changes matched to an RTT change."""
        return {
            k: (self.matched[k] / self.counts[k] if self.counts[k] else None) for k in KINDS
        }

    @property
    def precision(self) -> float | None:
        total = sum(self.counts.values())
        return sum(self.matched.values()) / total if total else None

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "pairs": [
                {"rtt_epoch": r, "path_epoch": p.epoch, "kind": p.kind} for r, p in self.pairs
            ],
            "counts": self.counts,
            "matched": self.matched,
            "precision": self.precision,
            "precision_per_kind": self.precision_per_kind,
            "unmatched_rtt_count": self.unmatched_rtt_count,
            "unmatched_path_count": self.unmatched_path_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    CSV_FIELDS = ("probe", "kind", "n_path_changes", "n_matched", "precision")

    def csv_rows(self, probe: str) -> list[dict]:
        prec = self.precision_per_kind
        return [
            {
                "probe": probe,
                "kind": k,
                "n_path_changes": self.counts[k],
                "n_matched": self.matched[k],
                "precision": "" if prec[k] is None else prec[k],
            }
            for k in KINDS
        ]


def correlate(
    rtt_changes: Sequence[float],
    path_changes: Sequence[PathChange],
    window: float = DEFAULT_WINDOW_S,
) -> CorrelationReport:
    """Minimum-shift maximum-cardinality matching of RTT and path change epochs.

    All path change kinds share one matching, so an RTT change explains at
    most one path change whatever its kind.
    """
    by_epoch = {c.epoch: c for c in path_changes}
    if len(by_epoch) != len(path_changes):
        raise ValueError("path changes must have distinct epochs")
    match = optimal_match(sorted(by_epoch), sorted(rtt_changes), window)
    pairs = [(rtt, by_epoch[path]) for path, rtt in match.pairs]
    pairs.sort(key=lambda p: p[0])
    counts = {k: 0 for k in KINDS}
    for c in path_changes:
        counts[c.kind] += 1
    matched = {k: 0 for k in KINDS}
    for _, c in pairs:
        matched[c.kind] += 1
    return CorrelationReport(
        pairs=pairs,
        counts=counts,
        matched=matched,
        unmatched_rtt_count=len(rtt_changes) - len(pairs),
        unmatched_path_count=len(path_changes) - len(pairs),
        window=window,
    )
