"""IP forwarding pattern (IFP) series from Paris traceroute measurements.

Consecutive traceroutes cycle through Paris IDs, so two measurements only
reveal a routing change when they share a Paris ID yet report different IP
paths (a *conflict*). Measurements are partitioned into series that hold no
conflict internally; every series boundary is an IFP change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..model import ValidationError

PARIS_ID_COUNT = 16


@dataclass(frozen=True)
class ParisMeasurement:
    epoch: float
    paris_id: int
    ip_path: tuple[str | None, ...]

    def __post_init__(self) -> None:
        if not 0 <= self.paris_id < PARIS_ID_COUNT:
            raise ValidationError(f"paris_id {self.paris_id} outside 0..{PARIS_ID_COUNT - 1}")
        object.__setattr__(self, "ip_path", tuple(self.ip_path))


@dataclass(frozen=True)
class IfpSeries:
    """Measurements ``start`` (inclusive) to ``end`` (exclusive)."""

    start: int
    end: int
    mapping: Mapping[int, tuple[str | None, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.end - self.start


def _mapping(measurements: Sequence[ParisMeasurement], start: int, end: int) -> dict:
    out: dict = {}
    for m in measurements[start:end]:
        out.setdefault(m.paris_id, m.ip_path)
    return out


def _agrees(m: ParisMeasurement, mapping: Mapping) -> bool:
    path = mapping.get(m.paris_id)
    return path is None or path == m.ip_path


def _conflict(a: Mapping, b: Mapping) -> bool:
    return any(pid in b and b[pid] != path for pid, path in a.items())


def forward_inclusion(measurements: Sequence[ParisMeasurement]) -> list[IfpSeries]:
    """Greedy left-to-right partition: extend a series until a conflict."""
    series: list[IfpSeries] = []
    start = 0
    mapping: dict = {}
    for i, m in enumerate(measurements):
        if not _agrees(m, mapping):
            series.append(IfpSeries(start, i, mapping))
            start, mapping = i, {}
        mapping.setdefault(m.paris_id, m.ip_path)
    if measurements:
        series.append(IfpSeries(start, len(measurements), mapping))
    return series


def covers_all_ids_twice(
    series: IfpSeries, measurements: Sequence[ParisMeasurement], id_count: int = PARIS_ID_COUNT
) -> bool:
    seen = [0] * id_count
    for m in measurements[series.start:series.end]:
        seen[m.paris_id] += 1
    return min(seen) >= 2


def _merge_compatible(series: list[IfpSeries], measurements: Sequence[ParisMeasurement]) -> list[IfpSeries]:
    out: list[IfpSeries] = []
    for s in series:
        if out and not _conflict(out[-1].mapping, s.mapping):
            prev = out.pop()
            s = IfpSeries(prev.start, s.end, _mapping(measurements, prev.start, s.end))
        out.append(s)
    return out


def backward_extension(
    series: Sequence[IfpSeries],
    measurements: Sequence[ParisMeasurement],
    id_count: int = PARIS_ID_COUNT,
) -> list[IfpSeries]:
    """Pull boundaries back to where the later series' pattern really starts.

    A boundary moves only when the later series is longer than the earlier
    one and saw every Paris ID at least twice. It then moves to the earliest
    measurement from which everything up to the old boundary agrees with the
    later series. The search never reaches past the immediately preceding
    series; series emptied by a move disappear and neighbours that no longer
    conflict are merged.
    """
    out: list[IfpSeries] = []
    for nxt in series:
        if not out:
            out.append(nxt)
            continue
        prev = out[-1]
        if len(nxt) <= len(prev) or not covers_all_ids_twice(nxt, measurements, id_count):
            out.append(nxt)
            continue
        b = nxt.start
        while b > prev.start and _agrees(measurements[b - 1], nxt.mapping):
            b -= 1
        if b == nxt.start:
            out.append(nxt)
            continue
        out.pop()
        if b > prev.start:
            out.append(IfpSeries(prev.start, b, _mapping(measurements, prev.start, b)))
        out.append(IfpSeries(b, nxt.end, _mapping(measurements, b, nxt.end)))
        # only the last two adjacencies changed
        out[-3:] = _merge_compatible(out[-3:], measurements)
    return out


def check_partition(series: Sequence[IfpSeries], measurements: Sequence[ParisMeasurement]) -> None:
    """Raise if a series conflicts internally or two neighbours could merge."""
    expected = 0
    for s in series:
        if s.start != expected or s.end <= s.start:
            raise AssertionError(f"series {s.start}:{s.end} breaks contiguity")
        expected = s.end
        mapping: dict = {}
        for m in measurements[s.start:s.end]:
            if not _agrees(m, mapping):
                raise AssertionError(f"conflict inside series {s.start}:{s.end}")
            mapping.setdefault(m.paris_id, m.ip_path)
    if expected != len(measurements):
        raise AssertionError("series do not cover all measurements")
    for a, b in zip(series, series[1:]):
        if not _conflict(a.mapping, b.mapping):
            raise AssertionError(f"series ending at {a.end} does not conflict with its successor")


def boundary_conflict(
    prev: IfpSeries, nxt: IfpSeries, measurements: Sequence[ParisMeasurement]
) -> tuple[int, tuple, tuple]:
    """First measurement of ``nxt`` contradicting ``prev``: (paris_id, old path, new path)."""
    for m in measurements[nxt.start:nxt.end]:
        old = prev.mapping.get(m.paris_id)
        if old is not None and old != m.ip_path:
            return m.paris_id, old, m.ip_path
    m = measurements[nxt.start]
    return m.paris_id, prev.mapping.get(m.paris_id, ()), m.ip_path
