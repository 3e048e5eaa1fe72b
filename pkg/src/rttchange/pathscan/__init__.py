"""Routing-level path change detection from Paris traceroute series."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from .aspath import (
    NORESPONSE,
    UNMAPPED,
    PrefixTable,
    classify_as_change,
    collapse,
    is_ixp,
    is_public_asn,
    map_as_path,
    responsive,
)
from .ifp import (
    PARIS_ID_COUNT,
    IfpSeries,
    ParisMeasurement,
    backward_extension,
    boundary_conflict,
    check_partition,
    covers_all_ids_twice,
    forward_inclusion,
)

KINDS = ("AS", "IXP", "IFP")


@dataclass(frozen=True)
class PathChange:
    epoch: float
    kind: str
    before: str = ""
    after: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown path change kind {self.kind!r}")


def _hops(path: Sequence[str | None]) -> str:
    return " ".join(NORESPONSE if h is None else h for h in path)


def ifp_series(measurements: Sequence[ParisMeasurement], mode: str = "backward") -> list[IfpSeries]:
    series = forward_inclusion(measurements)
    if mode == "backward":
        return backward_extension(series, measurements)
    if mode != "forward":
        raise ValueError(f"ifp mode must be 'forward' or 'backward', got {mode!r}")
    return series


def ifp_changes(
    series: Sequence[IfpSeries], measurements: Sequence[ParisMeasurement]
) -> list[PathChange]:
    """One IFP change per boundary, dated at the first measurement after it."""
    out = []
    for prev, nxt in zip(series, series[1:]):
        pid, old, new = boundary_conflict(prev, nxt, measurements)
        out.append(
            PathChange(
                measurements[nxt.start].epoch,
                "IFP",
                f"{pid}:{_hops(old)}",
                f"{pid}:{_hops(new)}",
            )
        )
    return out


def as_path_changes(
    as_paths: Sequence[Sequence[str]], epochs: Sequence[float]
) -> list[PathChange]:
    """AS and IXP changes between consecutive AS paths."""
    if len(as_paths) != len(epochs):
        raise ValueError("as_paths and epochs differ in length")
    out = []
    for i in range(1, len(as_paths)):
        kind = classify_as_change(as_paths[i - 1], as_paths[i])
        if kind is not None:
            out.append(
                PathChange(epochs[i], kind, " ".join(as_paths[i - 1]), " ".join(as_paths[i]))
            )
    return out


def scan(
    measurements: Sequence[ParisMeasurement],
    prefix_table: PrefixTable,
    ixp_table: PrefixTable | None = None,
    ifp_mode: str = "backward",
) -> list[PathChange]:
    """All path changes of one probe, AS/IXP first when they share an epoch.

    IFP changes dated at an epoch that already carries an AS or IXP change
    are dropped; they are the same event seen at a finer level.
    """
    as_paths = [map_as_path(m.ip_path, prefix_table, ixp_table) for m in measurements]
    routed = as_path_changes(as_paths, [m.epoch for m in measurements])
    taken = {c.epoch for c in routed}
    ifp = [
        c
        for c in ifp_changes(ifp_series(measurements, ifp_mode), measurements)
        if c.epoch not in taken
    ]
    order = {k: i for i, k in enumerate(KINDS)}
    return sorted(routed + ifp, key=lambda c: (c.epoch, order[c.kind]))


CSV_FIELDS = ("epoch", "kind", "before", "after")


def write_changes(changes: Iterable[PathChange], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for c in changes:
        writer.writerow((_fmt_epoch(c.epoch), c.kind, c.before, c.after))


def read_changes(fh) -> list[PathChange]:
    return [
        PathChange(float(row["epoch"]), row["kind"], row.get("before", ""), row.get("after", ""))
        for row in csv.DictReader(fh)
    ]


def _fmt_epoch(epoch: float) -> str:
    return str(int(epoch)) if float(epoch).is_integer() else repr(float(epoch))


def changes_to_csv(changes: Iterable[PathChange]) -> str:
    buf = io.StringIO()
    write_changes(changes, buf)
    return buf.getvalue()


__all__ = [
    "CSV_FIELDS",
    "KINDS",
    "NORESPONSE",
    "PARIS_ID_COUNT",
    "UNMAPPED",
    "IfpSeries",
    "ParisMeasurement",
    "PathChange",
    "PrefixTable",
    "as_path_changes",
    "backward_extension",
    "boundary_conflict",
    "changes_to_csv",
    "check_partition",
    "classify_as_change",
    "collapse",
    "covers_all_ids_twice",
    "forward_inclusion",
    "ifp_changes",
    "ifp_series",
    "is_ixp",
    "is_public_asn",
    "map_as_path",
    "read_changes",
    "responsive",
    "scan",
    "write_changes",
]
