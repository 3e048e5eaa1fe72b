"""Reading and writing traces, labels and measurement dumps.

Formats
-------
trace CSV
    header ``epoch,rtt``; a timeout is written as ``-1``.
label / changepoint CSV
    header ``index``; one changepoint position per row.
ping JSON-lines
    one measurement per line with ``epoch`` (or ``timestamp``) and the
    replies in ``rtts`` (list of numbers), ``result`` (RIPE Atlas style list
    of ``{"rtt": ...}``) or a ``min`` summary.
traceroute JSON-lines
    one measurement per line with ``epoch``, ``paris_id`` and ``hops``; a
    ``null`` hop is a non-responding one. RIPE Atlas style ``timestamp`` /
    ``result`` records are also accepted.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import TIMEOUT, ChangepointSet, GroundTruth, RttTrace
from .pathscan import ParisMeasurement

logger = logging.getLogger(__name__)

TIMEOUT_CODE = -1


@dataclass
class IngestStats:
    lines: int = 0
    skipped: int = 0
    problems: list[str] = field(default_factory=list)

    def skip(self, lineno: int, reason: str) -> None:
        self.skipped += 1
        if len(self.problems) < 20:
            self.problems.append(f"line {lineno}: {reason}")


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_trace(trace: RttTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "rtt"))
        for epoch, rtt in zip(trace.epochs, trace.rtts):
            w.writerow((_fmt(epoch), TIMEOUT_CODE if math.isnan(rtt) else _fmt(rtt)))


def read_trace(path: str | Path, interval_hint: float | None = None) -> RttTrace:
    epochs, rtts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"epoch", "rtt"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header 'epoch,rtt'")
        for row in reader:
            epochs.append(float(row["epoch"]))
            rtt = float(row["rtt"])
            rtts.append(TIMEOUT if rtt == TIMEOUT_CODE else rtt)
    if interval_hint is None:
        interval_hint = float(np.median(np.diff(epochs))) if len(epochs) > 1 else 240.0
    return RttTrace(np.array(epochs), np.array(rtts), interval_hint)


def write_positions(positions: Iterable[int], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("index\n")
        for p in positions:
            fh.write(f"{int(p)}\n")


def read_positions(path: str | Path) -> tuple[int, ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "index" not in reader.fieldnames:
            raise ValueError(f"{path}: expected header 'index'")
        return tuple(sorted(int(row["index"]) for row in reader))


def read_truth(path: str | Path, source: str = "human") -> GroundTruth:
    return GroundTruth(read_positions(path), source)


def read_changepoints(path: str | Path, method_tag: str = "") -> ChangepointSet:
    return ChangepointSet(read_positions(path), method_tag)


def _epoch(rec: dict) -> float:
    for key in ("epoch", "timestamp"):
        if key in rec:
            return float(rec[key])
    raise KeyError("epoch")


def _replies(rec: dict) -> list[float] | None:
    if "rtts" in rec:
        return [float(x) for x in rec["rtts"] if x is not None]
    if "result" in rec:
        return [float(r["rtt"]) for r in rec["result"] if isinstance(r, dict) and "rtt" in r]
    if "min" in rec:
        v = float(rec["min"])
        return [v] if v > 0 else []
    return None


def parse_ping(lines: Iterable[str], stats: IngestStats | None = None) -> list[tuple[float, float]]:
    """``(epoch, min_rtt)`` per valid line; NaN marks a measurement without replies."""
    stats = stats if stats is not None else IngestStats()
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            rec = json.loads(line)
            epoch = _epoch(rec)
            replies = _replies(rec)
            if replies is None:
                raise KeyError("rtts")
            replies = [r for r in replies if r > 0 and math.isfinite(r)]
        except (ValueError, KeyError, TypeError) as exc:
            stats.skip(lineno, f"{type(exc).__name__}: {exc}")
            continue
        out.append((epoch, min(replies) if replies else TIMEOUT))
    if stats.skipped:
        logger.warning("skipped %d malformed ping lines", stats.skipped)
    return out


def ingest_ping(path: str | Path, interval_hint: float = 240.0, stats: IngestStats | None = None) -> RttTrace:
    """One trace from a ping dump, using each measurement's minimum RTT.

    Records are sorted by epoch; a duplicated epoch keeps the first record.
    """
    with open(path, encoding="utf-8") as fh:
        rows = parse_ping(fh, stats)
    rows.sort(key=lambda r: r[0])
    epochs, rtts, last = [], [], None
    for epoch, rtt in rows:
        if epoch == last:
            continue
        epochs.append(epoch)
        rtts.append(rtt)
        last = epoch
    return RttTrace(np.array(epochs, dtype=float), np.array(rtts, dtype=float), interval_hint)


def _hop_address(hop) -> str | None:
    if hop is None:
        return None
    if isinstance(hop, str):
        return None if hop in ("", "*") else hop
    if isinstance(hop, dict) and "result" in hop:
        for reply in hop["result"]:
            if isinstance(reply, dict) and reply.get("from"):
                return reply["from"]
        return None
    raise TypeError(f"unrecognised hop {hop!r}")


def parse_traceroute(lines: Iterable[str], stats: IngestStats | None = None) -> list[ParisMeasurement]:
    stats = stats if stats is not None else IngestStats()
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            rec = json.loads(line)
            hops = rec["hops"] if "hops" in rec else rec["result"]
            out.append(
                ParisMeasurement(
                    _epoch(rec), int(rec["paris_id"]), tuple(_hop_address(h) for h in hops)
                )
            )
        except (ValueError, KeyError, TypeError) as exc:
            stats.skip(lineno, f"{type(exc).__name__}: {exc}")
    if stats.skipped:
        logger.warning("skipped %d malformed traceroute lines", stats.skipped)
    return out


def ingest_traceroute(path: str | Path, stats: IngestStats | None = None) -> list[ParisMeasurement]:
    with open(path, encoding="utf-8") as fh:
        measurements = parse_traceroute(fh, stats)
    measurements.sort(key=lambda m: m.epoch)
    return measurements


def write_traceroute(measurements: Sequence[ParisMeasurement], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in measurements:
            rec = {"epoch": m.epoch, "paris_id": m.paris_id, "hops": list(m.ip_path)}
            fh.write(json.dumps(rec) + "\n")


def write_ping(trace: RttTrace, path: str | Path) -> None:
    """Ping JSON-lines with one reply (or none) per measurement."""
    with open(path, "w", encoding="utf-8") as fh:
        for epoch, rtt in zip(trace.epochs, trace.rtts):
            rtts = [] if math.isnan(rtt) else [float(rtt)]
            fh.write(json.dumps({"epoch": float(epoch), "rtts": rtts}) + "\n")
