"""Command line entry point: ``rttchange <subcommand> ...``.

Every subcommand exits non-zero on failure and prints a one-line JSON error
object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .correlate import DEFAULT_WINDOW_S, correlate
from .detect import PRESETS, PenaltyCriterion, detect, get_preset
from .formats import (
    IngestStats,
    ingest_ping,
    ingest_traceroute,
    read_changepoints,
    read_trace,
    read_truth,
    write_positions,
    write_trace,
)
from .model import GroundTruth, RttTrace, ValidationError, level_and_volatility_diff
from .pathscan import PrefixTable, read_changes, scan, write_changes
from .score import MatchConfig, ScoreReport, score
from .synth import SynthConfig, generate

logger = logging.getLogger("rttchange")

PREFIX_ENV = "RTTCHANGE_PREFIX_TABLE"
IXP_ENV = "RTTCHANGE_IXP_TABLE"
DEFAULT_MIN_SAMPLES = 30000


class CommandError(RuntimeError):
    def __init__(self, code: str, message: str, exit_code: int = 2) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.exit_code = exit_code


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _existing(path: str | None, what: str) -> Path:
    if path is None:
        raise CommandError("missing_argument", f"{what} is required")
    p = Path(path)
    if not p.exists():
        raise CommandError("not_found", f"{what} {p} does not exist")
    return p


def _csv_files(directory: Path) -> dict[str, Path]:
    return {p.stem: p for p in sorted(directory.glob("*.csv"))}


def _write_rows(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def _dump_json(obj, path: Path | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path is None:
        print(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")


# -- generate ---------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> None:
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    base = SynthConfig(n_samples=args.n_samples)
    for i in range(args.count):
        lt = generate(replace(base, seed=args.seed + i))
        stem = f"synth_{i:03d}"
        write_trace(lt.trace, out / "traces" / f"{stem}.csv")
        write_positions(lt.truth.positions, out / "labels" / f"{stem}.csv")
    _dump_json({"config": base.to_dict(), "count": args.count, "first_seed": args.seed}, out / "provenance.json")


# -- ingest -----------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> None:
    stats = IngestStats()
    trace = ingest_ping(_existing(args.ping, "ping file"), args.interval, stats)
    summary = {"lines": stats.lines, "skipped": stats.skipped, "samples": len(trace),
               "timeouts": trace.timeout_count, "kept": len(trace) >= args.min_samples}
    if stats.problems:
        summary["problems"] = stats.problems
    if summary["kept"]:
        write_trace(trace, args.out)
    _dump_json(summary, None)


# -- detect -----------------------------------------------------------------

def _detect_one(job: tuple[str, str, str, int]) -> tuple[int, ...]:
    path, preset, penalty, min_seg_len = job
    return detect(read_trace(path), get_preset(preset, penalty), min_seg_len=min_seg_len).positions


def cmd_detect(args: argparse.Namespace) -> None:
    src = _existing(args.trace, "trace")
    out = Path(args.out)
    if src.is_dir():
        files = _csv_files(src)
        jobs = [(str(p), args.preset, args.penalty, args.min_seg_len) for p in files.values()]
        out.mkdir(parents=True, exist_ok=True)
        for stem, positions in zip(files, _map(_detect_one, jobs, args.jobs)):
            write_positions(positions, out / f"{stem}.csv")
    else:
        write_positions(_detect_one((str(src), args.preset, args.penalty, args.min_seg_len)), out)


# -- score ------------------------------------------------------------------

def _score_one(trace_path: Path, truth_path: Path, det_path: Path, cfg: MatchConfig | None) -> ScoreReport:
    trace = read_trace(trace_path)
    if cfg is None:
        cfg = MatchConfig.from_minutes(interval_s=trace.interval_hint)
    return score(read_truth(truth_path), read_changepoints(det_path), trace, cfg)


def cmd_score(args: argparse.Namespace) -> None:
    truth = _existing(args.truth, "--truth")
    det = _existing(args.detected, "--detected")
    trace = _existing(args.trace, "--trace")
    cfg = None if args.window is None and args.rho is None else MatchConfig(
        window_w=2 if args.window is None else args.window, rho=2 if args.rho is None else args.rho
    )
    if truth.is_dir():
        traces, truths, dets = _csv_files(trace), _csv_files(truth), _csv_files(det)
        stems = sorted(set(traces) & set(truths) & set(dets))
        if not stems:
            raise CommandError("no_match", "no trace/label/detection files share a name")
        reports = {s: _score_one(traces[s], truths[s], dets[s], cfg) for s in stems}
        rows = [{"trace": s, **r.csv_row()} for s, r in reports.items()]
        if args.csv:
            _write_rows(Path(args.csv), ("trace", *ScoreReport.CSV_FIELDS), rows)
        _dump_json({s: r.to_dict() for s, r in reports.items()}, Path(args.out) if args.out else None)
    else:
        report = _score_one(trace, truth, det, cfg)
        if args.csv:
            _write_rows(Path(args.csv), ("trace", *ScoreReport.CSV_FIELDS), [{"trace": trace.stem, **report.csv_row()}])
        _dump_json(report.to_dict(), Path(args.out) if args.out else None)


# -- pathscan ---------------------------------------------------------------

def _tables(args: argparse.Namespace) -> tuple[PrefixTable, PrefixTable | None]:
    prefix = args.prefix_table or os.environ.get(PREFIX_ENV)
    ixp = args.ixp_table or os.environ.get(IXP_ENV)
    prefix_table = PrefixTable.load(_existing(prefix, "prefix table")) if prefix else PrefixTable()
    if not prefix:
        logger.warning("no prefix table given; every hop maps to an unknown AS")
    ixp_table = PrefixTable.load(_existing(ixp, "IXP table")) if ixp else None
    return prefix_table, ixp_table


def cmd_pathscan(args: argparse.Namespace) -> None:
    measurements = ingest_traceroute(_existing(args.traceroute, "traceroute file"))
    prefix_table, ixp_table = _tables(args)
    changes = scan(measurements, prefix_table, ixp_table, args.ifp_mode)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_changes(changes, fh)
    else:
        write_changes(changes, sys.stdout)


# -- correlate --------------------------------------------------------------

def cmd_correlate(args: argparse.Namespace) -> None:
    trace = read_trace(_existing(args.trace, "--trace"))
    cps = read_changepoints(_existing(args.rtt_changes, "--rtt-changes"))
    cps.validate(len(trace))
    with open(_existing(args.path_changes, "--path-changes"), newline="", encoding="utf-8") as fh:
        path_changes = read_changes(fh)
    report = correlate([float(trace.epochs[p]) for p in cps.positions], path_changes, args.window)
    probe = args.probe or Path(args.trace).stem
    if args.csv:
        _write_rows(Path(args.csv), report.CSV_FIELDS, report.csv_rows(probe))
    _dump_json({"probe": probe, **report.to_dict()}, Path(args.out) if args.out else None)


# -- report -----------------------------------------------------------------

def _report_probe(job: dict) -> dict:
    trace = read_trace(job["trace"])
    out = {"probe": job["probe"], "samples": len(trace), "timeouts": trace.timeout_count, "methods": {}}
    if len(trace) < job["min_samples"]:
        out["skipped"] = True
        return out
    path_changes = None
    if job.get("traceroute"):
        prefix_table = PrefixTable.load(job["prefix_table"]) if job.get("prefix_table") else PrefixTable()
        ixp_table = PrefixTable.load(job["ixp_table"]) if job.get("ixp_table") else None
        path_changes = scan(ingest_traceroute(job["traceroute"]), prefix_table, ixp_table, job["ifp_mode"])
    for name in job["presets"]:
        cps = detect(trace, get_preset(name, job["penalty"]))
        truth = GroundTruth(cps.positions)
        chars = [level_and_volatility_diff(trace, truth, i) for i in range(1, len(cps) + 1)]
        entry = {
            "positions": list(cps.positions),
            "epochs": [float(trace.epochs[p]) for p in cps.positions],
            "level_diff": [c[0] for c in chars],
            "volatility_diff": [c[1] for c in chars],
        }
        if path_changes is not None:
            entry["correlation"] = correlate(entry["epochs"], path_changes, job["window"]).to_dict()
        out["methods"][name] = entry
    return out


def cmd_report(args: argparse.Namespace) -> None:
    from . import plotting

    traces = _csv_files(_existing(args.traces, "--traces"))
    if not traces:
        raise CommandError("no_input", f"no trace CSV files in {args.traces}")
    presets = [p.strip() for p in args.presets.split(",") if p.strip()]
    for p in presets:
        get_preset(p)
    trdir = Path(args.traceroutes) if args.traceroutes else None
    prefix = args.prefix_table or os.environ.get(PREFIX_ENV)
    ixp = args.ixp_table or os.environ.get(IXP_ENV)
    jobs = []
    for stem, path in traces.items():
        tr = None
        if trdir is not None:
            for ext in (".jsonl", ".json"):
                if (trdir / f"{stem}{ext}").exists():
                    tr = str(trdir / f"{stem}{ext}")
        jobs.append({
            "probe": stem, "trace": str(path), "presets": presets, "penalty": args.penalty,
            "min_samples": args.min_samples, "traceroute": tr, "prefix_table": prefix,
            "ixp_table": ixp, "ifp_mode": args.ifp_mode, "window": args.window,
        })
    results = _map(_report_probe, jobs, args.jobs)

    out = Path(args.out)
    summary, changes, corr = [], [], []
    for r in results:
        for name, e in r["methods"].items():
            summary.append({"probe": r["probe"], "method": name, "samples": r["samples"],
                            "timeouts": r["timeouts"], "changepoints": len(e["positions"])})
            for p, t, lv, vol in zip(e["positions"], e["epochs"], e["level_diff"], e["volatility_diff"]):
                changes.append({"probe": r["probe"], "method": name, "position": p, "epoch": t,
                                "level_diff": lv, "volatility_diff": vol})
            c = e.get("correlation")
            if c:
                for kind, n in c["counts"].items():
                    prec = c["precision_per_kind"][kind]
                    corr.append({"probe": r["probe"], "method": name, "kind": kind, "n_path_changes": n,
                                 "n_matched": c["matched"][kind], "precision": "" if prec is None else prec})
    _write_rows(out / "summary.csv", ("probe", "method", "samples", "timeouts", "changepoints"), summary)
    _write_rows(out / "changes_long.csv",
                ("probe", "method", "position", "epoch", "level_diff", "volatility_diff"), changes)

    counts = {name: [s["changepoints"] for s in summary if s["method"] == name] for name in presets}
    cdf_rows = []
    for name, values in counts.items():
        x, y = plotting.ecdf(values)
        cdf_rows += [{"method": name, "changepoints": int(v), "cdf": float(f)} for v, f in zip(x, y)]
    _write_rows(out / "count_cdf.csv", ("method", "changepoints", "cdf"), cdf_rows)
    figures = [
        plotting.count_cdf(counts, out / "figures" / "changepoint_count_cdf.png"),
        plotting.change_character(
            {name: ([c["level_diff"] for c in changes if c["method"] == name],
                    [c["volatility_diff"] for c in changes if c["method"] == name]) for name in presets},
            out / "figures" / "change_character.png",
        ),
    ]
    if corr:
        _write_rows(out / "correlation.csv",
                    ("probe", "method", "kind", "n_path_changes", "n_matched", "precision"), corr)
        prec = {f"{c['method']}/{c['kind']}": [] for c in corr}
        for c in corr:
            if c["precision"] != "":
                prec[f"{c['method']}/{c['kind']}"].append(c["precision"])
        figures.append(plotting.precision_cdf(prec, out / "figures" / "correlation_precision_cdf.png"))

    aggregate = {
        "probes": len(results),
        "skipped": sorted(r["probe"] for r in results if r.get("skipped")),
        "methods": {
            name: {
                "total_changepoints": int(sum(counts[name])),
                "median_changepoints": float(np.median(counts[name])) if counts[name] else None,
            }
            for name in presets
        },
        "figures": [str(f.relative_to(out)) for f in figures],
    }
    _dump_json(aggregate, out / "report.json")
    _dump_json(aggregate, None)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rttchange", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic labelled traces")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-samples", type=int, default=SynthConfig.n_samples)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="convert a ping JSON-lines dump into a trace CSV")
    p.add_argument("ping")
    p.add_argument("--out", required=True)
    p.add_argument("--interval", type=float, default=240.0)
    p.add_argument("--min-samples", type=int, default=0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("detect", help="detect changepoints in a trace (or a directory of traces)")
    p.add_argument("--trace", required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), default="cpt_poisson")
    p.add_argument("--penalty", type=PenaltyCriterion.parse, default=PenaltyCriterion.MBIC,
                   help="MBIC, BIC, AIC or HQ")
    p.add_argument("--min-seg-len", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("score", help="score detections against labels")
    p.add_argument("--truth", required=True)
    p.add_argument("--detected", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--window", type=float, default=None, help="shift tolerance in samples (default: 8 min)")
    p.add_argument("--rho", type=float, default=None, help="minimum segment length in samples (default: 8 min)")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pathscan", help="detect AS, IXP and IFP path changes")
    p.add_argument("--traceroute", required=True)
    p.add_argument("--prefix-table", help=f"prefix<TAB>ASN file (env {PREFIX_ENV})")
    p.add_argument("--ixp-table", help=f"prefix<TAB>IXP name file (env {IXP_ENV})")
    p.add_argument("--ifp-mode", choices=("forward", "backward"), default="backward")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pathscan)

    p = sub.add_parser("correlate", help="match RTT changes with path changes")
    p.add_argument("--trace", required=True)
    p.add_argument("--rtt-changes", required=True)
    p.add_argument("--path-changes", required=True)
    p.add_argument("--window", type=float, default=DEFAULT_WINDOW_S, help="seconds")
    p.add_argument("--probe")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("report", help="aggregate detection over many probes, with figures")
    p.add_argument("--traces", required=True, help="directory of trace CSVs")
    p.add_argument("--traceroutes", help="directory of <probe>.jsonl traceroute files")
    p.add_argument("--presets", default="cpt_poisson,cpt_np")
    p.add_argument("--penalty", type=PenaltyCriterion.parse, default=PenaltyCriterion.MBIC)
    p.add_argument("--min-samples", type=int, default=DEFAULT_MIN_SAMPLES)
    p.add_argument("--prefix-table")
    p.add_argument("--ixp-table")
    p.add_argument("--ifp-mode", choices=("forward", "backward"), default="backward")
    p.add_argument("--window", type=float, default=DEFAULT_WINDOW_S)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code:
            print(json.dumps({"error": "usage", "message": "invalid arguments"}), file=sys.stderr)
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CommandError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message}), file=sys.stderr)
        return exc.exit_code
    except (ValidationError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
