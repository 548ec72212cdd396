"""Scanpath record persistence: events CSV, per-frame trace CSV, run metadata.

One record becomes three sibling files sharing a stem:

    {stem}_events.csv   columns: event,start_frame,start_t_ms,end_frame,
                        end_t_ms,x_start,y_start,x_end,y_end,model_id,
                        gt_id,category,amplitude_dva,angle_deg
    {stem}_trace.csv    columns: frame,t_ms,x,y
    {stem}_meta.json    video_id, seed, config hash, package version

Floats are written with repr (shortest round-trip form), so parsing
restores the exact in-memory values and identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from . import __version__
from .core import EventKind, FoveationCategory, GazeEvent, GazePoint, ScanpathRecord

EVENT_COLUMNS = [
    "event",
    "start_frame",
    "start_t_ms",
    "end_frame",
    "end_t_ms",
    "x_start",
    "y_start",
    "x_end",
    "y_end",
    "model_id",
    "gt_id",
    "category",
    "amplitude_dva",
    "angle_deg",
]

TRACE_COLUMNS = ["frame", "t_ms", "x", "y"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def events_csv_text(record: ScanpathRecord) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EVENT_COLUMNS)
    for e in record.events:
        writer.writerow(
            [
                e.kind.value,
                e.start.frame,
                _fmt(e.start.t_ms),
                e.end.frame,
                _fmt(e.end.t_ms),
                _fmt(e.start.x_px),
                _fmt(e.start.y_px),
                _fmt(e.end.x_px),
                _fmt(e.end.y_px),
                _fmt(e.target_model_id),
                _fmt(e.target_gt_id),
                e.category.value if e.category is not None else "",
                _fmt(e.amplitude_dva),
                _fmt(e.angle_deg),
            ]
        )
    return out.getvalue()


def trace_csv_text(record: ScanpathRecord) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for p in record.trace:
        writer.writerow([p.frame, _fmt(p.t_ms), _fmt(p.x_px), _fmt(p.y_px)])
    return out.getvalue()


def record_stem(record: ScanpathRecord) -> str:
    return f"{record.video_id}_seed{record.seed:04d}"


def save_record(
    record: ScanpathRecord, outdir: str | Path, metadata: dict | None = None
) -> Path:
    """Write the three record files; returns the events CSV path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = record_stem(record)
    events_path = outdir / f"{stem}_events.csv"
    events_path.write_text(events_csv_text(record))
    (outdir / f"{stem}_trace.csv").write_text(trace_csv_text(record))
    meta = {
        "video_id": record.video_id,
        "seed": record.seed,
        "package_version": __version__,
    }
    if metadata:
        meta.update(metadata)
    (outdir / f"{stem}_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return events_path


def _opt_int(raw: str) -> int | None:
    return int(raw) if raw else None


def _opt_float(raw: str) -> float | None:
    return float(raw) if raw else None


def load_record(events_path: str | Path) -> ScanpathRecord:
    """Rebuild a record from its events CSV (sibling trace/meta files included)."""
    events_path = Path(events_path)
    stem = events_path.name.removesuffix("_events.csv")
    meta_path = events_path.with_name(f"{stem}_meta.json")
    trace_path = events_path.with_name(f"{stem}_trace.csv")

    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    video_id = meta.get("video_id", stem)
    seed = int(meta.get("seed", 0))

    events: list[GazeEvent] = []
    with events_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != EVENT_COLUMNS:
            raise ValueError(
                f"{events_path.name}: unexpected columns {reader.fieldnames}"
            )
        for row in reader:
            events.append(
                GazeEvent(
                    kind=EventKind(row["event"]),
                    start=GazePoint(
                        float(row["x_start"]),
                        float(row["y_start"]),
                        int(row["start_frame"]),
                        float(row["start_t_ms"]),
                    ),
                    end=GazePoint(
                        float(row["x_end"]),
                        float(row["y_end"]),
                        int(row["end_frame"]),
                        float(row["end_t_ms"]),
                    ),
                    target_model_id=_opt_int(row["model_id"]),
                    target_gt_id=_opt_int(row["gt_id"]),
                    amplitude_dva=_opt_float(row["amplitude_dva"]),
                    angle_deg=_opt_float(row["angle_deg"]),
                    category=FoveationCategory(row["category"]) if row["category"] else None,
                )
            )

    trace: list[GazePoint] = []
    if trace_path.exists():
        with trace_path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                trace.append(
                    GazePoint(
                        float(row["x"]), float(row["y"]), int(row["frame"]), float(row["t_ms"])
                    )
                )
    return ScanpathRecord(video_id=video_id, seed=seed, events=events, trace=trace)


def load_records(directory: str | Path) -> list[ScanpathRecord]:
    """Load every record in a directory, sorted by filename."""
    directory = Path(directory)
    paths = sorted(directory.glob("*_events.csv"))
    return [load_record(p) for p in paths]
