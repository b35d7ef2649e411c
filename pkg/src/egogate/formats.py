"""Readers and writers for the on-disk formats.

* labels: JSON Lines, ``{"clip_file": str, "is_hand_object_interaction": 0|1}``
* probability trace: CSV ``start_sec,p_c1`` with 6 decimals
* activation intervals: JSON array of ``{"start_sec", "stop_sec"}``
* gating plan: JSON ``{"fps", "duration_sec", "captured_intervals": [[a, b], ...]}``
* gating report: JSON of :class:`~egogate.gating.GatingReport` fields
* scores: CSV ``p_c1,label``
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from egogate.errors import EgogateError
from egogate.gating import GatingPlan, GatingReport
from egogate.trigger import ActivationInterval, ProbabilityTrace, merge_intervals


class FormatError(EgogateError, ValueError):
    """A file does not match its expected schema."""


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


# -- labels ------------------------------------------------------------------


@dataclass(frozen=True)
class LabelRecord:
    clip_file: str
    label: int


def read_labels(path) -> list[LabelRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            label = obj["is_hand_object_interaction"]
            clip = obj["clip_file"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"{path}:{lineno}: bad label record ({exc!r})") from exc
        if label not in (0, 1) or isinstance(label, bool) or not isinstance(clip, str):
            raise FormatError(f"{path}:{lineno}: label must be 0 or 1 and clip_file a string")
        records.append(LabelRecord(clip, int(label)))
    return records


def format_labels(records) -> str:
    return "".join(json.dumps({"clip_file": r.clip_file, "is_hand_object_interaction": r.label}) + "\n"
                   for r in records)


# -- traces and scores -------------------------------------------------------


def format_trace(trace: ProbabilityTrace) -> str:
    buf = io.StringIO()
    buf.write("start_sec,p_c1\n")
    for t, p in zip(trace.start_sec, trace.p):
        buf.write(f"{t:.6f},{p:.6f}\n")
    return buf.getvalue()


def _read_csv(path, columns):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames[:len(columns)]) != list(columns):
            raise FormatError(f"{path}: expected header {','.join(columns)}")
        try:
            return [tuple(float(row[c]) for c in columns) for row in reader]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{path}: non-numeric value ({exc})") from exc


def read_trace(path, hop_sec: float | None = None) -> ProbabilityTrace:
    """Load a trace; the hop is inferred from the spacing unless only one sample exists."""
    rows = _read_csv(path, ("start_sec", "p_c1"))
    if not rows:
        raise FormatError(f"{path}: empty trace")
    t = np.array([r[0] for r in rows])
    p = np.array([r[1] for r in rows])
    if len(t) > 1:
        hop_sec = float(np.round(t[1] - t[0], 6))
    elif hop_sec is None:
        raise FormatError(f"{path}: single-sample trace needs an explicit hop")
    try:
        return ProbabilityTrace(t, p, hop_sec)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def format_scores(scores, labels) -> str:
    lines = ["p_c1,label"] + [f"{s:.6f},{int(y)}" for s, y in zip(scores, labels)]
    return "\n".join(lines) + "\n"


def read_scores(path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_csv(path, ("p_c1", "label"))
    if not rows:
        raise FormatError(f"{path}: no scores")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1].astype(int)


# -- intervals, plans, reports -----------------------------------------------


def intervals_to_json(intervals) -> str:
    return dumps_json([{"start_sec": round(iv.start_sec, 6), "stop_sec": round(iv.stop_sec, 6)}
                       for iv in intervals])


def read_intervals(path) -> list[ActivationInterval]:
    data = _load_json(path)
    if not isinstance(data, list):
        raise FormatError(f"{path}: expected a JSON array of intervals")
    try:
        items = [ActivationInterval(float(d["start_sec"]), float(d["stop_sec"])) for d in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed interval ({exc!r})") from exc
    return merge_intervals(items)


def plan_to_json(plan: GatingPlan) -> str:
    return dumps_json({
        "fps": plan.timeline.fps,
        "duration_sec": plan.timeline.duration_sec,
        "captured_intervals": [[round(a, 6), round(b, 6)] for a, b in plan.captured_intervals()],
    })


def report_to_json(rep: GatingReport, **extra) -> str:
    return dumps_json({**extra, **rep.to_dict()})


def read_report(path) -> GatingReport:
    d = _load_json(path)
    try:
        return GatingReport(
            frames_total=int(d["frames_total"]),
            frames_captured=int(d["frames_captured"]),
            frames_reduced_pct=float(d["frames_reduced_pct"]),
            capture_fraction=float(d["capture_fraction"]),
            est_bitrate_mbps=float(d["est_bitrate_mbps"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed gating report ({exc!r})") from exc


def read_power_config(path) -> list[dict]:
    data = _load_json(path)
    if not isinstance(data, list):
        raise FormatError(f"{path}: power config must be a JSON list")
    return data
