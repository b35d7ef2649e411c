"""Offline frame gating: which frames of a video a trigger would have captured.

Frame ``i`` sits at timestamp ``i / fps``. A frame is captured when that
timestamp falls in a half-open interval ``[start, stop)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from egogate.trigger import ActivationInterval, merge_intervals


@dataclass(frozen=True)
class FrameTimeline:
    fps: float
    duration_sec: float

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not self.duration_sec > 0:
            raise ValueError(f"duration must be positive, got {self.duration_sec}")

    @property
    def frame_count(self) -> int:
        # round first so 4.9 * 30 = 146.99999999999997 still floors to 147
        return math.floor(round(self.duration_sec * self.fps, 9))

    def timestamps(self) -> np.ndarray:
        return np.arange(self.frame_count) / self.fps


@dataclass(frozen=True)
class GatingPlan:
    timeline: FrameTimeline
    captured: np.ndarray

    def __post_init__(self):
        captured = np.asarray(self.captured, dtype=bool)
        if captured.shape != (self.timeline.frame_count,):
            raise ValueError("captured mask length must equal the frame count")
        object.__setattr__(self, "captured", captured)

    def captured_intervals(self) -> list[list[float]]:
        """Run-length form: ``[first_ts, last_ts + 1/fps)`` for each run of captured frames."""
        fps = self.timeline.fps
        padded = np.concatenate([[False], self.captured, [False]])
        edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
        return [[float(a / fps), float(b / fps)] for a, b in zip(edges[::2], edges[1::2])]


@dataclass(frozen=True)
class GatingReport:
    frames_total: int
    frames_captured: int
    frames_reduced_pct: float
    capture_fraction: float
    est_bitrate_mbps: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["frames_reduced_pct"] = round(d["frames_reduced_pct"], 2)
        d["capture_fraction"] = round(d["capture_fraction"], 6)
        d["est_bitrate_mbps"] = round(d["est_bitrate_mbps"], 2)
        return d


def apply_intervals(timeline: FrameTimeline, intervals) -> GatingPlan:
    ts = timeline.timestamps()
    captured = np.zeros(len(ts), dtype=bool)
    for iv in merge_intervals(intervals):
        captured |= (ts >= iv.start_sec) & (ts < iv.stop_sec)
    return GatingPlan(timeline, captured)


def decimate(timeline: FrameTimeline, period_sec: float = 5.0) -> GatingPlan:
    """Keep the first frame at or after each multiple of ``period_sec``."""
    if not period_sec > 0:
        raise ValueError("period_sec must be positive")
    n = timeline.frame_count
    captured = np.zeros(n, dtype=bool)
    k = 0
    while True:
        idx = math.ceil(round(k * period_sec * timeline.fps, 9))
        if idx >= n:
            break
        captured[idx] = True
        k += 1
    return GatingPlan(timeline, captured)


def report(plan: GatingPlan, full_bitrate_mbps: float) -> GatingReport:
    """Frame reduction and bitrate, with bitrate proportional to the captured fraction."""
    if not full_bitrate_mbps > 0:
        raise ValueError("full bitrate must be positive")
    total = int(plan.captured.size)
    if total == 0:
        raise ValueError("timeline has no frames")
    captured = int(np.count_nonzero(plan.captured))
    fraction = captured / total
    return GatingReport(
        frames_total=total,
        frames_captured=captured,
        frames_reduced_pct=100.0 * (1.0 - fraction),
        capture_fraction=fraction,
        est_bitrate_mbps=full_bitrate_mbps * fraction,
    )


def estimated_bitrate(full_bitrate_mbps: float, frames_reduced_pct: float) -> float:
    return full_bitrate_mbps * (1.0 - frames_reduced_pct / 100.0)


def aggregate_reports(reports, full_bitrate_mbps: float | None = None) -> GatingReport:
    """Pool several videos; the reduction is weighted by frame count."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    total = sum(r.frames_total for r in reports)
    captured = sum(r.frames_captured for r in reports)
    fraction = captured / total
    if full_bitrate_mbps is None:
        # frame-weighted mean of per-video bitrates
        bitrate = sum(r.est_bitrate_mbps * r.frames_total for r in reports) / total
    else:
        bitrate = full_bitrate_mbps * fraction
    return GatingReport(total, captured, 100.0 * (1.0 - fraction), fraction, bitrate)


def complement(intervals, duration_sec: float) -> list[ActivationInterval]:
    """Spans of ``[0, duration)`` not covered by ``intervals``."""
    gaps = []
    cursor = 0.0
    for iv in merge_intervals(intervals):
        start = max(iv.start_sec, 0.0)
        if start >= duration_sec:
            break
        if start > cursor:
            gaps.append(ActivationInterval(cursor, start))
        cursor = max(cursor, iv.stop_sec)
    if cursor < duration_sec:
        gaps.append(ActivationInterval(cursor, duration_sec))
    return gaps


def emit_blackout_expr(intervals, duration_sec: float) -> str:
    """Time expression selecting every frame to black out.

    Each gap ``[a, b)`` renders as ``gte(t,a)*lt(t,b)`` and gaps are joined
    with ``+``, which is usable as an ``enable=`` expression in ffmpeg
    filters. Full coverage yields an empty string.
    """
    return "+".join(f"gte(t,{g.start_sec:.6f})*lt(t,{g.stop_sec:.6f})"
                    for g in complement(intervals, duration_sec))
