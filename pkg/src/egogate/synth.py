"""Deterministic synthetic audio for fixtures and demos.

Interaction clips are sparse broadband clicks and scrapes over a faint
floor; background clips are a low hum with soft noise. The two are easy to
tell apart from log-mel statistics, which is the point: they exercise the
pipeline, they are not a benchmark.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from egogate.audio import AudioClip, write_wav
from egogate.formats import LabelRecord, format_labels


def interaction_audio(duration_sec: float, rate: int, rng: np.random.Generator) -> np.ndarray:
    n = int(round(duration_sec * rate))
    x = 0.01 * rng.standard_normal(n)
    n_events = max(1, int(duration_sec * rng.uniform(2.0, 5.0)))
    for _ in range(n_events):
        length = int(rate * rng.uniform(0.02, 0.15))
        start = int(rng.integers(0, max(1, n - length)))
        decay = np.exp(-np.arange(length) / (length / rng.uniform(3.0, 8.0)))
        x[start:start + length] += rng.uniform(0.3, 0.9) * rng.standard_normal(length) * decay
    return x


def background_audio(duration_sec: float, rate: int, rng: np.random.Generator) -> np.ndarray:
    n = int(round(duration_sec * rate))
    t = np.arange(n) / rate
    f0 = rng.uniform(90.0, 220.0)
    hum = 0.3 * np.sin(2 * np.pi * f0 * t + rng.uniform(0, 2 * np.pi))
    hum += 0.1 * np.sin(2 * np.pi * 2 * f0 * t)
    noise = np.convolve(rng.standard_normal(n), np.ones(32) / 32, mode="same")
    return hum + 0.05 * noise


def make_corpus(out_dir, n_clips: int = 40, positive_fraction: float = 0.75,
                duration_sec: float = 4.0, rate: int = 16_000, seed: int = 0) -> Path:
    """Write ``n_clips`` WAV files plus ``labels.jsonl``; returns the labels path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n_pos = int(round(n_clips * positive_fraction))
    labels = np.array([1] * n_pos + [0] * (n_clips - n_pos))
    rng.shuffle(labels)
    records = []
    for i, y in enumerate(labels):
        gen = interaction_audio if y else background_audio
        name = f"clip_{i:04d}.wav"
        write_wav(out_dir / name, AudioClip(gen(duration_sec, rate, rng), rate))
        records.append(LabelRecord(name, int(y)))
    labels_path = out_dir / "labels.jsonl"
    labels_path.write_text(format_labels(records))
    return labels_path


def make_recording(segments, rate: int = 16_000, seed: int = 0) -> tuple[AudioClip, list[list[float]]]:
    """Concatenate ``(is_interaction, seconds)`` segments into one clip.

    Returns the clip and the interaction spans ``[[start, stop], ...]``.
    """
    rng = np.random.default_rng(seed)
    parts, spans, t = [], [], 0.0
    for is_hoi, seconds in segments:
        gen = interaction_audio if is_hoi else background_audio
        parts.append(gen(seconds, rate, rng))
        if is_hoi:
            spans.append([t, t + seconds])
        t += seconds
    x = np.concatenate(parts)
    return AudioClip(x / np.max(np.abs(x)), rate), spans


def random_segments(total_sec: float, seed: int = 0, min_sec: float = 4.0,
                    max_sec: float = 12.0) -> list[tuple[bool, float]]:
    """Alternating background/interaction segments covering ``total_sec``."""
    rng = np.random.default_rng(seed)
    segments, t, hoi = [], 0.0, False
    while t < total_sec:
        seconds = min(float(rng.integers(int(min_sec), int(max_sec) + 1)), total_sec - t)
        segments.append((hoi, seconds))
        t += seconds
        hoi = not hoi
    return segments
