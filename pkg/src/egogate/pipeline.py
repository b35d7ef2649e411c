"""Glue between audio, features and the classifier head."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from egogate.audio import AudioClip, WindowSpec, load_wav, preprocess, slide_windows
from egogate.errors import ClipTooShortError, EgogateError
from egogate.features import extract_features
from egogate.formats import read_labels
from egogate.model import ClassifierHead, predict_proba
from egogate.trigger import ProbabilityTrace


def clip_features(clip: AudioClip, spec: WindowSpec) -> tuple[np.ndarray, np.ndarray]:
    """Window start times and the ``(n_windows, 128)`` feature matrix."""
    windows = slide_windows(clip, spec)
    starts = np.array([w.start_sec for w in windows])
    return starts, np.stack([extract_features(w) for w in windows])


def classify_trace(head: ClassifierHead, clip: AudioClip, spec: WindowSpec) -> ProbabilityTrace:
    """``P(C1)`` for each window of an already preprocessed clip."""
    starts, X = clip_features(clip, spec)
    return ProbabilityTrace(starts, predict_proba(head, X), spec.w_h)


def load_clip(path) -> AudioClip:
    return preprocess(load_wav(path))


def load_corpus(labels_file, audio_dir, spec: WindowSpec):
    """Features and labels for every window of every labelled clip.

    Every window inherits its clip's label. Returns ``(X, y, clip_index)``.
    """
    audio_dir = Path(audio_dir)
    records = read_labels(labels_file)
    if not records:
        raise EgogateError(f"{labels_file}: no labelled clips")
    feats, labels, owner = [], [], []
    for i, rec in enumerate(records):
        path = audio_dir / rec.clip_file
        if not path.is_file():
            raise EgogateError(f"audio file not found: {path}")
        try:
            _, X = clip_features(load_clip(path), spec)
        except ClipTooShortError as exc:
            raise EgogateError(f"{path}: {exc}") from exc
        feats.append(X)
        labels += [rec.label] * len(X)
        owner += [i] * len(X)
    return np.vstack(feats), np.array(labels), np.array(owner)
