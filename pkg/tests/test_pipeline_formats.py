import json

import numpy as np
import pytest

from egogate.audio import AudioClip, WindowSpec
from egogate.errors import ClipTooShortError, EgogateError
from egogate.formats import (
    FormatError,
    LabelRecord,
    format_labels,
    format_trace,
    intervals_to_json,
    plan_to_json,
    read_intervals,
    read_labels,
    read_trace,
)
from egogate.gating import FrameTimeline, apply_intervals
from egogate.model import ClassifierHead
from egogate.pipeline import classify_trace, load_corpus
from egogate.synth import make_corpus
from egogate.trigger import ActivationInterval, ProbabilityTrace


def test_classify_trace_shape_and_zero_head(rng):
    clip = AudioClip(rng.uniform(-1, 1, 160_000), 16000)
    trace = classify_trace(ClassifierHead.zeros(128), clip, WindowSpec(4, 2))
    np.testing.assert_array_equal(trace.start_sec, [0, 2, 4, 6])
    np.testing.assert_allclose(trace.p, 0.5)


def test_classify_trace_deterministic_and_short(rng):
    head = ClassifierHead.initialize(128, seed=0)
    clip = AudioClip(rng.uniform(-1, 1, 96_000), 16000)
    a = classify_trace(head, clip, WindowSpec())
    b = classify_trace(head, clip, WindowSpec())
    np.testing.assert_array_equal(a.p, b.p)
    with pytest.raises(ClipTooShortError):
        classify_trace(head, AudioClip(np.zeros(1000), 16000), WindowSpec())


def test_trace_csv_roundtrip(tmp_path):
    trace = ProbabilityTrace.from_probs([0.1234567, 0.9, 0.0], hop_sec=2.0)
    text = format_trace(trace)
    assert text.splitlines()[0] == "start_sec,p_c1"
    assert text.splitlines()[1] == "0.000000,0.123457"
    (tmp_path / "t.csv").write_text(text)
    back = read_trace(tmp_path / "t.csv")
    assert back.hop_sec == 2.0
    np.testing.assert_allclose(back.p, [0.123457, 0.9, 0.0])


def test_trace_csv_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("time,p\n0,0.1\n")
    with pytest.raises(FormatError):
        read_trace(tmp_path / "bad.csv")
    (tmp_path / "one.csv").write_text("start_sec,p_c1\n0,0.1\n")
    with pytest.raises(FormatError):
        read_trace(tmp_path / "one.csv")
    assert read_trace(tmp_path / "one.csv", hop_sec=2.0).hop_sec == 2.0


def test_intervals_json_roundtrip(tmp_path):
    ivs = [ActivationInterval(0.0, 4.0), ActivationInterval(6.5, 8.0)]
    text = intervals_to_json(ivs)
    assert json.loads(text) == [{"start_sec": 0.0, "stop_sec": 4.0}, {"start_sec": 6.5, "stop_sec": 8.0}]
    (tmp_path / "i.json").write_text(text)
    assert read_intervals(tmp_path / "i.json") == ivs
    (tmp_path / "bad.json").write_text('[{"start": 1}]')
    with pytest.raises(FormatError):
        read_intervals(tmp_path / "bad.json")


def test_plan_json():
    plan = apply_intervals(FrameTimeline(2, 5), [[1.0, 2.0]])
    assert json.loads(plan_to_json(plan)) == {"fps": 2, "duration_sec": 5, "captured_intervals": [[1.0, 2.0]]}


def test_labels_roundtrip_and_validation(tmp_path):
    recs = [LabelRecord("a.wav", 1), LabelRecord("b.wav", 0)]
    (tmp_path / "l.jsonl").write_text(format_labels(recs))
    assert read_labels(tmp_path / "l.jsonl") == recs
    (tmp_path / "bad.jsonl").write_text('{"clip_file": "a.wav", "is_hand_object_interaction": 2}\n')
    with pytest.raises(FormatError):
        read_labels(tmp_path / "bad.jsonl")


def test_load_corpus(tmp_path):
    labels = make_corpus(tmp_path, n_clips=6, duration_sec=6.0, seed=1)
    X, y, owner = load_corpus(labels, tmp_path, WindowSpec(4, 2))
    assert X.shape == (12, 128)  # 2 windows per 6 s clip
    assert owner.tolist() == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5]
    assert set(y.tolist()) <= {0, 1}


def test_load_corpus_missing_file(tmp_path):
    (tmp_path / "l.jsonl").write_text(format_labels([LabelRecord("ghost.wav", 1)]))
    with pytest.raises(EgogateError, match="ghost.wav"):
        load_corpus(tmp_path / "l.jsonl", tmp_path, WindowSpec())
