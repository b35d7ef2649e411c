"""Classification metrics, threshold sweeps and false-positive statistics.

Class C1 (hand-object interaction) is the positive class throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionCounts":
        """Same counts with C0 treated as positive."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassMetrics:
    c0: PRF
    c1: PRF
    weighted: PRF
    # names of quantities that hit a zero denominator and were set to 0
    undefined: tuple[str, ...] = field(default=())

    def to_dict(self, digits: int = 2) -> dict:
        def row(m: PRF):
            return {"precision": round(m.precision, digits), "recall": round(m.recall, digits),
                    "f1": round(m.f1, digits), "support": m.support}
        return {"C0": row(self.c0), "C1": row(self.c1),
                "weighted_avg": row(self.weighted), "undefined": list(self.undefined)}


def _ratio(num: float, den: float) -> tuple[float, bool]:
    return (num / den, False) if den > 0 else (0.0, True)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def confusion(predictions, truths) -> ConfusionCounts:
    pred = np.asarray(predictions).astype(bool)
    true = np.asarray(truths).astype(bool)
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.shape} predictions vs {true.shape} truths")
    return ConfusionCounts(
        tp=int(np.sum(pred & true)),
        fp=int(np.sum(pred & ~true)),
        tn=int(np.sum(~pred & ~true)),
        fn=int(np.sum(~pred & true)),
    )


def _positive_prf(c: ConfusionCounts, tag: str, flags: list[str]) -> PRF:
    precision, bad_p = _ratio(c.tp, c.tp + c.fp)
    recall, bad_r = _ratio(c.tp, c.tp + c.fn)
    if bad_p:
        flags.append(f"{tag}.precision")
    if bad_r:
        flags.append(f"{tag}.recall")
    return PRF(precision, recall, f1_score(precision, recall), c.tp + c.fn)


def weighted_average(values, supports) -> float:
    values = np.asarray(values, dtype=np.float64)
    supports = np.asarray(supports, dtype=np.float64)
    return float(np.sum(values * supports) / np.sum(supports))


def metrics(counts: ConfusionCounts, supports: tuple[int, int] | None = None) -> ClassMetrics:
    """Per-class precision/recall/F1 plus support-weighted averages.

    ``supports`` defaults to the true class sizes implied by ``counts``.
    """
    if counts.total <= 0:
        raise ValueError("confusion counts are empty")
    flags: list[str] = []
    c1 = _positive_prf(counts, "C1", flags)
    c0 = _positive_prf(counts.swapped(), "C0", flags)
    if supports is not None:
        c0 = PRF(c0.precision, c0.recall, c0.f1, int(supports[0]))
        c1 = PRF(c1.precision, c1.recall, c1.f1, int(supports[1]))
    sup = (c0.support, c1.support)
    if sum(sup) == 0:
        weighted = PRF(0.0, 0.0, 0.0, 0)
        flags.append("weighted")
    else:
        weighted = PRF(
            weighted_average([c0.precision, c1.precision], sup),
            weighted_average([c0.recall, c1.recall], sup),
            weighted_average([c0.f1, c1.f1], sup),
            sum(sup),
        )
    return ClassMetrics(c0, c1, weighted, tuple(flags))


def evaluate(scores, truths, tau: float = 0.4) -> ClassMetrics:
    scores = np.asarray(scores, dtype=np.float64)
    return metrics(confusion(scores >= tau, truths))


def threshold_sweep(scores, truths, taus) -> list[tuple[float, PRF]]:
    """C1 precision/recall/F1 when predicting C1 iff ``score >= tau``."""
    scores = np.asarray(scores, dtype=np.float64)
    out = []
    for tau in taus:
        c = confusion(scores >= tau, truths)
        out.append((float(tau), _positive_prf(c, "C1", [])))
    return out


def false_positive_rate(negative_scores, tau: float) -> float:
    """Fraction of known-negative scores at or above ``tau``."""
    s = np.asarray(negative_scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no negative examples")
    return float(np.mean(s >= tau))


def fppm(predicted, truth, duration_sec: float) -> float:
    """False positives per minute.

    A predicted interval counts as a false positive when it overlaps no
    ground-truth span (touching endpoints do not count as overlap).
    """
    if not duration_sec > 0:
        raise ValueError("duration must be positive")
    spans = [(_start(t), _stop(t)) for t in truth]
    fp = 0
    for iv in predicted:
        a, b = _start(iv), _stop(iv)
        if not any(a < d and c < b for c, d in spans):
            fp += 1
    return fp / (duration_sec / 60.0)


def _start(iv):
    return iv.start_sec if hasattr(iv, "start_sec") else float(iv[0])


def _stop(iv):
    return iv.stop_sec if hasattr(iv, "stop_sec") else float(iv[1])
