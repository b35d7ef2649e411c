"""Trigger strategies that turn a probability trace into capture intervals.

Two controllers are provided:

* ``run_fixed_trigger`` keeps capture on for ``t_fixed`` seconds after every
  window whose probability reaches ``tau``.
* ``run_hysteresis`` is a two-threshold ON/OFF state machine that arms at
  ``tau_on`` and releases below ``tau_off``.

Both return sorted, disjoint, non-touching :class:`ActivationInterval` lists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, order=True)
class ActivationInterval:
    start_sec: float
    stop_sec: float

    def __post_init__(self):
        if not self.stop_sec > self.start_sec:
            raise ValueError(f"interval stop {self.stop_sec} must exceed start {self.start_sec}")

    @property
    def duration(self) -> float:
        return self.stop_sec - self.start_sec

    def to_list(self) -> list[float]:
        return [self.start_sec, self.stop_sec]


@dataclass(frozen=True)
class ProbabilityTrace:
    """Per-window ``P(C1)`` samples at a constant hop."""

    start_sec: np.ndarray
    p: np.ndarray
    hop_sec: float

    def __post_init__(self):
        t = np.asarray(self.start_sec, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        if t.shape != p.shape or t.ndim != 1:
            raise ValueError("start_sec and p must be 1-D and equally long")
        if self.hop_sec <= 0:
            raise ValueError("hop_sec must be positive")
        if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must lie in [0, 1]")
        if len(t) > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ValueError("start times must be strictly increasing")
            if not np.allclose(steps, self.hop_sec, rtol=0, atol=1e-6):
                raise ValueError(f"start times are not spaced by hop {self.hop_sec}")
        object.__setattr__(self, "start_sec", t)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_probs(cls, p, hop_sec: float = 2.0, offset: float = 0.0) -> "ProbabilityTrace":
        p = np.asarray(p, dtype=np.float64)
        return cls(offset + hop_sec * np.arange(len(p)), p, hop_sec)

    def __len__(self):
        return len(self.p)


def merge_intervals(intervals) -> list[ActivationInterval]:
    """Sort and coalesce overlapping or touching intervals."""
    items = []
    for iv in intervals:
        if not isinstance(iv, ActivationInterval):
            iv = ActivationInterval(float(iv[0]), float(iv[1]))
        items.append(iv)
    items.sort()
    merged: list[ActivationInterval] = []
    for iv in items:
        if merged and iv.start_sec <= merged[-1].stop_sec:
            last = merged[-1]
            if iv.stop_sec > last.stop_sec:
                merged[-1] = ActivationInterval(last.start_sec, iv.stop_sec)
        else:
            merged.append(iv)
    return merged


def _check_unit(name, value):
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def run_fixed_trigger(trace: ProbabilityTrace, tau: float = 0.4, t_fixed: float = 1.0) -> list[ActivationInterval]:
    """Union of ``[t, t + t_fixed]`` over every sample with ``p >= tau``."""
    if len(trace) == 0:
        raise ValueError("empty probability trace")
    _check_unit("tau", tau)
    if t_fixed <= 0:
        raise ValueError("t_fixed must be positive")
    hits = trace.start_sec[trace.p >= tau]
    return merge_intervals(ActivationInterval(float(t), float(t) + t_fixed) for t in hits)


def hysteresis_states(p, tau_on: float, tau_off: float) -> np.ndarray:
    """State after each sample (True = ON), starting from OFF."""
    states = np.zeros(len(p), dtype=bool)
    on = False
    for i, value in enumerate(p):
        if not on and value >= tau_on:
            on = True
        elif on and value < tau_off:
            on = False
        states[i] = on
    return states


def run_hysteresis(trace: ProbabilityTrace, tau_on: float = 0.8, tau_off: float = 0.7) -> list[ActivationInterval]:
    """Intervals of the ON state.

    An interval opens at the sample that switches the machine ON and closes
    at the sample that switches it OFF. If the trace ends while ON, the
    interval is closed one hop after the last sample.
    """
    if len(trace) == 0:
        raise ValueError("empty probability trace")
    _check_unit("tau_on", tau_on)
    _check_unit("tau_off", tau_off)
    if not tau_on > tau_off:
        raise ValueError(f"tau_on ({tau_on}) must exceed tau_off ({tau_off})")
    states = hysteresis_states(trace.p, tau_on, tau_off)
    t = trace.start_sec
    out = []
    opened = None
    for i, on in enumerate(states):
        if on and opened is None:
            opened = t[i]
        elif not on and opened is not None:
            out.append(ActivationInterval(float(opened), float(t[i])))
            opened = None
    if opened is not None:
        out.append(ActivationInterval(float(opened), float(t[-1] + trace.hop_sec)))
    return merge_intervals(out)


def total_active(intervals) -> float:
    return float(sum(iv.duration for iv in intervals))
