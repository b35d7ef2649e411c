"""egogate: audio-triggered frame gating for wearable cameras."""

from egogate.audio import (
    AudioClip,
    AudioWindow,
    NoiseSpec,
    WindowSpec,
    add_white_noise,
    load_wav,
    normalize_amplitude,
    resample,
    slide_windows,
    to_mono,
)
from egogate.trigger import (
    ActivationInterval,
    ProbabilityTrace,
    merge_intervals,
    run_fixed_trigger,
    run_hysteresis,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationInterval",
    "AudioClip",
    "AudioWindow",
    "NoiseSpec",
    "ProbabilityTrace",
    "WindowSpec",
    "add_white_noise",
    "load_wav",
    "merge_intervals",
    "normalize_amplitude",
    "resample",
    "run_fixed_trigger",
    "run_hysteresis",
    "slide_windows",
    "to_mono",
]
