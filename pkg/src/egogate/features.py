"""Log-mel statistics front-end.

Each window becomes 128 numbers: the mean and standard deviation over
frames of 64 log-mel band magnitudes (25 ms frames, 10 ms hop, Hann taper,
125-7500 Hz). Features are ordered ``[means..., stds...]``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from egogate.audio import TARGET_RATE, AudioWindow

FRAME_SEC = 0.025
HOP_SEC = 0.010
N_FFT = 512
N_MELS = 64
F_MIN = 125.0
F_MAX = 7500.0
LOG_OFFSET = 1e-6
FEATURE_DIM = 2 * N_MELS


def hz_to_mel(hz):
    return 1127.0 * np.log1p(np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * np.expm1(np.asarray(mel, dtype=np.float64) / 1127.0)


def mel_band_centers(n_mels: int = N_MELS, f_min: float = F_MIN, f_max: float = F_MAX) -> np.ndarray:
    """Center frequency (Hz) of each triangular mel band."""
    edges = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    return mel_to_hz(edges[1:-1])


@lru_cache(maxsize=4)
def mel_filterbank(sample_rate: int = TARGET_RATE, n_fft: int = N_FFT,
                   n_mels: int = N_MELS, f_min: float = F_MIN,
                   f_max: float = F_MAX) -> np.ndarray:
    """Triangular weights in the mel domain, shape ``(n_fft // 2 + 1, n_mels)``."""
    bin_mel = hz_to_mel(np.fft.rfftfreq(n_fft, d=1.0 / sample_rate))
    edges = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    lower, center, upper = edges[:-2], edges[1:-1], edges[2:]
    rising = (bin_mel[:, None] - lower) / (center - lower)
    falling = (upper - bin_mel[:, None]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights[0, :] = 0.0  # DC carries no band energy
    weights.setflags(write=False)
    return weights


def log_mel_spectrogram(samples: np.ndarray, sample_rate: int = TARGET_RATE) -> np.ndarray:
    """Frames x bands matrix of ``log(mel_magnitude + 1e-6)``."""
    frame = int(round(FRAME_SEC * sample_rate))
    hop = int(round(HOP_SEC * sample_rate))
    x = np.asarray(samples, dtype=np.float64)
    if x.shape[0] < frame:
        x = np.pad(x, (0, frame - x.shape[0]))
    frames = np.lib.stride_tricks.sliding_window_view(x, frame)[::hop]
    taper = np.hanning(frame + 1)[:-1]  # periodic Hann
    magnitude = np.abs(np.fft.rfft(frames * taper, n=N_FFT, axis=1))
    mel = magnitude @ mel_filterbank(sample_rate)
    return np.log(mel + LOG_OFFSET)


def extract_features(window: AudioWindow) -> np.ndarray:
    if window.sample_rate != TARGET_RATE:
        raise ValueError(
            f"features need {TARGET_RATE} Hz audio, window is {window.sample_rate} Hz"
        )
    spec = log_mel_spectrogram(window.samples, window.sample_rate)
    # shifting by the first frame keeps constant bands at exactly zero spread
    shifted = spec - spec[0]
    return np.concatenate([spec[0] + shifted.mean(axis=0), shifted.std(axis=0)])
