"""Audio ingestion, preprocessing, windowing and noise injection.

Every function here is pure: it takes an :class:`AudioClip` and returns a new
one, leaving the input untouched.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from egogate.errors import ClipTooShortError, WavFormatError

TARGET_RATE = 16_000

_FMT_PCM = 1
_FMT_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    """A waveform with its sample rate.

    ``samples`` has shape ``(n,)`` for mono or ``(n, channels)`` for
    multichannel audio, always float64.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim not in (1, 2):
            raise ValueError(f"samples must be 1-D or 2-D, got shape {arr.shape}")
        object.__setattr__(self, "samples", arr)

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 1 else self.samples.shape[1]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_sec(self) -> float:
        return self.num_samples / self.sample_rate


@dataclass(frozen=True)
class WindowSpec:
    """Sliding window duration and hop, both in seconds."""

    w_d: float = 4.0
    w_h: float = 2.0

    def __post_init__(self):
        if self.w_d <= 0 or self.w_h <= 0:
            raise ValueError("window duration and hop must be positive")
        if self.w_h > self.w_d:
            raise ValueError(f"hop {self.w_h} exceeds window duration {self.w_d}")


@dataclass(frozen=True)
class AudioWindow:
    index: int
    start_sec: float
    samples: np.ndarray
    sample_rate: int


@dataclass(frozen=True)
class NoiseSpec:
    """White Gaussian noise, given either as a variance or a target SNR.

    Exactly one of ``variance`` and ``target_snr_db`` must be set.
    """

    variance: float | None = None
    target_snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if (self.variance is None) == (self.target_snr_db is None):
            raise ValueError("set exactly one of variance and target_snr_db")
        if self.variance is not None and self.variance < 0:
            raise ValueError("variance must be >= 0")


# -- WAV I/O -----------------------------------------------------------------


def load_wav(path) -> AudioClip:
    """Read a PCM16 or float32 RIFF/WAVE file with one or two channels.

    16-bit samples are scaled by 1/32768. Channels are kept as columns; use
    :func:`to_mono` to downmix.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise WavFormatError(f"cannot read {path}: {exc}") from exc
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)

    if fmt is None or len(fmt) < 16:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")
    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == _FMT_EXTENSIBLE and len(fmt) >= 26:
        (tag,) = struct.unpack("<H", fmt[24:26])
    if channels not in (1, 2):
        raise WavFormatError(f"{path}: {channels} channels not supported")
    if tag == _FMT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif tag == _FMT_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise WavFormatError(f"{path}: unsupported codec (format {tag}, {bits} bits)")

    frame_bytes = dtype.itemsize * channels
    n_frames = len(payload) // frame_bytes
    if n_frames == 0:
        raise WavFormatError(f"{path}: zero-length data chunk")
    raw = np.frombuffer(payload[:n_frames * frame_bytes], dtype=dtype)
    samples = raw.astype(np.float64) * scale
    if channels == 2:
        samples = samples.reshape(n_frames, 2)
    return AudioClip(samples, rate)


def write_wav(path, clip: AudioClip) -> None:
    """Write ``clip`` as 16-bit PCM, saturating to [-1, 1)."""
    samples = np.clip(clip.samples, -1.0, 32767 / 32768)
    pcm = np.round(samples * 32768).astype("<i2")
    payload = pcm.tobytes()
    channels = clip.channels
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, _FMT_PCM, channels, clip.sample_rate,
        clip.sample_rate * 2 * channels, 2 * channels, 16,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


# -- preprocessing -----------------------------------------------------------


def to_mono(clip: AudioClip) -> AudioClip:
    if clip.channels == 1:
        return clip
    if clip.channels > 2:
        raise ValueError(f"to_mono supports at most 2 channels, got {clip.channels}")
    return AudioClip(clip.samples.mean(axis=1), clip.sample_rate)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Linear-interpolation resampling; the final input sample is held."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return clip
    n_out = int(round(clip.duration_sec * target_rate))
    src = np.arange(clip.num_samples, dtype=np.float64)
    pos = np.arange(n_out, dtype=np.float64) * (clip.sample_rate / target_rate)
    if clip.channels == 1:
        out = np.interp(pos, src, clip.samples)
    else:
        out = np.stack([np.interp(pos, src, clip.samples[:, c])
                        for c in range(clip.channels)], axis=1)
    return AudioClip(out, target_rate)


def normalize_amplitude(clip: AudioClip) -> AudioClip:
    peak = float(np.max(np.abs(clip.samples))) if clip.num_samples else 0.0
    if peak == 0.0:
        return clip
    return AudioClip(clip.samples / peak, clip.sample_rate)


def preprocess(clip: AudioClip, target_rate: int = TARGET_RATE) -> AudioClip:
    """Mono, resampled to ``target_rate``, peak-normalized."""
    return normalize_amplitude(resample(to_mono(clip), target_rate))


# -- windowing ---------------------------------------------------------------


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def window_count(num_samples: int, sample_rate: int, spec: WindowSpec) -> int:
    """Number of full windows that fit, 0 when the clip is too short."""
    win = _round_half_up(spec.w_d * sample_rate)
    if num_samples < win:
        return 0
    # tolerance absorbs float error in (D - w_d) / w_h landing just below an integer
    count = math.floor((num_samples - win) / (spec.w_h * sample_rate) + 1e-9) + 1
    while count > 0 and _round_half_up((count - 1) * spec.w_h * sample_rate) + win > num_samples:
        count -= 1
    return count


def slide_windows(clip: AudioClip, spec: WindowSpec) -> list[AudioWindow]:
    """Cut ``clip`` into full windows ``[i*w_h, i*w_h + w_d)``; the tail is dropped."""
    win = _round_half_up(spec.w_d * clip.sample_rate)
    count = window_count(clip.num_samples, clip.sample_rate, spec)
    if count == 0:
        raise ClipTooShortError(
            f"clip too short to window: {clip.duration_sec:.3f}s < w_d={spec.w_d}s"
        )
    windows = []
    for i in range(count):
        start = _round_half_up(i * spec.w_h * clip.sample_rate)
        windows.append(AudioWindow(
            index=i,
            start_sec=i * spec.w_h,
            samples=clip.samples[start:start + win],
            sample_rate=clip.sample_rate,
        ))
    return windows


# -- noise -------------------------------------------------------------------


def _noise_power(noisy: np.ndarray, clean: np.ndarray) -> float:
    return float(np.mean((noisy - clean) ** 2))


def add_white_noise(clip: AudioClip, spec: NoiseSpec) -> AudioClip:
    """Add zero-mean Gaussian noise, then saturate to [-1, 1].

    In variance mode the noise is drawn with the requested variance and no
    further correction is made. In SNR mode the noise scale is tuned so the
    *measured* ratio of signal power to ``mean((out - in)**2)`` hits the
    target after saturation; clipping otherwise eats part of the noise.
    """
    rng = np.random.default_rng(spec.seed)
    x = clip.samples
    unit = rng.standard_normal(x.shape)

    if spec.variance is not None:
        out = np.clip(x + math.sqrt(spec.variance) * unit, -1.0, 1.0)
        return AudioClip(out, clip.sample_rate)

    signal_power = float(np.mean(x ** 2))
    if signal_power == 0.0:
        raise ValueError("target_snr_db requires a nonsilent clip")
    target = signal_power / 10 ** (spec.target_snr_db / 10)

    def noisy(scale):
        return np.clip(x + scale * unit, -1.0, 1.0)

    scale = math.sqrt(target)
    out = noisy(scale)
    power = _noise_power(out, x)
    if abs(10 * math.log10(power / target)) <= 0.05:
        return AudioClip(out, clip.sample_rate)

    # measured noise power is nondecreasing in scale; bisect on it
    if _noise_power(noisy(0.0), x) >= target:
        raise ValueError(
            f"target SNR {spec.target_snr_db} dB unreachable: saturation alone exceeds it"
        )
    lo, hi = 0.0, scale
    while _noise_power(noisy(hi), x) < target:
        lo, hi = hi, hi * 2
        if hi > 1e6:
            raise ValueError(
                f"target SNR {spec.target_snr_db} dB unreachable after saturation"
            )
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _noise_power(noisy(mid), x) < target:
            lo = mid
        else:
            hi = mid
    return AudioClip(noisy(hi), clip.sample_rate)
