"""Independent reference implementations used by the tests.

Nothing here imports the code under test's algorithms; these are the
brute-force or declarative versions the real implementations are checked
against.
"""

import struct

import numpy as np


def wav_bytes(frames, rate, fmt="pcm16"):
    """Byte-level RIFF/WAVE writer. ``frames`` is (n,) or (n, channels)."""
    arr = np.asarray(frames)
    channels = 1 if arr.ndim == 1 else arr.shape[1]
    if fmt == "pcm16":
        tag, width = 1, 2
        payload = np.asarray(arr, dtype="<i2").tobytes()
    elif fmt == "float32":
        tag, width = 3, 4
        payload = np.asarray(arr, dtype="<f4").tobytes()
    else:
        raise ValueError(fmt)
    fmt_chunk = struct.pack("<HHIIHH", tag, channels, rate, rate * width * channels,
                            width * channels, 8 * width)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def runs_ms(painted):
    """[[start_ms, stop_ms), ...] runs of True in a boolean millisecond timeline."""
    padded = np.concatenate([[False], painted, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def fixed_trigger_oracle_ms(start_ms, p, tau, t_fixed_ms):
    """Paint ``[t, t + T)`` for every triggering sample at 1 ms resolution."""
    end = int(max(start_ms) + t_fixed_ms + 2)
    line = np.zeros(end, dtype=bool)
    for t, value in zip(start_ms, p):
        if value >= tau:
            line[t:t + t_fixed_ms] = True
    return runs_ms(line)


def hysteresis_on_declarative(p, tau_on, tau_off):
    """ON after sample i iff some j <= i had p_j >= tau_on and no k in (j, i] had p_k < tau_off."""
    n = len(p)
    on = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in range(i + 1):
            if p[j] >= tau_on and all(p[k] >= tau_off for k in range(j + 1, i + 1)):
                on[i] = True
                break
    return on


def hysteresis_oracle_ms(start_ms, hop_ms, p, tau_on, tau_off):
    """Paint each ON sample's hop ``[t, t + hop)`` at 1 ms resolution."""
    on = hysteresis_on_declarative(p, tau_on, tau_off)
    line = np.zeros(int(max(start_ms) + hop_ms + 2), dtype=bool)
    for t, state in zip(start_ms, on):
        if state:
            line[t:t + hop_ms] = True
    return runs_ms(line)


def numeric_grad(f, params, h=1e-4):
    """Central finite differences of scalar ``f()`` w.r.t. every entry of ``params`` (in place)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            up = f()
            p[idx] = orig - h
            down = f()
            p[idx] = orig
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def separable_features(n, minority_fraction, dim=16, seed=0, spread=0.5):
    """Two Gaussian blobs at -1 and +1 per coordinate; class 0 is the minority."""
    rng = np.random.default_rng(seed)
    n0 = int(round(n * minority_fraction))
    y = np.array([0] * n0 + [1] * (n - n0))
    rng.shuffle(y)
    centers = np.where(y[:, None] == 1, 1.0, -1.0)
    X = centers + spread * rng.standard_normal((n, dim))
    return X, y


def separation_margin(X, y):
    """Gap between the classes when projected on the mean-difference direction (> 0 = separable)."""
    d = X[y == 1].mean(axis=0) - X[y == 0].mean(axis=0)
    proj = X @ d
    return float(proj[y == 1].min() - proj[y == 0].max())
