"""Class-imbalance handling: balanced class weights, SMOTE, random undersampling.

Datasets are ``(X, y)`` pairs: ``X`` of shape ``(n, F)`` and binary ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassWeights:
    pass


@dataclass(frozen=True)
class SmoteOversample:
    k_neighbors: int = 5
    seed: int = 0


@dataclass(frozen=True)
class RandomUndersample:
    seed: int = 0


ResampleStrategy = ClassWeights | SmoteOversample | RandomUndersample


def class_counts(y) -> tuple[int, int]:
    y = np.asarray(y)
    return int(np.sum(y == 0)), int(np.sum(y == 1))


def _check_binary(y):
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    n0, n1 = class_counts(y)
    if n0 == 0 or n1 == 0:
        raise ValueError(f"both classes must be present (counts {n0}, {n1})")
    return y, n0, n1


def compute_class_weights(labels) -> tuple[float, float]:
    """Balanced weights ``N / (2 * N_k)``, so that ``w0*N0 == w1*N1``."""
    _, n0, n1 = _check_binary(labels)
    total = n0 + n1
    return total / (2 * n0), total / (2 * n1)


def smote_oversample(X, y, k_neighbors: int = 5, seed: int = 0):
    """Grow the minority class with SMOTE until both classes are equal.

    Each synthetic point is ``x + u * (x_nn - x)`` for a random minority
    example ``x``, one of its ``k_neighbors`` nearest minority neighbours
    ``x_nn`` (Euclidean) and ``u ~ U(0, 1)``. Synthetic rows are appended
    after the originals.
    """
    X = np.asarray(X, dtype=np.float64)
    y, n0, n1 = _check_binary(y)
    if n0 == n1:
        return X, y
    minority = 0 if n0 < n1 else 1
    pool = X[y == minority]
    if k_neighbors < 1 or k_neighbors >= len(pool):
        raise ValueError(
            f"k_neighbors={k_neighbors} needs 1 <= k < minority size {len(pool)}"
        )
    sq = np.sum(pool ** 2, axis=1)
    dist = sq[:, None] + sq[None, :] - 2.0 * pool @ pool.T
    np.fill_diagonal(dist, np.inf)
    neighbours = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]

    rng = np.random.default_rng(seed)
    n_new = abs(n1 - n0)
    base = rng.integers(0, len(pool), size=n_new)
    pick = neighbours[base, rng.integers(0, k_neighbors, size=n_new)]
    u = rng.random(n_new)[:, None]
    synthetic = pool[base] + u * (pool[pick] - pool[base])
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(n_new, minority, dtype=y.dtype)])
    return X_out, y_out


def random_undersample(X, y, seed: int = 0):
    """Subsample the majority class without replacement down to the minority count.

    Retained rows keep their original order.
    """
    X = np.asarray(X)
    y, n0, n1 = _check_binary(y)
    if n0 == n1:
        return X, y
    majority = 0 if n0 > n1 else 1
    rng = np.random.default_rng(seed)
    major_idx = np.flatnonzero(y == majority)
    kept = rng.choice(major_idx, size=min(n0, n1), replace=False)
    keep = np.sort(np.concatenate([np.flatnonzero(y != majority), kept]))
    return X[keep], y[keep]


def apply_strategy(X, y, strategy: ResampleStrategy):
    if isinstance(strategy, SmoteOversample):
        return smote_oversample(X, y, strategy.k_neighbors, strategy.seed)
    if isinstance(strategy, RandomUndersample):
        return random_undersample(X, y, strategy.seed)
    return np.asarray(X, dtype=np.float64), np.asarray(y)


STRATEGY_NAMES = {
    "class-weights": ClassWeights,
    "smote": SmoteOversample,
    "undersample": RandomUndersample,
}


def strategy_from_name(name: str, seed: int = 0) -> ResampleStrategy:
    try:
        cls = STRATEGY_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGY_NAMES)}")
    return cls() if cls is ClassWeights else cls(seed=seed)
