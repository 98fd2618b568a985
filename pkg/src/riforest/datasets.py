"""Synthetic labeled datasets for benchmarks and demos, plus noise augmentation.

Every generator returns normal rows first and anomalies (label 1) last.
"""

from __future__ import annotations

import numpy as np

from riforest.model import Dataset


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _labeled(normal: np.ndarray, anomalies: np.ndarray) -> Dataset:
    values = np.vstack([normal, anomalies])
    labels = np.r_[np.zeros(len(normal), np.int8), np.ones(len(anomalies), np.int8)]
    return Dataset(values, labels)


def make_annulus(n_normal: int = 980, n_anomalies: int = 20, seed=0) -> Dataset:
    """2-D standard normal cloud with anomalies uniform (by area) on the ring 6 <= r <= 8."""
    rng = _rng(seed)
    normal = rng.standard_normal((n_normal, 2))
    r = np.sqrt(rng.uniform(36.0, 64.0, n_anomalies))
    theta = rng.uniform(0.0, 2.0 * np.pi, n_anomalies)
    return _labeled(normal, np.c_[r * np.cos(theta), r * np.sin(theta)])


def make_bimodal_feature(
    n_normal: int = 950, n_anomalies: int = 50, d: int = 4, seed=0
) -> Dataset:
    """Standard normal rows; anomalies form a small second mode near 5 in feature 0.

    Only one coordinate carries the signal, so the detector has to find the
    right feature among d and place the split in the valley between modes.
    """
    rng = _rng(seed)
    normal = rng.standard_normal((n_normal, d))
    anomalies = rng.standard_normal((n_anomalies, d))
    anomalies[:, 0] = rng.normal(5.0, 0.5, n_anomalies)
    return _labeled(normal, anomalies)


def make_scattered_tail(
    n_normal: int = 970, n_anomalies: int = 30, d: int = 3, seed=0
) -> Dataset:
    """Standard normal rows; anomalies scattered in random directions at radius 3 + Exp(2).

    The anomalies do not form a cluster, so each feature's histogram looks
    like one mode with a long thin tail.
    """
    rng = _rng(seed)
    normal = rng.standard_normal((n_normal, d))
    direction = rng.standard_normal((n_anomalies, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = 3.0 + rng.exponential(2.0, n_anomalies)
    return _labeled(normal, direction * radius[:, None])


def append_noise_columns(data: Dataset, k: int, rng: np.random.Generator) -> Dataset:
    """Copy of ``data`` with ``k`` standard-normal columns appended on the right."""
    if k < 0:
        raise ValueError(f"noise column count must be >= 0, got {k}")
    if k == 0:
        return data
    noise = rng.standard_normal((data.n, k))
    names = data.column_names + tuple(f"noise{i}" for i in range(k))
    return Dataset(np.hstack([data.values, noise]), data.labels, names)
