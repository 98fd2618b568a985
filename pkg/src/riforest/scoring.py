"""Path lengths and anomaly scores."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from riforest.exceptions import DataError
from riforest.model import Dataset, standardize_matrix
from riforest.projection import project

EULER_GAMMA = 0.5772156649


@dataclass(frozen=True)
class ScoreReport:
    """Per-row scores in (0, 1] and mean path lengths E(h(x))."""

    scores: np.ndarray
    mean_path: np.ndarray

    def __len__(self) -> int:
        return self.scores.shape[0]


def harmonic(i: int) -> float:
    """Harmonic number: exact for i <= 1, ln(i) + gamma otherwise."""
    if i < 0:
        raise ValueError(f"harmonic number undefined for {i}")
    if i == 0:
        return 0.0
    if i == 1:
        return 1.0
    return math.log(i) + EULER_GAMMA


def c(psi: int) -> float:
    """Average unsuccessful-search path length in a BST of ``psi`` points."""
    if psi <= 1:
        return 0.0
    if psi == 2:
        return 1.0
    return 2.0 * harmonic(psi - 1) - 2.0 * (psi - 1) / psi


def score_from_path(mean_path: float, c_psi: float) -> float:
    """2 ** (-E(h) / c(psi)), kept inside (0, 1]."""
    if c_psi <= 0:
        # a forest trained with psi <= 1 cannot tell points apart
        return 1.0
    s = 2.0 ** (-mean_path / c_psi)
    return min(max(s, sys.float_info.min), 1.0)


def _check_width(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != d:
        raise DataError(f"expected rows of width {d}, got shape {x.shape}")
    return x


def _tree_d(tree) -> int | None:
    for node in tree.root.iter_nodes():
        if not node.is_external:
            return node.split_vector.d
    return None


def tree_path_length(x, tree, adjust_leaves: bool = True) -> float:
    """h(x) for one standardized row: sum of the node increments on its path,
    plus c(size) at an unresolved leaf."""
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    node = tree.root
    h = 0.0
    while not node.is_external:
        v = node.split_vector
        if row.shape[1] != v.d:
            raise DataError(f"row has width {row.shape[1]}, tree expects {v.d}")
        h += node.path_increment
        node = node.left if project(row, v)[0] <= node.split_point else node.right
    if adjust_leaves and node.size > 1:
        h += c(node.size)
    return h


def tree_path_lengths(x: np.ndarray, tree, adjust_leaves: bool = True) -> np.ndarray:
    """Vectorized :func:`tree_path_length` over the rows of ``x``.

    Increments are added in the same root-to-leaf order as the scalar version,
    so both give identical bits.
    """
    x = np.asarray(x, dtype=np.float64)
    d = _tree_d(tree)
    if d is not None:
        x = _check_width(x, d)
    out = np.zeros(x.shape[0])
    stack = [(tree.root, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_external:
            if adjust_leaves and node.size > 1:
                out[idx] += c(node.size)
            continue
        out[idx] += node.path_increment
        left = project(x[idx], node.split_vector) <= node.split_point
        stack.append((node.right, idx[~left]))
        stack.append((node.left, idx[left]))
    return out


def _standardized(x, forest) -> np.ndarray:
    return standardize_matrix(_check_width(x, forest.d), forest.standardization)


def mean_path_lengths(x_std: np.ndarray, forest, adjust_leaves: bool = True) -> np.ndarray:
    total = np.zeros(x_std.shape[0])
    for tree in forest.trees:
        total += tree_path_lengths(x_std, tree, adjust_leaves)
    return total / len(forest.trees)


def anomaly_score(x, forest, adjust_leaves: bool = True) -> float:
    """Score one raw (unstandardized) row against ``forest``."""
    row = _standardized(np.asarray(x, dtype=np.float64).reshape(1, -1), forest)[0]
    total = 0.0
    for tree in forest.trees:
        total += tree_path_length(row, tree, adjust_leaves)
    return score_from_path(total / len(forest.trees), forest.c_psi)


def score_dataset(data, forest, adjust_leaves: bool = True) -> ScoreReport:
    """Scores for every row of ``data`` (a Dataset or raw matrix), in row order."""
    values = data.values if isinstance(data, Dataset) else data
    x = _standardized(values, forest)
    mean_path = mean_path_lengths(x, forest, adjust_leaves)
    scores = np.array([score_from_path(float(e), forest.c_psi) for e in mean_path])
    return ScoreReport(scores, mean_path)
