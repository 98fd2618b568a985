"""Core data types, parameter validation, standardization and subsampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from riforest.exceptions import DataError, ParameterError

if TYPE_CHECKING:
    from riforest.projection import HyperplaneVector

SPLIT_STRATEGIES = ("valley", "random", "blank")
UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Dataset:
    """Numeric sample matrix with optional binary anomaly labels (1 = anomaly)."""

    values: np.ndarray
    labels: np.ndarray | None = None
    column_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DataError(f"values must be a 2-D matrix, got shape {values.shape}")
        n, d = values.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset needs n >= 1 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        object.__setattr__(self, "values", values)

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise DataError(f"labels must have length {n}, got shape {labels.shape}")
            if not np.all((labels == 0) | (labels == 1)):
                raise DataError("labels must be 0 or 1")
            object.__setattr__(self, "labels", labels.astype(np.int8))

        names = tuple(str(c) for c in self.column_names) or tuple(f"x{i}" for i in range(d))
        if len(names) != d:
            raise DataError(f"expected {d} column names, got {len(names)}")
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StandardizationStats:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        if means.ndim != 1 or means.shape != stds.shape:
            raise DataError("means and stds must be 1-D and of equal length")
        if np.any(stds < 0):
            raise DataError("stds must be nonnegative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def d(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True)
class RiForestParams:
    """Forest hyperparameters.

    Defaults follow the evaluated configuration: 100 trees, subsamples of 256,
    10 histogram bins, entropy threshold 0.8 and 5 random hyperplanes per node.

    ``use_entropy_gate=False`` skips the dimension-entropy filter entirely so
    the split direction is drawn uniformly from the whole candidate set. Together
    with ``split_strategy="random"``, ``use_random_hyperplanes=False`` and
    ``use_path_length=False`` this reproduces a plain isolation forest.
    """

    num_trees: int = 100
    subsample_size: int = 256
    num_bins: int = 10
    entropy_threshold: float = 0.8
    num_random_hyperplanes: int = 5
    split_strategy: str = "valley"
    use_random_hyperplanes: bool = True
    use_path_length: bool = True
    use_entropy_gate: bool = True
    master_seed: int = 0

    def replace(self, **changes) -> RiForestParams:
        return replace(self, **changes)


def iforest_baseline(params: RiForestParams | None = None) -> RiForestParams:
    """Plain isolation-forest configuration sharing T, psi and seed with ``params``."""
    params = params or RiForestParams()
    return params.replace(
        split_strategy="random",
        use_random_hyperplanes=False,
        use_path_length=False,
        use_entropy_gate=False,
    )


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def validate_params(params: RiForestParams) -> RiForestParams:
    """Return ``params`` unchanged, or raise ParameterError naming the first bad field."""
    p = params
    if not _is_int(p.num_trees) or p.num_trees < 1:
        raise ParameterError("num_trees", f"must be a positive integer, got {p.num_trees!r}")
    if not _is_int(p.subsample_size) or p.subsample_size < 1:
        raise ParameterError(
            "subsample_size", f"must be a positive integer, got {p.subsample_size!r}"
        )
    if not _is_int(p.num_bins) or p.num_bins < 2:
        raise ParameterError("num_bins", f"must be an integer >= 2, got {p.num_bins!r}")
    if p.split_strategy == "valley" and p.num_bins < 3:
        # the valley objective ranges over 1 < t < L
        raise ParameterError("num_bins", f"valley splits need num_bins >= 3, got {p.num_bins}")
    alpha = p.entropy_threshold
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float, np.floating)):
        raise ParameterError("entropy_threshold", f"must be a real number, got {alpha!r}")
    if not (0.0 < alpha <= 1.0):
        raise ParameterError("entropy_threshold", f"must lie in (0, 1], got {alpha!r}")
    if not _is_int(p.num_random_hyperplanes) or p.num_random_hyperplanes < 0:
        raise ParameterError(
            "num_random_hyperplanes",
            f"must be a nonnegative integer, got {p.num_random_hyperplanes!r}",
        )
    if p.split_strategy not in SPLIT_STRATEGIES:
        raise ParameterError(
            "split_strategy", f"must be one of {SPLIT_STRATEGIES}, got {p.split_strategy!r}"
        )
    for flag in ("use_random_hyperplanes", "use_path_length", "use_entropy_gate"):
        if not isinstance(getattr(p, flag), (bool, np.bool_)):
            raise ParameterError(flag, "must be a boolean")
    if not _is_int(p.master_seed) or not (0 <= p.master_seed <= UINT64_MAX):
        raise ParameterError("master_seed", f"must be a 64-bit unsigned integer, got {p.master_seed!r}")
    return params


def height_limit(subsample_size: int) -> int:
    """ceil(log2(psi)), never below 1."""
    return max(1, math.ceil(math.log2(subsample_size)))


# ----------------------------------------------------------------------------
# Tree structures
# ----------------------------------------------------------------------------


@dataclass
class TreeNode:
    """Internal node (split_vector, split_point, path_increment, children) or leaf (size).

    ``split_kind`` records how an internal node chose its split point: valley,
    random, blank or midpoint (the fallback when no direction passes the
    entropy gate).
    """

    node_type: str
    split_vector: HyperplaneVector | None = None
    split_point: float = 0.0
    path_increment: float = 1.0
    left: TreeNode | None = None
    right: TreeNode | None = None
    size: int = 0
    split_kind: str = ""

    @classmethod
    def external(cls, size: int) -> TreeNode:
        return cls("external", size=int(size))

    @classmethod
    def internal(
        cls,
        vector,
        q: float,
        pl: float,
        left: TreeNode,
        right: TreeNode,
        kind: str = "",
        size: int = 0,
    ) -> TreeNode:
        if not (0.0 < pl <= 1.0):
            raise ValueError(f"path increment must lie in (0, 1], got {pl}")
        return cls("internal", vector, float(q), float(pl), left, right, int(size), kind)

    @property
    def is_external(self) -> bool:
        return self.node_type == "external"

    def iter_nodes(self):
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_external:
                stack.append(node.right)
                stack.append(node.left)

    def depth(self) -> int:
        if self.is_external:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class TreeModel:
    root: TreeNode
    sparsity: float
    height_limit: int


@dataclass
class ForestModel:
    trees: list[TreeModel]
    params: RiForestParams
    standardization: StandardizationStats
    c_psi: float

    @property
    def d(self) -> int:
        return self.standardization.d


# ----------------------------------------------------------------------------
# Standardization and subsampling
# ----------------------------------------------------------------------------


def standardize_fit(data: Dataset) -> StandardizationStats:
    """Per-column mean and population standard deviation."""
    x = data.values
    means = x.mean(axis=0)
    stds = x.std(axis=0, ddof=0)
    return StandardizationStats(means, stds)


def standardize_matrix(x: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != stats.d:
        raise DataError(f"expected {stats.d} columns, got shape {x.shape}")
    safe = np.where(stats.stds > 0, stats.stds, 1.0)
    out = (x - stats.means) / safe
    # constant training columns carry no signal; map to zeros instead of NaN
    out[:, stats.stds == 0] = 0.0
    return out


def standardize_apply(data: Dataset, stats: StandardizationStats) -> Dataset:
    return Dataset(standardize_matrix(data.values, stats), data.labels, data.column_names)


def subsample(data: Dataset, psi: int, rng: np.random.Generator) -> Dataset:
    """Uniform sample of min(psi, n) rows without replacement; labels are dropped."""
    if psi < 1:
        raise ParameterError("subsample_size", f"must be >= 1, got {psi}")
    idx = subsample_indices(data.n, psi, rng)
    return Dataset(data.values[idx], None, data.column_names)


def subsample_indices(n: int, psi: int, rng: np.random.Generator) -> np.ndarray:
    if psi >= n:
        return np.arange(n)
    return rng.choice(n, size=psi, replace=False)


def as_dataset(x: Dataset | np.ndarray | Sequence, labels=None) -> Dataset:
    if isinstance(x, Dataset):
        return x
    return Dataset(np.asarray(x, dtype=np.float64), labels)


__all__ = [
    "Dataset",
    "StandardizationStats",
    "RiForestParams",
    "TreeNode",
    "TreeModel",
    "ForestModel",
    "validate_params",
    "iforest_baseline",
    "height_limit",
    "standardize_fit",
    "standardize_apply",
    "standardize_matrix",
    "subsample",
    "subsample_indices",
    "as_dataset",
    "SPLIT_STRATEGIES",
]
