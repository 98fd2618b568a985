"""Detection metrics and the experiment harness: repeated runs, noise sweeps, ablations."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from riforest.builder import build_forest, derive_seed, make_rng
from riforest.datasets import append_noise_columns
from riforest.exceptions import DataError
from riforest.model import Dataset, RiForestParams, validate_params
from riforest.scoring import score_dataset

IR_MODES = ("ratio", "difference")

# stream index for noise columns; tree streams use indices below num_trees
NOISE_STREAM = 2**63

ABLATIONS = {
    "RiForest": {},
    "w/o pl": {"use_path_length": False},
    "w/o RH": {"use_random_hyperplanes": False},
    "w/ RS": {"split_strategy": "random"},
    "w/ BS": {"split_strategy": "blank"},
}


def auroc(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic.

    Equals the probability that a random anomaly (label 1) scores above a
    random normal row, with ties counting one half.

    Raises:
        DataError: on length mismatch, labels outside {0, 1}, or a single class.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise DataError(f"{s.size} scores but {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0 or 1")
    pos = y == 1
    n1 = int(pos.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise DataError("AUROC needs at least one anomaly and one normal row")
    ranks = rankdata(s)
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def improvement_rate(auroc_m: float, mean_auroc: float, mode: str = "ratio") -> float:
    """Improvement of ``auroc_m`` over ``mean_auroc`` in percent.

    ``mode="ratio"`` gives 100 * (auroc_m - mean) / mean. ``mode="difference"``
    gives 100 * (auroc_m - mean), which is the scale some published tables use.
    """
    if mode not in IR_MODES:
        raise ValueError(f"mode must be one of {IR_MODES}, got {mode!r}")
    if not mean_auroc > 0:
        raise ValueError(f"mean AUROC must be positive, got {mean_auroc}")
    diff = auroc_m - mean_auroc
    if mode == "ratio":
        return diff / mean_auroc * 100.0
    return diff * 100.0


def coefficient_of_variation(values) -> float:
    """Sample standard deviation (n - 1 denominator) over the mean."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 2:
        raise ValueError(f"need at least 2 values, got {v.size}")
    mean = v.mean()
    if not mean > 0:
        raise ValueError(f"mean must be positive, got {mean}")
    return float(v.std(ddof=1) / mean)


@dataclass(frozen=True)
class BenchmarkResult:
    """AUROC of each run with its aggregates. ``cv`` is None for a single run.

    Wall time is informational and excluded from equality.
    """

    per_run_auroc: tuple[float, ...]
    mean_auroc: float
    cv: float | None
    wall_time_seconds: float = field(default=0.0, compare=False)

    @classmethod
    def from_runs(cls, aurocs, wall_time_seconds: float = 0.0) -> BenchmarkResult:
        runs = tuple(float(a) for a in aurocs)
        if not runs:
            raise ValueError("need at least one run")
        cv = coefficient_of_variation(runs) if len(runs) > 1 else None
        return cls(runs, float(np.mean(runs)), cv, wall_time_seconds)

    @property
    def repeats(self) -> int:
        return len(self.per_run_auroc)


@dataclass(frozen=True)
class NoiseSweepResult:
    noise_counts: tuple[int, ...]
    mean_auroc_per_count: tuple[float, ...]
    repeats: int
    results: tuple[BenchmarkResult, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if len(self.noise_counts) != len(self.mean_auroc_per_count):
            raise ValueError("noise_counts and mean_auroc_per_count differ in length")


def _require_labels(data: Dataset) -> None:
    if data.labels is None:
        raise DataError("benchmarking needs labeled data")


def run_seed(master_seed: int, run: int) -> int:
    """Master seed of repetition ``run``."""
    return derive_seed(master_seed, run)


def _benchmark(data: Dataset, params: RiForestParams, repeats: int, noise: int) -> BenchmarkResult:
    _require_labels(data)
    validate_params(params)
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    start = time.perf_counter()
    aurocs = []
    for run in range(repeats):
        seed = run_seed(params.master_seed, run)
        run_data = data
        if noise:
            run_data = append_noise_columns(data, noise, make_rng(derive_seed(seed, NOISE_STREAM)))
        forest = build_forest(run_data, params.replace(master_seed=seed))
        aurocs.append(auroc(score_dataset(run_data, forest).scores, run_data.labels))
    return BenchmarkResult.from_runs(aurocs, time.perf_counter() - start)


def repeated_benchmark(data: Dataset, params: RiForestParams, repeats: int) -> BenchmarkResult:
    """Fit and score ``repeats`` independent forests on ``data``.

    Run r uses master seed ``derive_seed(params.master_seed, r)``, so results
    are reproducible and independent of how many runs are requested.
    """
    return _benchmark(data, params, repeats, 0)


def noise_robustness(
    data: Dataset, params: RiForestParams, noise_counts, repeats: int
) -> NoiseSweepResult:
    """Repeated benchmarks with ``k`` standard-normal columns appended to the raw data.

    Noise is regenerated for every repetition from that run's seed, and added
    before standardization. ``k = 0`` reproduces :func:`repeated_benchmark`.
    """
    counts = tuple(int(k) for k in noise_counts)
    if any(k < 0 for k in counts):
        raise ValueError(f"noise counts must be >= 0, got {counts}")
    results = tuple(_benchmark(data, params, repeats, k) for k in counts)
    return NoiseSweepResult(counts, tuple(r.mean_auroc for r in results), repeats, results)


def ablation_params(params: RiForestParams) -> dict[str, RiForestParams]:
    """The full configuration and its four single-component ablations."""
    return {name: params.replace(**changes) for name, changes in ABLATIONS.items()}


def ablation_suite(
    data: Dataset, params: RiForestParams, repeats: int
) -> dict[str, BenchmarkResult]:
    return {
        name: repeated_benchmark(data, p, repeats) for name, p in ablation_params(params).items()
    }


def ablation_table(results: dict[str, BenchmarkResult]) -> list[dict]:
    """One row per variant with IR against the mean over all variants, in both modes."""
    suite_mean = float(np.mean([r.mean_auroc for r in results.values()]))
    return [
        {
            "variant": name,
            "mean_auroc": r.mean_auroc,
            "cv": r.cv,
            "ir_ratio": improvement_rate(r.mean_auroc, suite_mean, "ratio"),
            "ir_difference": improvement_rate(r.mean_auroc, suite_mean, "difference"),
        }
        for name, r in results.items()
    ]
