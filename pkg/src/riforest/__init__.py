"""Entropy-gated isolation forest with valley-emphasis splits and a benchmark harness."""

from riforest.builder import build_forest, build_tree, derive_seed
from riforest.datasets import (
    append_noise_columns,
    make_annulus,
    make_bimodal_feature,
    make_scattered_tail,
)
from riforest.evaluation import (
    BenchmarkResult,
    NoiseSweepResult,
    ablation_suite,
    auroc,
    coefficient_of_variation,
    improvement_rate,
    noise_robustness,
    repeated_benchmark,
)
from riforest.exceptions import (
    DataError,
    DegenerateSparsityError,
    ModelFormatError,
    NoValleySplitError,
    ParameterError,
    RiForestError,
)
from riforest.io import load_csv, load_model, save_model
from riforest.model import (
    Dataset,
    ForestModel,
    RiForestParams,
    StandardizationStats,
    TreeModel,
    TreeNode,
    iforest_baseline,
)
from riforest.scoring import ScoreReport, anomaly_score, c, score_dataset

__version__ = "0.1.0"

__all__ = [
    "BenchmarkResult",
    "DataError",
    "Dataset",
    "DegenerateSparsityError",
    "ForestModel",
    "ModelFormatError",
    "NoValleySplitError",
    "NoiseSweepResult",
    "ParameterError",
    "RiForestError",
    "RiForestParams",
    "ScoreReport",
    "StandardizationStats",
    "TreeModel",
    "TreeNode",
    "ablation_suite",
    "anomaly_score",
    "append_noise_columns",
    "auroc",
    "build_forest",
    "build_tree",
    "c",
    "coefficient_of_variation",
    "derive_seed",
    "iforest_baseline",
    "improvement_rate",
    "load_csv",
    "load_model",
    "make_annulus",
    "make_bimodal_feature",
    "make_scattered_tail",
    "noise_robustness",
    "repeated_benchmark",
    "save_model",
    "score_dataset",
]
