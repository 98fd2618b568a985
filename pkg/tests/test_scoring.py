from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riforest.builder import build_forest
from riforest.datasets import make_annulus
from riforest.exceptions import DataError
from riforest.model import (
    Dataset,
    ForestModel,
    RiForestParams,
    StandardizationStats,
    TreeModel,
    TreeNode,
)
from riforest.projection import HyperplaneVector
from riforest.scoring import (
    EULER_GAMMA,
    anomaly_score,
    c,
    harmonic,
    mean_path_lengths,
    score_dataset,
    score_from_path,
    tree_path_length,
    tree_path_lengths,
)


def chain_tree(depth: int, leaf_size: int, d: int = 1) -> TreeModel:
    """Unit-pl chain: every row goes left through ``depth`` splits at +inf."""
    node = TreeNode.external(leaf_size)
    for _ in range(depth):
        node = TreeNode.internal(HyperplaneVector.unit(d, 0), 1e300, 1.0, node, TreeNode.external(0))
    return TreeModel(node, 0.5, depth)


def reference_edges(row, tree) -> float:
    """Edge count to the leaf plus c(size), found by walking the tree."""
    node, edges = tree.root, 0
    while not node.is_external:
        value = float(np.dot(row, node.split_vector.coefficients))
        node = node.left if value <= node.split_point else node.right
        edges += 1
    return edges + (c(node.size) if node.size > 1 else 0.0)


class TestConstants:
    def test_harmonic(self):
        assert harmonic(0) == 0.0
        assert harmonic(1) == 1.0
        assert harmonic(255) == pytest.approx(6.11848, abs=1e-5)
        assert harmonic(255) == math.log(255) + EULER_GAMMA

    def test_c_values(self):
        assert c(0) == 0.0 and c(1) == 0.0 and c(2) == 1.0
        assert c(256) == pytest.approx(10.2448, abs=1e-4)
        # 2 (ln 127 + gamma) - 2 * 127 / 128, evaluated by hand
        assert c(128) == pytest.approx(8.858430, abs=1e-6)

    def test_c_nondecreasing(self):
        values = [c(i) for i in range(1, 3000)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_negative_harmonic(self):
        with pytest.raises(ValueError):
            harmonic(-1)


class TestScoreFromPath:
    def test_reference_points(self):
        cp = c(256)
        assert score_from_path(cp, cp) == pytest.approx(0.5, abs=1e-12)
        assert score_from_path(0.0, cp) == 1.0
        assert score_from_path(2 * cp, cp) == pytest.approx(0.25, abs=1e-12)

    @given(st.floats(0, 1e3), st.floats(0, 1e3))
    def test_range_and_monotone(self, a, b):
        cp = c(256)
        sa, sb = score_from_path(a, cp), score_from_path(b, cp)
        assert 0 < sa <= 1 and 0 < sb <= 1
        if a < b:
            assert sa >= sb

    def test_strictly_monotone_in_normal_range(self):
        cp = c(256)
        paths = np.linspace(0, 40, 500)
        scores = [score_from_path(p, cp) for p in paths]
        assert all(x > y for x, y in zip(scores, scores[1:]))


class TestTreePaths:
    def test_single_leaf(self):
        tree = TreeModel(TreeNode.external(1), 0.0, 8)
        assert tree_path_length(np.array([0.3]), tree) == 0.0

    def test_fractional_increment(self):
        root = TreeNode.internal(
            HyperplaneVector.unit(1, 0), 0.0, 0.2, TreeNode.external(1), TreeNode.external(1)
        )
        tree = TreeModel(root, 0.0, 8)
        for v in (-1.0, 1.0):
            assert tree_path_length(np.array([v]), tree) == pytest.approx(0.2)

    def test_depth_limited_leaf(self):
        tree = chain_tree(8, 128)
        h = tree_path_length(np.array([0.0]), tree)
        assert h == pytest.approx(8 + 8.858430, abs=1e-6)
        assert tree_path_length(np.array([0.0]), tree, adjust_leaves=False) == 8.0

    def test_unit_pl_matches_edge_count(self, annulus):
        forest = build_forest(annulus, RiForestParams(num_trees=5, use_path_length=False))
        x = np.random.default_rng(0).normal(size=(50, 2)) * 3
        for tree in forest.trees:
            got = tree_path_lengths(x, tree)
            want = [reference_edges(row, tree) for row in x]
            assert np.allclose(got, want, rtol=0, atol=1e-9)

    def test_batch_equals_scalar(self, small_forest):
        x = np.random.default_rng(1).normal(size=(100, 2)) * 2
        for tree in small_forest.trees[:5]:
            batch = tree_path_lengths(x, tree)
            assert all(tree_path_length(x[i], tree) == batch[i] for i in range(100))

    def test_width_mismatch(self, small_forest):
        with pytest.raises(DataError):
            tree_path_lengths(np.zeros((3, 5)), small_forest.trees[0])
        with pytest.raises(DataError):
            tree_path_length(np.zeros(5), small_forest.trees[0])


class TestScores:
    def test_training_scores_in_range(self, annulus, small_forest):
        report = score_dataset(annulus, small_forest)
        assert len(report) == annulus.n
        assert np.all((report.scores > 0) & (report.scores <= 1))
        expected = 2.0 ** (-report.mean_path / small_forest.c_psi)
        assert np.allclose(report.scores, expected, rtol=0, atol=1e-12)

    def test_single_row(self, small_forest):
        assert len(score_dataset(np.array([[0.0, 0.0]]), small_forest)) == 1

    def test_batch_equals_per_row_bitwise(self, annulus, small_forest):
        report = score_dataset(annulus, small_forest)
        for i in range(0, annulus.n, 7):
            assert anomaly_score(annulus.values[i], small_forest) == report.scores[i]

    def test_outlier_scores_higher(self, annulus, small_forest):
        s = score_dataset(np.array([[0.0, 0.0], [7.0, 0.0]]), small_forest).scores
        assert s[1] > s[0]

    def test_dimension_mismatch(self, small_forest):
        with pytest.raises(DataError):
            anomaly_score(np.zeros(3), small_forest)
        with pytest.raises(DataError):
            score_dataset(np.zeros((2, 3)), small_forest)

    def test_mean_path_is_tree_average(self, annulus, small_forest):
        x = np.array([[0.5, -0.2]])
        z = (x - small_forest.standardization.means) / small_forest.standardization.stds
        manual = np.mean([tree_path_length(z[0], t) for t in small_forest.trees])
        assert mean_path_lengths(z, small_forest)[0] == pytest.approx(manual, abs=1e-12)

    def test_dense_point_scores_below_outlier(self):
        wins = 0
        for seed in range(20):
            base = make_annulus(seed=seed)
            dense = np.vstack([base.values, np.zeros((50, 2))])
            forest = build_forest(Dataset(dense), RiForestParams(num_trees=30, master_seed=seed))
            s = score_dataset(np.array([[0.0, 0.0], [7.0, 0.0]]), forest).scores
            wins += s[0] <= s[1]
        assert wins >= 19

    def test_psi_one_forest_scores_one(self):
        stats = StandardizationStats(np.zeros(1), np.ones(1))
        forest = ForestModel([TreeModel(TreeNode.external(1), 0.0, 1)], RiForestParams(), stats, 0.0)
        assert anomaly_score(np.array([3.0]), forest) == 1.0

