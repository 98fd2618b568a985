from __future__ import annotations

import numpy as np
import pytest

from riforest.builder import (
    BuildContext,
    build_forest,
    build_tree,
    derive_seed,
    make_rng,
    splitmix64,
)
from riforest.io import model_to_dict
from riforest.model import Dataset, RiForestParams, iforest_baseline
from riforest.projection import SparsityDraw, draw_sparsity, project
from riforest.scoring import c


def context(params=None, seed=0, limit=8, lam=None):
    params = params or RiForestParams()
    rng = make_rng(seed)
    draw = SparsityDraw.from_lambda(lam) if lam is not None else draw_sparsity(rng)
    return BuildContext(params, limit, draw, rng)


def traced_tree(x, params, seed):
    ctx = context(params, seed)
    ctx.trace = []
    return build_tree(x, ctx, engine="python"), ctx.trace


def internal_nodes(tree):
    return [n for n in tree.root.iter_nodes() if not n.is_external]


def structure(tree):
    out = []
    for n in tree.root.iter_nodes():
        if n.is_external:
            out.append(("leaf", n.size))
        else:
            out.append(
                (
                    n.split_kind,
                    n.split_point,
                    n.path_increment,
                    n.size,
                    n.split_vector.kind,
                    n.split_vector.coefficients.tobytes(),
                )
            )
    return out


CONFIGS = [
    RiForestParams(),
    RiForestParams(split_strategy="random"),
    RiForestParams(split_strategy="blank"),
    RiForestParams(use_path_length=False),
    RiForestParams(use_random_hyperplanes=False),
    RiForestParams(use_entropy_gate=False),
    RiForestParams(entropy_threshold=0.3, num_bins=5),
    RiForestParams(num_random_hyperplanes=0),
    iforest_baseline(),
]


class TestSeeds:
    def test_splitmix64_reference_output(self):
        # first output of the reference generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_derived_seeds_distinct(self):
        seeds = {derive_seed(7, k) for k in range(1000)}
        assert len(seeds) == 1000
        assert all(0 <= s < 2**64 for s in seeds)

    def test_depends_on_master(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)


class TestBuildTree:
    def test_single_row_is_leaf(self):
        tree = build_tree(np.zeros((1, 3)), context())
        assert tree.root.is_external and tree.root.size == 1 and tree.root.depth() == 0

    def test_constant_rows_are_leaf(self):
        tree = build_tree(np.ones((10, 2)), context())
        assert tree.root.is_external and tree.root.size == 10

    @pytest.mark.parametrize("engine", ["python", "numba"])
    def test_isolates_far_point(self, engine):
        x = np.array([[0.0], [10.0], [10.1], [10.2], [9.9]])
        for seed in range(20):
            tree = build_tree(x, context(seed=seed), engine)
            root = tree.root
            assert not root.is_external and root.split_kind == "valley"
            side = project(np.array([[0.0]]), root.split_vector)[0] <= root.split_point
            alone = root.left if side else root.right
            assert alone.is_external and alone.size == 1
            # the remaining cluster sits on the other side of q
            rest = project(x[1:], root.split_vector)
            assert np.all((rest <= root.split_point) != side)

    def test_unit_direction_split_point(self):
        x = np.array([[0.0], [10.0], [10.1], [10.2], [9.9]])
        ctx = context(RiForestParams(use_random_hyperplanes=False))
        root = build_tree(x, ctx).root
        assert 0.0 < root.split_point < 9.9

    def test_depth_limit(self):
        x = np.random.default_rng(0).normal(size=(256, 3))
        for seed in range(5):
            tree = build_tree(x, context(seed=seed, limit=8))
            assert tree.root.depth() <= 8

    def test_leaf_sizes_sum_to_rows(self):
        x = np.random.default_rng(1).normal(size=(200, 4))
        tree = build_tree(x, context(seed=2))
        leaves = [n.size for n in tree.root.iter_nodes() if n.is_external]
        assert sum(leaves) == 200

    def test_unknown_engine(self):
        with pytest.raises(ValueError):
            build_tree(np.zeros((3, 1)), context(), engine="gpu")


class TestInstrumented:
    """Node-level invariants recorded by the reference builder."""

    @pytest.mark.parametrize("params", CONFIGS)
    def test_invariants(self, params):
        rng = np.random.default_rng(5)
        x = np.vstack([rng.normal(size=(120, 3)), rng.normal(6, 0.3, size=(8, 3))])
        for seed in range(3):
            tree, trace = traced_tree(x, params, seed)
            assert tree.root.depth() <= 8
            nodes = internal_nodes(tree)
            assert len(trace) == len(nodes)
            for rec, node in zip(trace, nodes):
                rows, left, right = rec["rows"], rec["left_rows"], rec["right_rows"]
                assert sorted(np.r_[left, right].tolist()) == sorted(rows.tolist())
                assert left.size > 0 and right.size > 0
                assert rec["kind"] == node.split_kind
                assert 0 < node.path_increment <= 1
                if node.split_kind in ("midpoint", "random", "blank"):
                    assert node.path_increment == 1.0
                if node.split_kind == "valley" and params.use_entropy_gate:
                    assert rec["entropy"] < params.entropy_threshold
                if not params.use_path_length:
                    assert node.path_increment == 1.0
                if not params.use_random_hyperplanes:
                    assert node.split_vector.is_unit
                if node.split_kind != "midpoint":
                    assert node.split_kind == params.split_strategy

    def test_midpoint_fallback(self):
        # an entropy threshold this low rejects every direction
        params = RiForestParams(entropy_threshold=1e-9)
        x = np.random.default_rng(0).normal(size=(64, 2))
        tree, trace = traced_tree(x, params, 1)
        for node in internal_nodes(tree):
            assert node.split_kind == "midpoint" and node.path_increment == 1.0
        root = tree.root
        proj = project(x, root.split_vector)
        assert root.split_point == (proj.min() + proj.max()) / 2

    def test_valley_pl_below_one_somewhere(self):
        rng = np.random.default_rng(3)
        x = np.vstack([rng.normal(size=(240, 2)), rng.normal(8, 0.2, size=(16, 2))])
        tree, _ = traced_tree(x, RiForestParams(), 0)
        assert any(n.path_increment < 1 for n in internal_nodes(tree))


class TestEngines:
    @pytest.mark.parametrize("params", CONFIGS)
    @pytest.mark.parametrize("shape", [(300, 1), (500, 3), (256, 20)])
    def test_identical_trees(self, params, shape):
        rng = np.random.default_rng(shape[0] + shape[1])
        x = rng.normal(size=shape)
        x[:10] *= 4
        # rounding creates ties and repeated values
        x[:, 0] = np.round(x[:, 0], 1)
        data = Dataset(x)
        p = params.replace(num_trees=6, master_seed=11)
        a = build_forest(data, p, engine="numba")
        b = build_forest(data, p, engine="python")
        for ta, tb in zip(a.trees, b.trees):
            assert structure(ta) == structure(tb)

    def test_extreme_sparsity_identical(self):
        # d = 1 with lambda near 1 exercises the direct conditional draw
        x = np.random.default_rng(0).normal(size=(64, 1))
        for engine_pair_seed in range(3):
            t1 = build_tree(x, context(seed=engine_pair_seed, lam=1 - 1e-7), "numba")
            t2 = build_tree(x, context(seed=engine_pair_seed, lam=1 - 1e-7), "python")
            assert structure(t1) == structure(t2)


class TestBuildForest:
    def test_defaults(self, annulus):
        forest = build_forest(annulus)
        assert len(forest.trees) == 100
        assert forest.c_psi == pytest.approx(10.2448, abs=1e-4)
        assert abs(forest.c_psi - c(256)) < 1e-12
        assert all(t.height_limit == 8 for t in forest.trees)

    def test_deterministic(self, annulus):
        p = RiForestParams(num_trees=10, master_seed=42)
        assert model_to_dict(build_forest(annulus, p)) == model_to_dict(build_forest(annulus, p))

    def test_seed_changes_forest(self, annulus):
        a = build_forest(annulus, RiForestParams(num_trees=5, master_seed=1))
        b = build_forest(annulus, RiForestParams(num_trees=5, master_seed=2))
        assert model_to_dict(a) != model_to_dict(b)

    def test_tree_independent_of_forest_size(self, annulus):
        a = build_forest(annulus, RiForestParams(num_trees=3, master_seed=4))
        b = build_forest(annulus, RiForestParams(num_trees=8, master_seed=4))
        for ta, tb in zip(a.trees, b.trees):
            assert structure(ta) == structure(tb)

    def test_small_n(self):
        x = np.random.default_rng(0).normal(size=(50, 2))
        forest = build_forest(Dataset(x), RiForestParams(num_trees=5))
        for tree in forest.trees:
            assert tree.height_limit == 8
            assert sum(n.size for n in tree.root.iter_nodes() if n.is_external) == 50

    def test_without_pl_all_unit_increments(self, annulus):
        forest = build_forest(annulus, RiForestParams(num_trees=5, use_path_length=False))
        for tree in forest.trees:
            assert all(n.path_increment == 1.0 for n in internal_nodes(tree))

    def test_baseline_shape(self, annulus):
        forest = build_forest(annulus, iforest_baseline(RiForestParams(num_trees=5)))
        for tree in forest.trees:
            for n in internal_nodes(tree):
                assert n.split_vector.is_unit and n.split_kind == "random"
                assert n.path_increment == 1.0

    def test_sparsity_recorded(self, annulus):
        forest = build_forest(annulus, RiForestParams(num_trees=50))
        lams = [t.sparsity for t in forest.trees]
        assert all(0 <= v < 1 for v in lams) and len(set(lams)) == 50
