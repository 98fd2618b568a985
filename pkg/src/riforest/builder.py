"""Tree and forest construction, including the ablation variants."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from riforest.histogram import (
    Histogram,
    blank_space_split,
    build_histogram,
    entropy_from_counts,
    histogram_counts_in_range,
    valley_emphasis,
)
from riforest.model import (
    Dataset,
    ForestModel,
    RiForestParams,
    TreeModel,
    TreeNode,
    height_limit,
    standardize_apply,
    standardize_fit,
    subsample_indices,
    validate_params,
)
from riforest.projection import (
    MAX_REDRAWS,
    RANDOM_PROJECTION,
    HyperplaneVector,
    SparsityDraw,
    draw_sparsity,
    project_dense,
    random_coefficients,
    unit_basis,
)
from riforest.scoring import c

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output step applied to state ``x``."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Child seed for stream ``index``: splitmix64(splitmix64(master) + index * golden)."""
    return splitmix64((splitmix64(master_seed & _MASK64) + (index & _MASK64) * _GOLDEN) & _MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class BuildContext:
    params: RiForestParams
    height_limit: int
    sparsity: SparsityDraw
    rng: np.random.Generator
    depth: int = 0
    trace: list | None = None

    def child(self) -> BuildContext:
        return BuildContext(
            self.params, self.height_limit, self.sparsity, self.rng, self.depth + 1, self.trace
        )


def _split_on(values: np.ndarray, strategy: str, params: RiForestParams, rng, hist=None):
    """Split point and path increment for the chosen projection."""
    if strategy == "valley":
        vs = valley_emphasis(hist or build_histogram(values, params.num_bins))
        return vs.split_point, vs.pl
    if strategy == "random":
        return rng.uniform(values.min(), values.max()), 1.0
    q, _ = blank_space_split(values)
    return q, 1.0


def _candidate_projections(x: np.ndarray, ctx: BuildContext):
    """Projections onto every candidate, plus the random coefficient matrix."""
    p = ctx.params
    d = x.shape[1]
    if p.use_random_hyperplanes and p.num_random_hyperplanes > 0:
        coef = random_coefficients(d, p.num_random_hyperplanes, ctx.sparsity, ctx.rng)
        proj = np.concatenate([x, project_dense(x, coef)], axis=1)
    else:
        coef = np.empty((0, d))
        proj = x
    return proj, coef


def _hyperplane(k: int, d: int, coef: np.ndarray) -> HyperplaneVector:
    if k < d:
        return unit_basis(d)[k]
    return HyperplaneVector(coef[k - d], RANDOM_PROJECTION)


def _grow(x: np.ndarray, rows: np.ndarray, ctx: BuildContext) -> TreeNode:
    p = ctx.params
    m, d = x.shape
    if ctx.depth >= ctx.height_limit or m <= 1:
        return TreeNode.external(m)

    # candidate k < d is the unit vector e_k, the rest are random directions
    proj, coef = _candidate_projections(x, ctx)
    lo = proj.min(axis=0)
    hi = proj.max(axis=0)
    usable = np.flatnonzero(hi > lo)
    if usable.size == 0:
        return TreeNode.external(m)

    entropy = hist = None
    if p.use_entropy_gate:
        sub = proj[:, usable]
        counts = histogram_counts_in_range(sub, lo[usable], hi[usable], p.num_bins)
        ent = entropy_from_counts(counts)
        passing = np.flatnonzero(ent < p.entropy_threshold)
        if passing.size:
            j = int(passing[ctx.rng.integers(passing.size)])
            k = int(usable[j])
            entropy = float(ent[j])
            hist = Histogram(float(lo[k]), float(hi[k]), counts[j])
            kind = p.split_strategy
        else:
            k = int(usable[ctx.rng.integers(usable.size)])
            kind = "midpoint"
    else:
        k = int(usable[ctx.rng.integers(usable.size)])
        kind = p.split_strategy

    values = proj[:, k]
    if kind == "midpoint":
        q, pl = (lo[k] + hi[k]) / 2.0, 1.0
    else:
        q, pl = _split_on(values, kind, p, ctx.rng, hist)
    if not p.use_path_length:
        pl = 1.0

    go_left = values <= q
    n_left = int(np.count_nonzero(go_left))
    if n_left == 0 or n_left == m:
        return TreeNode.external(m)

    if ctx.trace is not None:
        ctx.trace.append(
            {
                "depth": ctx.depth,
                "kind": kind,
                "entropy": entropy,
                "pl": pl,
                "rows": rows,
                "left_rows": rows[go_left],
                "right_rows": rows[~go_left],
            }
        )
    go_right = ~go_left
    left = _grow(x[go_left], rows[go_left], ctx.child())
    right = _grow(x[go_right], rows[go_right], ctx.child())
    return TreeNode.internal(_hyperplane(k, d, coef), q, pl, left, right, kind, m)


ENGINES = ("numba", "python")

_KIND_CODES = {"valley": 0, "random": 1, "blank": 2}
_KIND_NAMES = ("valley", "random", "blank", "midpoint")


def _compiled_fits(m: int, L: int) -> bool:
    # the kernel compares valley objectives in int64; 2 L^2 m^4 bounds them
    return 2 * L * L * m**4 < 2**63


def _grow_compiled(x: np.ndarray, ctx: BuildContext) -> TreeNode:
    from riforest import _kernel

    p = ctx.params
    d = x.shape[1]
    tau = p.num_random_hyperplanes if p.use_random_hyperplanes else 0
    s = ctx.sparsity.s
    n, kind, left, right, q, pl, size, cand, coefs = _kernel.grow_tree(
        np.ascontiguousarray(x),
        ctx.rng,
        ctx.height_limit,
        p.num_bins,
        float(p.entropy_threshold),
        tau,
        p.use_entropy_gate,
        p.use_path_length,
        _KIND_CODES[p.split_strategy],
        1.0 / s,
        math.sqrt(3.0 * s),
        MAX_REDRAWS,
    )
    # children always follow their parent in pre-order, so build back to front
    nodes: list[TreeNode | None] = [None] * n
    basis = unit_basis(d)
    for i in range(n - 1, -1, -1):
        if kind[i] < 0:
            nodes[i] = TreeNode.external(size[i])
            continue
        k = int(cand[i])
        vector = basis[k] if k < d else HyperplaneVector(coefs[k - d], RANDOM_PROJECTION)
        nodes[i] = TreeNode.internal(
            vector, q[i], pl[i], nodes[left[i]], nodes[right[i]], _KIND_NAMES[kind[i]], size[i]
        )
    return nodes[0]


def build_tree(x: np.ndarray, ctx: BuildContext, engine: str = "numba") -> TreeModel:
    """Grow one tree on an already standardized subsample.

    ``engine="python"`` runs the readable reference builder; ``"numba"`` runs a
    compiled equivalent that yields the same tree from the same generator. The
    reference builder is used whenever a trace is requested: pass
    ``ctx.trace = []`` to record one dict per internal node (depth, split kind,
    entropy of the chosen projection, pl and the row partition).
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"subsample must be a non-empty 2-D matrix, got shape {x.shape}")
    compiled = (
        engine == "numba"
        and ctx.trace is None
        and ctx.depth == 0
        and _compiled_fits(x.shape[0], ctx.params.num_bins)
    )
    if compiled:
        root = _grow_compiled(x, ctx)
    else:
        root = _grow(x, np.arange(x.shape[0]), ctx)
    return TreeModel(root, ctx.sparsity.lam, ctx.height_limit)


def build_forest(
    data: Dataset, params: RiForestParams | None = None, engine: str = "numba"
) -> ForestModel:
    """Standardize ``data`` and grow ``params.num_trees`` trees.

    Tree k draws everything (sparsity, subsample, node randomness) from its own
    generator seeded with ``derive_seed(master_seed, k)``, so the result does
    not depend on build order. Both engines give identical forests.
    """
    params = validate_params(params or RiForestParams())
    stats = standardize_fit(data)
    x = standardize_apply(data, stats).values
    limit = height_limit(params.subsample_size)

    trees = []
    for k in range(params.num_trees):
        rng = make_rng(derive_seed(params.master_seed, k))
        draw = draw_sparsity(rng)
        idx = subsample_indices(x.shape[0], params.subsample_size, rng)
        ctx = BuildContext(params, limit, draw, rng)
        trees.append(build_tree(x[idx], ctx, engine))
    logger.debug("built %d trees on n=%d, d=%d", len(trees), data.n, data.d)
    return ForestModel(trees, params, stats, c(params.subsample_size))
