"""
Looking inside one tree
=======================

The reference builder can record every split it makes. Here we grow a single
tree on a two-cluster sample and print, node by node, how the split was chosen:
the entropy of the chosen projection, the split kind and the path increment
``pl`` that a row crossing this node adds to its path length.
"""

import numpy as np

from riforest.builder import BuildContext, build_tree, make_rng
from riforest.model import RiForestParams
from riforest.projection import draw_sparsity

rng = np.random.default_rng(0)
# a large cluster and a small, well separated one
x = np.vstack([rng.normal(0, 1, (240, 2)), rng.normal(7, 0.3, (16, 2))])

tree_rng = make_rng(12)
ctx = BuildContext(RiForestParams(), height_limit=8, sparsity=draw_sparsity(tree_rng), rng=tree_rng)
ctx.trace = []
tree = build_tree(x, ctx, engine="python")

print(f"sparsity lambda for this tree: {tree.sparsity:.3f}")
print("depth  kind      entropy  pl     left/right")
for rec in ctx.trace[:12]:
    ent = "   -   " if rec["entropy"] is None else f"{rec['entropy']:.3f}  "
    print(
        f"{rec['depth']:>5}  {rec['kind']:<8}  {ent}  {rec['pl']:.3f}  "
        f"{rec['left_rows'].size}/{rec['right_rows'].size}"
    )

# the root usually cuts the small cluster off with a low pl: rows isolated by
# an unbalanced split get a short path, which is what makes them anomalous
small = np.arange(240, 256)
root = ctx.trace[0]
print("root separates the small cluster:",
      set(small) <= set(root["left_rows"]) or set(small) <= set(root["right_rows"]))
