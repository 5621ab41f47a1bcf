"""Synthetic desk-scale fixtures: a balanced tree with clustered samples.

The geometry mimics a fine-grained recognition domain. Class directions
nest along the tree: every node contributes its own axis, scaled down one
notch per level, to the directions of everything below it. Leaves in the
same family therefore share most of their direction and differ only in a
small private component, so isotropic sample noise blurs fine
distinctions long before it threatens coarse ones. Internal nodes get
the normalized mean of their descendant leaves tilted by a fixed
node-specific direction: superclass embeddings are imperfect proxies for
their members, so some leaves are misrouted at coarse vocabularies until
training repairs the map. The noise argument is the expected norm of a
sample's perturbation relative to its unit class direction (per
coordinate it is sigma over sqrt(dim)), so one sigma value means the
same corruption level at any dimension.

The tree and embeddings depend only on the shape arguments; the seed
moves the sample noise alone. Repeat calls are byte-identical.
"""
from __future__ import annotations

import math

import numpy as np

from .classifier import EmbeddingTable, SampleSet
from .fileio import write_embeddings, write_samples, write_tree
from .taxonomy import TaxonomyTree, load_tree


def _branching(leaves: int, depth: int) -> int:
    b = 2
    while b**depth < leaves:
        b += 1
    return b


def _plan_tree(leaves: int, depth: int) -> str:
    """Lay out a balanced tree document for the given leaf count.

    Uses the smallest branching factor whose full tree holds all leaves,
    splitting the leaf range by subtree capacity; a range of one attaches
    its leaf directly instead of growing a chain of single children.
    """
    b = _branching(leaves, depth)
    names = ["n0"]
    parent_names = ["-"]

    def grow(parent: int, count: int, levels_left: int) -> None:
        capacity = b ** (levels_left - 1)
        offset = 0
        while offset < count:
            size = min(capacity, count - offset)
            idx = len(names)
            names.append(f"n{idx}")
            parent_names.append(names[parent])
            if size > 1:
                grow(idx, size, levels_left - 1)
            offset += size

    grow(0, leaves, depth)
    return "".join(f"{n}\t{p}\n" for n, p in zip(names, parent_names))


def _leaf_descendants(tree: TaxonomyTree, node: int) -> list[int]:
    stack, found = [node], []
    while stack:
        v = stack.pop()
        if tree.is_leaf(v):
            found.append(v)
        else:
            stack.extend(tree.children[v])
    return found


# Per-level shrink of the private component a node adds on top of its
# parent's direction. Smaller values make siblings more alike and their
# distinction more fragile under noise.
LEVEL_SCALE = 0.5

# Tilt applied to internal-node embeddings, relative to the exact mean of
# their descendant leaves. With no tilt the identity map is already the
# best possible classifier at every level (an internal weight is then
# always the mean of its leaf weights, whatever the map does), leaving
# nothing for hierarchy-aware training to improve. The tilt models the
# realistic gap between a superclass embedding and its members' cluster;
# tuning can close it. Directions come from a fixed stream so embeddings
# depend only on the tree shape and dimension.
INTERNAL_TILT = 0.8
_TILT_STREAM = 0x5EED


def _embedding_table(
    tree: TaxonomyTree,
    dim: int,
    tilt: float = INTERNAL_TILT,
    level_scale: float = LEVEL_SCALE,
) -> EmbeddingTable:
    if dim < tree.n_nodes - 1:
        raise ValueError(
            f"dim must be at least {tree.n_nodes - 1} (one axis per non-root node)"
        )
    raw = np.zeros((tree.n_nodes, dim), dtype=np.float64)
    axis = 0
    for node in range(tree.n_nodes):
        if node == tree.root:
            continue
        raw[node] = raw[tree.parents[node]]
        raw[node, axis] = level_scale ** (tree.depths[node] - 1)
        axis += 1
    vectors = np.zeros((tree.n_nodes, dim), dtype=np.float64)
    for leaf in tree.leaf_nodes:
        vectors[leaf] = raw[leaf] / np.linalg.norm(raw[leaf])
    gen = np.random.Generator(np.random.PCG64(_TILT_STREAM))
    for node in tree.internal_nodes:
        if node == tree.root:
            continue
        mean = vectors[_leaf_descendants(tree, node)].mean(axis=0)
        away = gen.standard_normal(dim)
        mixed = mean / np.linalg.norm(mean) + tilt * away / np.linalg.norm(away)
        vectors[node] = mixed / np.linalg.norm(mixed)
    return EmbeddingTable(dim=dim, vectors=vectors)


def gen_synth(
    leaves: int,
    depth: int,
    dim: int,
    per_leaf: int,
    noise: float,
    seed: int,
) -> tuple[str, str, str]:
    """Build a fixture and return (tree, embeddings, samples) documents.

    ``noise`` is the expected norm of the Gaussian perturbation added to
    each sample's unit leaf embedding (per-coordinate sigma is
    ``noise / sqrt(dim)``). ``dim`` must be at least the number of
    non-root nodes so every class can own a direction.
    """
    if leaves < 2:
        raise ValueError("leaves must be at least 2")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if per_leaf < 1:
        raise ValueError("per_leaf must be at least 1")
    if noise < 0:
        raise ValueError("noise must be non-negative")

    tree = load_tree(_plan_tree(leaves, depth))
    table = _embedding_table(tree, dim)

    gen = np.random.Generator(np.random.PCG64(seed))
    ids: list[str] = []
    labels: list[int] = []
    blocks: list[np.ndarray] = []
    scale = noise / math.sqrt(dim)
    for leaf in tree.leaf_nodes:
        draws = table.vectors[leaf] + scale * gen.standard_normal((per_leaf, dim))
        blocks.append(draws)
        ids.extend(f"{tree.names[leaf]}.{j}" for j in range(per_leaf))
        labels.extend([leaf] * per_leaf)
    samples = SampleSet(
        ids=tuple(ids),
        leaf_labels=np.asarray(labels, dtype=np.int64),
        features=np.concatenate(blocks, axis=0),
    )

    sample_lines = write_samples(samples, tree, dim).splitlines()
    sample_lines.insert(1, f"# seed {seed}")
    return (
        write_tree(tree),
        write_embeddings(table, tree),
        "\n".join(sample_lines) + "\n",
    )
