"""Shared fixtures: the worked demo tree, random trees, simple tables."""
from __future__ import annotations

import numpy as np

from hiertune import EmbeddingTable, PromptParams, Rng64, SampleSet, TaxonomyTree, load_tree

DEMO_DOC = "n0\t-\nn1\tn0\nn2\tn1\nn3\tn1\nn4\tn2\nn5\tn2\nn6\tn0\n"


def demo_tree() -> TaxonomyTree:
    """Seven-node tree used by the worked examples.

    n0 is the root with children n1 and n6; n1 has children n2 and n3;
    n2 has children n4 and n5. Leaves are n3, n4, n5, n6 and exactly
    three treecuts exist.
    """
    return load_tree(DEMO_DOC)


def random_tree(rng: Rng64, max_internal: int = 12, max_nodes: int = 40) -> TaxonomyTree:
    """Random rooted tree with at least two leaves, parents before children.

    Grows an internal skeleton first, then guarantees every childless
    internal node a leaf and sprinkles extra leaves across the skeleton.
    """
    n_internal = 1 + rng.next_below(max_internal)
    parents: list[int | None] = [None]
    for i in range(1, n_internal):
        parents.append(rng.next_below(i))
    children_count = [0] * n_internal
    for i in range(1, n_internal):
        children_count[parents[i]] += 1
    leaf_parents = [i for i in range(n_internal) if children_count[i] == 0]
    budget = max_nodes - n_internal - len(leaf_parents)
    extra = 0 if budget <= 0 else rng.next_below(budget + 1)
    for _ in range(extra):
        leaf_parents.append(rng.next_below(n_internal))
    while n_internal + len(leaf_parents) < max(n_internal + 2, 3):
        leaf_parents.append(rng.next_below(n_internal))
    lines = ["v0\t-"]
    for i in range(1, n_internal):
        lines.append(f"v{i}\tv{parents[i]}")
    for j, p in enumerate(leaf_parents):
        lines.append(f"v{n_internal + j}\tv{p}")
    return load_tree("\n".join(lines) + "\n")


def basis_table(tree: TaxonomyTree, dim: int | None = None) -> EmbeddingTable:
    """One standard-basis axis per non-root node; root row stays zero."""
    d = dim if dim is not None else tree.n_nodes - 1
    vectors = np.zeros((tree.n_nodes, d), dtype=np.float64)
    axis = 0
    for node in range(tree.n_nodes):
        if node == tree.root:
            continue
        vectors[node, axis] = 1.0
        axis += 1
    return EmbeddingTable(dim=d, vectors=vectors)


def random_table(tree: TaxonomyTree, dim: int, seed: int) -> EmbeddingTable:
    gen = np.random.Generator(np.random.PCG64(seed))
    vectors = gen.standard_normal((tree.n_nodes, dim))
    vectors[tree.root] = 0.0
    return EmbeddingTable(dim=dim, vectors=vectors)


def samples_at_leaves(
    tree: TaxonomyTree, table: EmbeddingTable, leaves: list[int] | None = None
) -> SampleSet:
    """One sample per requested leaf whose feature is the leaf embedding."""
    chosen = list(tree.leaf_nodes) if leaves is None else leaves
    return SampleSet(
        ids=tuple(f"s{i}" for i in range(len(chosen))),
        leaf_labels=np.asarray(chosen, dtype=np.int64),
        features=table.vectors[np.asarray(chosen)],
    )


def noisy_samples(
    tree: TaxonomyTree,
    table: EmbeddingTable,
    per_leaf: int,
    sigma: float,
    seed: int,
) -> SampleSet:
    gen = np.random.Generator(np.random.PCG64(seed))
    ids, labels, rows = [], [], []
    for leaf in tree.leaf_nodes:
        for j in range(per_leaf):
            ids.append(f"{tree.names[leaf]}.{j}")
            labels.append(leaf)
            rows.append(table.vectors[leaf] + sigma * gen.standard_normal(table.dim))
    return SampleSet(
        ids=tuple(ids),
        leaf_labels=np.asarray(labels, dtype=np.int64),
        features=np.asarray(rows),
    )


def random_params(dim: int, tau: float, seed: int, spread: float = 0.3) -> PromptParams:
    gen = np.random.Generator(np.random.PCG64(seed))
    weight = np.eye(dim) + spread * gen.standard_normal((dim, dim))
    bias = spread * gen.standard_normal(dim)
    return PromptParams(weight=weight, bias=bias, tau=tau)


def names_of(tree: TaxonomyTree, members: tuple[int, ...]) -> tuple[str, ...]:
    return tuple(tree.names[m] for m in members)
