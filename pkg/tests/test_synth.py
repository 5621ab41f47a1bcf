"""Synthetic fixture generator: tree layout, geometry, seeded noise."""
from __future__ import annotations

import numpy as np
import pytest

from hiertune import PromptParams, gen_synth, hca, leaf_accuracy, load_tree
from hiertune.fileio import load_embeddings, load_samples
from hiertune.synth import LEVEL_SCALE, _embedding_table, _plan_tree


def load_all(tree_txt: str, emb_txt: str, samples_txt: str):
    tree = load_tree(tree_txt)
    return tree, load_embeddings(emb_txt, tree), load_samples(samples_txt, tree)


def test_plan_full_ternary_tree():
    tree = load_tree(_plan_tree(27, 3))
    assert tree.n_nodes == 40
    assert len(tree.leaf_nodes) == 27
    assert len(tree.internal_nodes) == 13
    assert all(tree.depths[leaf] == 3 for leaf in tree.leaf_nodes)
    assert all(len(tree.children[n]) == 3 for n in tree.internal_nodes)


def test_plan_full_binary_tree():
    tree = load_tree(_plan_tree(4, 2))
    assert tree.n_nodes == 7
    assert len(tree.leaf_nodes) == 4
    assert all(tree.depths[leaf] == 2 for leaf in tree.leaf_nodes)


def test_plan_partial_capacity_split():
    # Five leaves at depth two force branching three: subtrees of three
    # and two leaves under the root.
    tree = load_tree(_plan_tree(5, 2))
    assert len(tree.leaf_nodes) == 5
    sizes = sorted(len(tree.children[c]) for c in tree.children[tree.root])
    assert sizes == [2, 3]


def test_plan_attaches_single_leaf_directly():
    # A leftover range of one leaf becomes a leaf child, not a chain of
    # single-child internals.
    tree = load_tree(_plan_tree(3, 3))
    assert len(tree.leaf_nodes) == 3
    for node in tree.internal_nodes:
        for child in tree.children[node]:
            if tree.is_leaf(child) and tree.depths[child] < 3:
                break
        else:
            continue
        break
    else:
        pytest.fail("expected a shallow directly-attached leaf")


def test_embedding_geometry_orders_relatedness():
    tree = load_tree(_plan_tree(27, 3))
    table = _embedding_table(tree, 39)
    np.testing.assert_array_equal(table.vectors[tree.root], np.zeros(39))
    norms = np.linalg.norm(table.vectors[1:], axis=1)
    np.testing.assert_allclose(norms, np.ones(tree.n_nodes - 1), atol=1e-12)

    def leaf_cos(a: int, b: int) -> float:
        return float(table.vectors[a] @ table.vectors[b])

    by_parent: dict[int, list[int]] = {}
    for leaf in tree.leaf_nodes:
        by_parent.setdefault(tree.parents[leaf], []).append(leaf)
    families = sorted(by_parent)
    sib = leaf_cos(*by_parent[families[0]][:2])
    cousin_a = by_parent[families[0]][0]
    cousin_b = by_parent[families[1]][0]
    assert tree.parents[families[0]] == tree.parents[families[1]]
    cousin = leaf_cos(cousin_a, cousin_b)
    far_parent = families[-1]
    assert tree.parents[far_parent] != tree.parents[families[0]]
    far = leaf_cos(cousin_a, by_parent[far_parent][0])
    assert sib > cousin + 0.1 > far + 0.2
    # Nesting makes the exact sibling cosine a ratio of level scales.
    s2, s4 = LEVEL_SCALE**2, LEVEL_SCALE**4
    np.testing.assert_allclose(sib, (1 + s2) / (1 + s2 + s4), atol=1e-12)


def test_embedding_table_requires_room_for_every_node():
    tree = load_tree(_plan_tree(27, 3))
    with pytest.raises(ValueError, match="at least 39"):
        _embedding_table(tree, 38)
    assert _embedding_table(tree, 39).dim == 39


def test_gen_synth_validates_arguments():
    good = dict(leaves=4, depth=2, dim=8, per_leaf=2, noise=0.5, seed=0)
    for bad in (
        dict(good, leaves=1),
        dict(good, depth=0),
        dict(good, per_leaf=0),
        dict(good, noise=-0.1),
        dict(good, dim=5),
    ):
        with pytest.raises(ValueError):
            gen_synth(**bad)


def test_gen_synth_repeat_is_byte_identical():
    first = gen_synth(leaves=5, depth=2, dim=8, per_leaf=3, noise=0.4, seed=11)
    second = gen_synth(leaves=5, depth=2, dim=8, per_leaf=3, noise=0.4, seed=11)
    assert first == second


def test_gen_synth_seed_moves_only_the_samples():
    a = gen_synth(leaves=5, depth=2, dim=8, per_leaf=3, noise=0.4, seed=0)
    b = gen_synth(leaves=5, depth=2, dim=8, per_leaf=3, noise=0.4, seed=1)
    assert a[0] == b[0]
    assert a[1] == b[1]
    assert a[2] != b[2]


def test_gen_synth_sample_doc_carries_seed_comment():
    _, _, samples_txt = gen_synth(leaves=4, depth=2, dim=8, per_leaf=2, noise=0.3, seed=42)
    lines = samples_txt.splitlines()
    assert lines[0].startswith("#dim ")
    assert lines[1] == "# seed 42"


def test_gen_synth_outputs_parse_consistently():
    tree, table, data = load_all(
        *gen_synth(leaves=9, depth=2, dim=16, per_leaf=4, noise=0.5, seed=3)
    )
    assert len(tree.leaf_nodes) == 9
    assert table.dim == 16
    assert len(data) == 36
    counts = {leaf: 0 for leaf in tree.leaf_nodes}
    for leaf in data.leaf_labels:
        counts[int(leaf)] += 1
    assert set(counts.values()) == {4}


def test_gen_synth_noiseless_fixture_is_perfectly_separable():
    tree, table, data = load_all(
        *gen_synth(leaves=4, depth=2, dim=8, per_leaf=2, noise=0.0, seed=0)
    )
    ident = PromptParams.identity(8, 0.07)
    assert leaf_accuracy(tree, ident, table, data) == 1.0
    assert hca(tree, ident, table, data) == 1.0


def test_gen_synth_extreme_noise_hits_chance_level():
    tree, table, data = load_all(
        *gen_synth(leaves=27, depth=3, dim=64, per_leaf=40, noise=100.0, seed=0)
    )
    assert len(data) == 1080
    acc = leaf_accuracy(tree, PromptParams.identity(64, 0.07), table, data)
    assert abs(acc - 1.0 / 27.0) <= 0.1


def test_gen_synth_noise_scale_matches_contract():
    # noise is the expected perturbation norm, so each coordinate gets
    # sigma / sqrt(dim).
    tree, table, data = load_all(
        *gen_synth(leaves=4, depth=2, dim=16, per_leaf=200, noise=0.6, seed=5)
    )
    deviations = data.features - table.vectors[data.leaf_labels]
    per_coord = deviations.std()
    assert abs(per_coord - 0.6 / 4.0) < 0.005
    norms = np.linalg.norm(deviations, axis=1)
    assert abs(norms.mean() - 0.6) < 0.02
