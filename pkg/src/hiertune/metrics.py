"""Evaluation: flat leaf accuracy plus two hierarchy-aware scores.

Leaf accuracy ignores the tree. Consistent accuracy also requires every
decision along the true root path to stay on that path, so it penalizes
models that are right at the leaf for locally wrong reasons. Treecut
accuracy scores the model on randomly coarsened vocabularies and averages,
probing robustness to label granularity. All sampling is seeded, so a
report is a pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import EmbeddingTable, PromptParams, SampleSet, predict
from .rng import Rng64, derive_seed
from .taxonomy import TaxonomyTree
from .treecut import build_matrices, sample_distinct


@dataclass(frozen=True)
class CutResult:
    """One evaluated treecut: its rate, fringe size, and accuracy."""

    beta: float
    size: int
    accuracy: float


@dataclass(frozen=True)
class MetricsReport:
    """All metrics of one evaluation run.

    ``cuts`` lists every treecut scored, grouped by rate in draw order;
    ``mta_per_beta`` and ``cuts_used`` align with ``betas``. ``mta`` is
    the unweighted mean over all cuts pooled, which differs from the mean
    of per-rate means only when some rate yields fewer distinct cuts.
    """

    leaf_acc: float
    hca: float
    mta: float
    betas: tuple[float, ...]
    mta_per_beta: tuple[float, ...]
    cuts_used: tuple[tuple[int, ...], ...]
    cuts: tuple[CutResult, ...]
    seed: int
    cuts_per_beta: int


def _require_data(data: SampleSet) -> None:
    if len(data) == 0:
        raise ValueError("evaluation data is empty")


def leaf_accuracy(
    tree: TaxonomyTree, params: PromptParams, table: EmbeddingTable, data: SampleSet
) -> float:
    """Fraction of samples whose leaf-vocabulary prediction is the true leaf."""
    _require_data(data)
    pred = predict(params, table, tree.leaf_label_set(), data.features)
    return float((pred == data.leaf_labels).mean())


def hca(
    tree: TaxonomyTree, params: PromptParams, table: EmbeddingTable, data: SampleSet
) -> float:
    """Fraction of samples correct at the leaf and at every ancestor.

    A sample succeeds when its leaf prediction is right and, for each
    ancestor of the true leaf, the prediction over that node's children
    picks the child on the true path. One-child ancestors are forced
    choices and always succeed, so only branching nodes are scored.
    Never exceeds leaf accuracy.
    """
    _require_data(data)
    ok = predict(params, table, tree.leaf_label_set(), data.features) == data.leaf_labels
    node_pred: dict[int, np.ndarray] = {}
    for node in tree.internal_nodes:
        if len(tree.children[node]) >= 2:
            node_pred[node] = predict(
                params, table, tree.node_label_set(node), data.features
            )
    for i in range(len(data)):
        if not ok[i]:
            continue
        below = int(data.leaf_labels[i])
        for node in tree.ancestors(below):
            preds = node_pred.get(node)
            if preds is not None and int(preds[i]) != below:
                ok[i] = False
                break
            below = node
    return float(ok.mean())


def mta(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    data: SampleSet,
    betas: tuple[float, ...],
    cuts_per_beta: int,
    seed: int,
) -> tuple[float, tuple[tuple[CutResult, ...], ...]]:
    """Mean accuracy over sampled treecut vocabularies.

    For each rate, up to ``cuts_per_beta`` distinct cuts come from a
    stream seeded by (seed XOR (rate index + 1)), so appending a rate
    never disturbs earlier draws. A sample is right under a cut when the
    prediction equals the cut member covering its true leaf. Returns the
    pooled mean over every cut drawn, plus per-rate groups.
    """
    _require_data(data)
    if not betas:
        raise ValueError("betas must be non-empty")
    if cuts_per_beta < 1:
        raise ValueError("cuts_per_beta must be at least 1")
    bundle = build_matrices(tree)
    groups = []
    for bi, beta in enumerate(betas):
        rng = Rng64(derive_seed(seed, bi + 1))
        group = []
        for cut in sample_distinct(tree, bundle, beta, cuts_per_beta, rng):
            targets = np.asarray(
                [tree.target_in(int(leaf), cut) for leaf in data.leaf_labels],
                dtype=np.int64,
            )
            pred = predict(params, table, cut, data.features)
            group.append(
                CutResult(
                    beta=float(beta),
                    size=len(cut),
                    accuracy=float((pred == targets).mean()),
                )
            )
        groups.append(tuple(group))
    pooled = float(np.mean([r.accuracy for group in groups for r in group]))
    return pooled, tuple(groups)


def evaluate(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    data: SampleSet,
    betas: tuple[float, ...],
    cuts_per_beta: int,
    seed: int,
) -> MetricsReport:
    """All three metrics in one report."""
    pooled, groups = mta(tree, params, table, data, betas, cuts_per_beta, seed)
    return MetricsReport(
        leaf_acc=leaf_accuracy(tree, params, table, data),
        hca=hca(tree, params, table, data),
        mta=pooled,
        betas=tuple(float(b) for b in betas),
        mta_per_beta=tuple(
            float(np.mean([r.accuracy for r in group])) for group in groups
        ),
        cuts_used=tuple(tuple(r.size for r in group) for group in groups),
        cuts=tuple(r for group in groups for r in group),
        seed=seed,
        cuts_per_beta=cuts_per_beta,
    )
