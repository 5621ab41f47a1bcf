"""Training objectives: cross-entropy over tree-derived vocabularies.

Both objectives reduce to one primitive: softmax cross-entropy of a batch
against a label set, where each sample's target is the unique label on its
leaf's root path. The node-centric loss averages that primitive over every
internal node's child set, teaching each local decision; the treecut loss
applies it to one sampled fringe, teaching global consistency. Gradients
with respect to the affine map are closed-form throughout and are checked
against finite differences in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import EmbeddingTable, PromptParams, SampleSet, unit_rows
from .rng import Rng64
from .taxonomy import KIND_TREECUT, LabelSet, TaxonomyTree


@dataclass(frozen=True)
class LossValue:
    """A loss with its gradients and the sample count that shaped it."""

    value: float
    grad_weight: np.ndarray
    grad_bias: np.ndarray
    n_contributing: int

    @classmethod
    def zero(cls, dim: int, n_contributing: int = 0) -> LossValue:
        return cls(0.0, np.zeros((dim, dim)), np.zeros(dim), n_contributing)


def _ce_core(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    labels: LabelSet,
    batch: SampleSet,
) -> tuple[LossValue, np.ndarray]:
    """Mean cross-entropy of ``batch`` against ``labels``, with gradients.

    Samples whose leaf has no label on its root path are skipped; the
    returned mask marks the contributors. The mean runs over contributors
    only.
    """
    if len(labels) < 2:
        raise ValueError("cross-entropy needs at least two labels")
    member_pos = {m: k for k, m in enumerate(labels.members)}
    targets = np.full(len(batch), -1, dtype=np.int64)
    for i, leaf in enumerate(batch.leaf_labels):
        t = tree.target_in(int(leaf), labels)
        if t is not None:
            targets[i] = member_pos[t]
    mask = targets >= 0
    n_contrib = int(mask.sum())
    if n_contrib == 0:
        return LossValue.zero(params.dim), mask

    emb = table.rows(labels.members)
    weights = emb @ params.weight.T + params.bias
    what, wnorm = unit_rows(weights, "label weights")
    vhat, _ = unit_rows(np.asarray(batch.features[mask], dtype=np.float64), "features")
    cos = vhat @ what.T
    z = cos / params.tau
    shift = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shift)
    sez = ez.sum(axis=1, keepdims=True)
    rows = np.arange(n_contrib)
    t = targets[mask]
    value = float(-(shift[rows, t] - np.log(sez[:, 0])).mean())

    # Backprop: softmax-minus-onehot at the cosine logits, then through
    # the weight normalization, then through w = A e + b.
    c = ez / sez
    c[rows, t] -= 1.0
    c /= params.tau * n_contrib
    colsum = (c * cos).sum(axis=0)
    d_weights = (c.T @ vhat - colsum[:, None] * what) / wnorm[:, None]
    return (
        LossValue(value, d_weights.T @ emb, d_weights.sum(axis=0), n_contrib),
        mask,
    )


def cross_entropy_loss(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    labels: LabelSet,
    batch: SampleSet,
) -> LossValue:
    """Mean cross-entropy of a batch against one label set."""
    if len(batch) == 0:
        raise ValueError("batch is empty")
    loss, _ = _ce_core(tree, params, table, labels, batch)
    return loss


def node_centric_loss(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    batch: SampleSet,
) -> LossValue:
    """Average of the per-node child-set cross-entropies.

    Every internal node counts in the denominator, including those that
    contribute nothing (a single child, or no batch sample passing
    through); their terms are zero. ``n_contributing`` is the number of
    distinct samples that entered at least one node term.
    """
    if len(batch) == 0:
        raise ValueError("batch is empty")
    n_internal = len(tree.internal_nodes)
    dim = params.dim
    value = 0.0
    grad_w = np.zeros((dim, dim))
    grad_b = np.zeros(dim)
    union = np.zeros(len(batch), dtype=bool)
    for node in tree.internal_nodes:
        if len(tree.children[node]) < 2:
            continue
        part, mask = _ce_core(tree, params, table, tree.node_label_set(node), batch)
        value += part.value
        grad_w += part.grad_weight
        grad_b += part.grad_bias
        union |= mask
    return LossValue(
        value / n_internal,
        grad_w / n_internal,
        grad_b / n_internal,
        int(union.sum()),
    )


def treecut_loss(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    cut: LabelSet,
    batch: SampleSet,
) -> LossValue:
    """Cross-entropy of a batch against one treecut fringe.

    The fringe covers every leaf, so every sample contributes. A
    one-label fringe forces the answer and carries no loss.
    """
    if len(batch) == 0:
        raise ValueError("batch is empty")
    if cut.kind != KIND_TREECUT:
        raise ValueError(f"expected a treecut label set, got kind {cut.kind!r}")
    tree.treecut_label_set(cut.members)
    if len(cut) == 1:
        return LossValue.zero(params.dim, n_contributing=len(batch))
    loss, _ = _ce_core(tree, params, table, cut, batch)
    return loss


def total_loss(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    cut: LabelSet,
    batch: SampleSet,
    lam: float,
) -> tuple[LossValue, LossValue, LossValue]:
    """Treecut loss plus ``lam`` times the node-centric loss.

    Returns (total, treecut part, node part). At ``lam`` 0 the node part
    is skipped entirely and the total is the treecut object itself, so a
    zero weight is exact, not approximate.
    """
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    dtl = treecut_loss(tree, params, table, cut, batch)
    if lam == 0.0:
        return dtl, dtl, LossValue.zero(params.dim)
    ncl = node_centric_loss(tree, params, table, batch)
    total = LossValue(
        dtl.value + lam * ncl.value,
        dtl.grad_weight + lam * ncl.grad_weight,
        dtl.grad_bias + lam * ncl.grad_bias,
        dtl.n_contributing,
    )
    return total, dtl, ncl


def gradient_check(
    tree: TaxonomyTree,
    params: PromptParams,
    table: EmbeddingTable,
    cut: LabelSet,
    batch: SampleSet,
    lam: float,
    step: float = 1e-5,
    max_coords: int = 128,
    seed: int = 0,
) -> float:
    """Worst relative error of the analytic gradient vs central differences.

    Checks every coordinate of the map up to ``max_coords``; past that, a
    seeded shuffle picks the subset. The error at one coordinate is
    |analytic - numeric| / max(1, |numeric|).
    """
    total, _, _ = total_loss(tree, params, table, cut, batch, lam)
    dim = params.dim
    n_coords = dim * dim + dim
    coords = list(range(n_coords))
    if n_coords > max_coords:
        Rng64(seed).shuffle(coords)
        coords = coords[:max_coords]

    def value_at(weight: np.ndarray, bias: np.ndarray) -> float:
        moved = PromptParams(weight=weight, bias=bias, tau=params.tau)
        return total_loss(tree, moved, table, cut, batch, lam)[0].value

    worst = 0.0
    for k in coords:
        w_plus, w_minus = params.weight.copy(), params.weight.copy()
        b_plus, b_minus = params.bias.copy(), params.bias.copy()
        if k < dim * dim:
            i, j = divmod(k, dim)
            w_plus[i, j] += step
            w_minus[i, j] -= step
            analytic = total.grad_weight[i, j]
        else:
            i = k - dim * dim
            b_plus[i] += step
            b_minus[i] -= step
            analytic = total.grad_bias[i]
        numeric = (value_at(w_plus, b_plus) - value_at(w_minus, b_minus)) / (2 * step)
        worst = max(worst, abs(analytic - numeric) / max(1.0, abs(numeric)))
    return worst
