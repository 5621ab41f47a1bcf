"""Text formats for every artifact the tool reads or writes.

All files are UTF-8, tab-separated, with `#` comment lines. Floats are
serialized with repr, the shortest digits that parse back to the same
binary64 value, so write-load-write is a fixpoint and equal values always
produce equal bytes. Loaders validate eagerly and raise FormatError with
the offending line number.
"""
from __future__ import annotations

import numpy as np

from .classifier import EmbeddingTable, PromptParams, SampleSet
from .metrics import MetricsReport
from .taxonomy import TaxonomyTree
from .trainer import TrainLog


class FormatError(ValueError):
    """A document does not match its declared format."""


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(x))


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"{what} line {lineno}: bad number {token!r}") from None
    if not np.isfinite(value):
        raise FormatError(f"{what} line {lineno}: non-finite number {token!r}")
    return value


def _floats(tokens: list[str], lineno: int, what: str) -> np.ndarray:
    return np.asarray([_parse_float(t, lineno, what) for t in tokens], dtype=np.float64)


def _split_dim_doc(text: str, what: str) -> tuple[int, list[tuple[int, str]]]:
    """Parse the mandatory `#dim <d>` first line; return dim and data lines."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#dim"):
        raise FormatError(f"{what}: first line must be '#dim <d>'")
    parts = lines[0].split()
    if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
        raise FormatError(f"{what}: malformed dimension header {lines[0]!r}")
    dim = int(parts[1])
    rows = [
        (i, ln)
        for i, ln in enumerate(lines[1:], start=2)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    return dim, rows


# ---------------------------------------------------------------- trees

def write_tree(tree: TaxonomyTree) -> str:
    lines = []
    for i, name in enumerate(tree.names):
        parent = tree.parents[i]
        lines.append(f"{name}\t{'-' if parent is None else tree.names[parent]}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------- embeddings

def load_embeddings(text: str, tree: TaxonomyTree) -> EmbeddingTable:
    dim, rows = _split_dim_doc(text, "embedding table")
    mapping: dict[str, np.ndarray] = {}
    for lineno, line in rows:
        fields = line.split("\t")
        if len(fields) != dim + 1:
            raise FormatError(
                f"embedding table line {lineno}: expected name plus {dim} values"
            )
        name = fields[0].strip()
        if name in mapping:
            raise FormatError(f"embedding table line {lineno}: duplicate name {name!r}")
        mapping[name] = _floats(fields[1:], lineno, "embedding table")
    return EmbeddingTable.from_names(tree, dim, mapping)


def write_embeddings(table: EmbeddingTable, tree: TaxonomyTree) -> str:
    lines = [f"#dim {table.dim}"]
    for i, name in enumerate(tree.names):
        if i == tree.root:
            continue
        row = "\t".join(format_float(x) for x in table.vectors[i])
        lines.append(f"{name}\t{row}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- samples

def load_samples(text: str, tree: TaxonomyTree) -> SampleSet:
    dim, rows = _split_dim_doc(text, "sample file")
    ids: list[str] = []
    labels: list[int] = []
    feats: list[np.ndarray] = []
    for lineno, line in rows:
        fields = line.split("\t")
        if len(fields) != dim + 2:
            raise FormatError(
                f"sample file line {lineno}: expected id, leaf, and {dim} values"
            )
        sid, leaf_name = fields[0].strip(), fields[1].strip()
        if leaf_name not in tree.name_index:
            raise FormatError(f"sample file line {lineno}: unknown leaf {leaf_name!r}")
        leaf = tree.name_index[leaf_name]
        if not tree.is_leaf(leaf):
            raise FormatError(f"sample file line {lineno}: {leaf_name!r} is not a leaf")
        vec = _floats(fields[2:], lineno, "sample file")
        if not vec.any():
            raise FormatError(f"sample file line {lineno}: all-zero feature")
        ids.append(sid)
        labels.append(leaf)
        feats.append(vec)
    features = (
        np.stack(feats) if feats else np.zeros((0, dim), dtype=np.float64)
    )
    return SampleSet(
        ids=tuple(ids),
        leaf_labels=np.asarray(labels, dtype=np.int64),
        features=features,
    )


def write_samples(samples: SampleSet, tree: TaxonomyTree, dim: int) -> str:
    lines = [f"#dim {dim}"]
    for i, sid in enumerate(samples.ids):
        row = "\t".join(format_float(x) for x in samples.features[i])
        lines.append(f"{sid}\t{tree.names[int(samples.leaf_labels[i])]}\t{row}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- params

def load_params(text: str) -> PromptParams:
    rows = [
        (i, ln)
        for i, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]

    def take(expected: str) -> tuple[int, list[str]]:
        if not rows:
            raise FormatError(f"params file: missing {expected!r} record")
        lineno, line = rows.pop(0)
        fields = line.split("\t")
        if fields[0] != expected:
            raise FormatError(
                f"params file line {lineno}: expected {expected!r}, got {fields[0]!r}"
            )
        return lineno, fields[1:]

    lineno, rest = take("dim")
    if len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
        raise FormatError(f"params file line {lineno}: bad dimension")
    dim = int(rest[0])
    lineno, rest = take("tau")
    if len(rest) != 1:
        raise FormatError(f"params file line {lineno}: bad tau record")
    tau = _parse_float(rest[0], lineno, "params file")
    weight = np.zeros((dim, dim))
    for r in range(dim):
        lineno, rest = take("A")
        if len(rest) != dim:
            raise FormatError(f"params file line {lineno}: expected {dim} values")
        weight[r] = _floats(rest, lineno, "params file")
    lineno, rest = take("c")
    if len(rest) != dim:
        raise FormatError(f"params file line {lineno}: expected {dim} values")
    bias = _floats(rest, lineno, "params file")
    if rows:
        raise FormatError(f"params file line {rows[0][0]}: unexpected trailing record")
    try:
        return PromptParams(weight=weight, bias=bias, tau=tau)
    except ValueError as exc:
        raise FormatError(f"params file: {exc}") from None


def write_params(params: PromptParams) -> str:
    lines = [f"dim\t{params.dim}", f"tau\t{format_float(params.tau)}"]
    for row in params.weight:
        lines.append("A\t" + "\t".join(format_float(x) for x in row))
    lines.append("c\t" + "\t".join(format_float(x) for x in params.bias))
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- reports

def write_report(report: MetricsReport) -> str:
    lines = [f"# seed {report.seed}"]
    lines.append(f"leaf_acc\t{format_float(report.leaf_acc)}")
    lines.append(f"hca\t{format_float(report.hca)}")
    lines.append(f"mta\t{format_float(report.mta)}")
    for beta, value in zip(report.betas, report.mta_per_beta):
        lines.append(f"mta@{format_float(beta)}\t{format_float(value)}")
    lines.append(f"T\t{report.cuts_per_beta}")
    lines.append(f"seed\t{report.seed}")
    return "\n".join(lines) + "\n"


def write_cut_details(report: MetricsReport) -> str:
    lines = [f"# seed {report.seed}", "# beta\tsize\taccuracy"]
    for cut in report.cuts:
        lines.append(
            f"{format_float(cut.beta)}\t{cut.size}\t{format_float(cut.accuracy)}"
        )
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ train log

def write_train_log(log: TrainLog) -> str:
    lines = [
        f"# seed {log.seed}",
        f"# params_digest {log.params_digest}",
        "# iteration\tlr\tcut_size\tdtl\tncl\ttotal",
    ]
    for rec in log.records:
        lines.append(
            "\t".join(
                (
                    str(rec.iteration),
                    format_float(rec.lr),
                    str(rec.cut_size),
                    format_float(rec.dtl),
                    format_float(rec.ncl),
                    format_float(rec.total),
                )
            )
        )
    return "\n".join(lines) + "\n"
