"""Rooted class-hierarchy trees and the label sets drawn from them.

A taxonomy tree organizes dataset classes (the leaves) under superclass
nodes. A classification decision always happens against a *label set*: the
full leaf set, the children of one node, or the leaf fringe of a pruned
subtree (a treecut). Trees are immutable after load; every derived
structure holds read-only references.
"""
from __future__ import annotations

from dataclasses import dataclass, field

KIND_LEAF = "leaf"
KIND_NODE = "node"
KIND_TREECUT = "treecut"


class TreeFormatError(ValueError):
    """A tree document violates the file format or the tree invariants."""


@dataclass(frozen=True)
class LabelSet:
    """An ordered classification vocabulary of tree nodes.

    ``members`` holds node indices in ascending order (the canonical order
    used for matrix columns, softmax rows, and tie-breaking). ``kind``
    records how the set was formed; ``center`` is the parent node for
    children-of-node sets. Build instances through the ``TaxonomyTree``
    factories, which validate; the raw constructor does not.
    """

    members: tuple[int, ...]
    kind: str
    center: int | None = None

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, node: int) -> bool:
        return node in self.members


@dataclass(frozen=True)
class TaxonomyTree:
    """Immutable rooted tree of named class nodes.

    Node order equals file order, which the loader requires to be
    topological (every parent precedes its children). The root therefore
    always has index 0.
    """

    names: tuple[str, ...]
    parents: tuple[int | None, ...]
    children: tuple[tuple[int, ...], ...]
    depths: tuple[int, ...]
    leaf_nodes: tuple[int, ...]
    internal_nodes: tuple[int, ...]
    name_index: dict[str, int] = field(repr=False)

    root: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def is_leaf(self, node: int) -> bool:
        self._check_index(node)
        return not self.children[node]

    def index(self, name: str) -> int:
        try:
            return self.name_index[name]
        except KeyError:
            raise ValueError(f"unknown node name {name!r}") from None

    def _check_index(self, node: int) -> None:
        if not 0 <= node < len(self.names):
            raise ValueError(f"node index {node} out of range")

    def ancestors(self, node: int) -> tuple[int, ...]:
        """Chain from the parent of ``node`` up to and including the root.

        Empty for the root; ``node`` itself is excluded.
        """
        self._check_index(node)
        chain = []
        p = self.parents[node]
        while p is not None:
            chain.append(p)
            p = self.parents[p]
        return tuple(chain)

    def target_in(self, leaf: int, labels: LabelSet) -> int | None:
        """The unique member of ``labels`` on the root-to-``leaf`` path.

        This is the ground truth for classifying a sample of class ``leaf``
        against an arbitrary vocabulary: the member equal to the leaf or to
        one of its ancestors. Returns None when no member qualifies (the
        sample cannot be scored against ``labels``); raises if more than
        one qualifies, which means ``labels`` is not an antichain.
        """
        if not self.is_leaf(leaf):
            raise ValueError(f"node {self.names[leaf]!r} is not a leaf")
        members = set(labels.members)
        hits = [n for n in (leaf, *self.ancestors(leaf)) if n in members]
        if len(hits) > 1:
            names = ", ".join(self.names[h] for h in hits)
            raise ValueError(f"label set is not an antichain: {names} share a path")
        return hits[0] if hits else None

    def leaf_label_set(self) -> LabelSet:
        return LabelSet(self.leaf_nodes, KIND_LEAF)

    def node_label_set(self, node: int) -> LabelSet:
        """The children of ``node`` as a vocabulary."""
        self._check_index(node)
        if not self.children[node]:
            raise ValueError(f"node {self.names[node]!r} is a leaf and has no label set")
        return LabelSet(tuple(sorted(self.children[node])), KIND_NODE, center=node)

    def treecut_label_set(self, members: tuple[int, ...] | list[int]) -> LabelSet:
        """Validate ``members`` as a treecut fringe and wrap it.

        A valid treecut vocabulary excludes the root, is an antichain (no
        member is an ancestor of another), and covers every leaf (each leaf
        has exactly one ancestor-or-self among the members).
        """
        unique = sorted(set(members))
        if len(unique) != len(members):
            raise ValueError("treecut members must be distinct")
        member_set = set(unique)
        if self.root in member_set:
            raise ValueError("treecut must not contain the root")
        for m in unique:
            self._check_index(m)
            if member_set.intersection(self.ancestors(m)):
                raise ValueError(f"treecut is not an antichain at {self.names[m]!r}")
        for leaf in self.leaf_nodes:
            covers = sum(1 for n in (leaf, *self.ancestors(leaf)) if n in member_set)
            if covers != 1:
                raise ValueError(
                    f"treecut does not cover leaf {self.names[leaf]!r} exactly once"
                )
        return LabelSet(tuple(unique), KIND_TREECUT)


def load_tree(document: str) -> TaxonomyTree:
    """Parse and validate a tree document.

    Format: one record per line, ``name<TAB>parent-name``; the root uses
    ``-`` as its parent; lines starting with ``#`` and blank lines are
    ignored. A parent must be declared on an earlier line, so file order is
    topological and a cycle surfaces as a forward reference.
    """
    names: list[str] = []
    parents: list[int | None] = []
    index: dict[str, int] = {}
    root_seen = False

    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise TreeFormatError(f"line {lineno}: expected 'name<TAB>parent', got {line!r}")
        name, parent_name = fields[0].strip(), fields[1].strip()
        if not name or name == "-":
            raise TreeFormatError(f"line {lineno}: invalid node name {name!r}")
        if name in index:
            raise TreeFormatError(f"line {lineno}: duplicate node name {name!r}")
        if parent_name == "-":
            if root_seen:
                raise TreeFormatError(f"line {lineno}: multiple roots ({name!r})")
            root_seen = True
            parent: int | None = None
        else:
            if parent_name not in index:
                raise TreeFormatError(
                    f"line {lineno}: parent {parent_name!r} of {name!r} not declared earlier"
                )
            parent = index[parent_name]
        index[name] = len(names)
        names.append(name)
        parents.append(parent)

    if not names:
        raise TreeFormatError("empty document")
    if not root_seen:
        raise TreeFormatError("no root record (parent '-')")
    if len(names) == 1:
        raise TreeFormatError("root-only tree: the root cannot also be a class")

    n = len(names)
    children: list[list[int]] = [[] for _ in range(n)]
    depths = [0] * n
    for i, p in enumerate(parents):
        if p is not None:
            children[p].append(i)
            depths[i] = depths[p] + 1

    leaf_nodes = tuple(i for i in range(n) if not children[i])
    internal_nodes = tuple(i for i in range(n) if children[i])
    return TaxonomyTree(
        names=tuple(names),
        parents=tuple(parents),
        children=tuple(tuple(c) for c in children),
        depths=tuple(depths),
        leaf_nodes=leaf_nodes,
        internal_nodes=internal_nodes,
        name_index=index,
    )
