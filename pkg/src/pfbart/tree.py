"""Immutable binary regression trees.

Nodes are addressed by their path from the root, a string of ``"L"`` and
``"R"`` steps (the root is ``""``).  A node's depth is the length of its
path.  Rows go left when ``x[variable] <= cutpoint``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np


class TreeError(ValueError):
    """Raised for structurally invalid tree operations."""


@dataclass(frozen=True)
class SplitRule:
    variable: int
    cutpoint: float


@dataclass(frozen=True)
class Leaf:
    mu: float | None = None  # None marks a freshly grown, not yet drawn leaf

    @property
    def is_leaf(self) -> bool:
        return True


@dataclass(frozen=True)
class Internal:
    rule: SplitRule
    left: Node
    right: Node

    @property
    def is_leaf(self) -> bool:
        return False


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class Tree:
    root: Node = Leaf(0.0)
    index: int = 0

    def nodes(self) -> Iterator[tuple[str, Node]]:
        """Yield ``(path, node)`` in pre-order."""
        stack = [("", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            if not node.is_leaf:
                stack.append((path + "R", node.right))
                stack.append((path + "L", node.left))

    def leaves(self) -> list[str]:
        return [p for p, n in self.nodes() if n.is_leaf]

    def internals(self) -> list[str]:
        return [p for p, n in self.nodes() if not n.is_leaf]

    def prunable(self) -> list[str]:
        """Internal nodes whose two children are both leaves."""
        return [
            p
            for p, n in self.nodes()
            if not n.is_leaf and n.left.is_leaf and n.right.is_leaf
        ]

    def swappable_pairs(self) -> list[tuple[str, str]]:
        """All (parent, child) pairs of internal nodes."""
        pairs = []
        for p, n in self.nodes():
            if n.is_leaf:
                continue
            if not n.left.is_leaf:
                pairs.append((p, p + "L"))
            if not n.right.is_leaf:
                pairs.append((p, p + "R"))
        return pairs

    def n_leaves(self) -> int:
        return len(self.leaves())

    def n_internal(self) -> int:
        return len(self.internals())

    def depth(self) -> int:
        return max(len(p) for p in self.leaves())

    def node(self, path: str) -> Node:
        return get_node(self.root, path)

    def with_root(self, root: Node) -> Tree:
        return Tree(root, self.index)


def get_node(root: Node, path: str) -> Node:
    node = root
    for step in path:
        if node.is_leaf:
            raise TreeError(f"path {path!r} runs past a leaf")
        node = node.left if step == "L" else node.right
    return node


def replace_node(root: Node, path: str, new: Node) -> Node:
    """Return a copy of ``root`` with the subtree at ``path`` replaced."""
    if not path:
        return new
    if root.is_leaf:
        raise TreeError(f"path {path!r} runs past a leaf")
    if path[0] == "L":
        return Internal(root.rule, replace_node(root.left, path[1:], new), root.right)
    if path[0] == "R":
        return Internal(root.rule, root.left, replace_node(root.right, path[1:], new))
    raise TreeError(f"bad path step {path[0]!r}")


def _check_dim(x: np.ndarray, p: int | None) -> None:
    if p is not None and x.shape[-1] != p:
        raise TreeError(f"expected {p} covariates, got {x.shape[-1]}")


def evaluate(tree: Tree, x, p: int | None = None) -> float:
    """Return the leaf value reached by a single covariate vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise TreeError("evaluate expects a single covariate vector")
    _check_dim(x, p)
    node = tree.root
    while not node.is_leaf:
        v = node.rule.variable
        if v >= x.shape[0]:
            raise TreeError(f"tree splits on covariate {v} but x has {x.shape[0]}")
        node = node.left if x[v] <= node.rule.cutpoint else node.right
    if node.mu is None:
        raise TreeError("cannot evaluate a tree with unset leaf values")
    return node.mu


def leaf_partition(tree: Tree, X, p: int | None = None) -> dict[str, np.ndarray]:
    """Map each leaf path to the (0-based) row indices routed there."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise TreeError("leaf_partition expects a 2-d matrix")
    _check_dim(X, p)
    out: dict[str, np.ndarray] = {}
    stack = [("", tree.root, np.arange(X.shape[0]))]
    while stack:
        path, node, rows = stack.pop()
        if node.is_leaf:
            out[path] = rows
            continue
        v = node.rule.variable
        if v >= X.shape[1]:
            raise TreeError(f"tree splits on covariate {v} but X has {X.shape[1]}")
        go_left = X[rows, v] <= node.rule.cutpoint
        stack.append((path + "L", node.left, rows[go_left]))
        stack.append((path + "R", node.right, rows[~go_left]))
    return out


def predict_tree(tree: Tree, X, p: int | None = None) -> np.ndarray:
    """Vectorised :func:`evaluate` over the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    for path, rows in leaf_partition(tree, X, p).items():
        mu = tree.node(path).mu
        if mu is None:
            raise TreeError("cannot evaluate a tree with unset leaf values")
        out[rows] = mu
    return out


# -- structural moves -------------------------------------------------------


@dataclass(frozen=True)
class Grow:
    path: str
    rule: SplitRule


@dataclass(frozen=True)
class Prune:
    path: str


@dataclass(frozen=True)
class Swap:
    parent: str
    child: str


@dataclass(frozen=True)
class Change:
    path: str
    rule: SplitRule


MoveKind = Union[Grow, Prune, Swap, Change]


def apply_move(tree: Tree, move: MoveKind) -> Tree:
    """Return the tree produced by ``move``; ``tree`` itself is untouched.

    Raises :class:`TreeError` when the move does not fit the tree, which
    always indicates a caller bug rather than a rejected proposal.
    """
    root = tree.root
    if isinstance(move, Grow):
        target = _node_or_error(root, move.path)
        if not target.is_leaf:
            raise TreeError(f"grow target {move.path!r} is not a leaf")
        new = Internal(move.rule, Leaf(), Leaf())
        return tree.with_root(replace_node(root, move.path, new))
    if isinstance(move, Prune):
        target = _node_or_error(root, move.path)
        if target.is_leaf or not (target.left.is_leaf and target.right.is_leaf):
            raise TreeError(f"prune target {move.path!r} must have two leaf children")
        return tree.with_root(replace_node(root, move.path, Leaf()))
    if isinstance(move, Change):
        target = _node_or_error(root, move.path)
        if target.is_leaf:
            raise TreeError(f"change target {move.path!r} is a leaf")
        new = Internal(move.rule, target.left, target.right)
        return tree.with_root(replace_node(root, move.path, new))
    if isinstance(move, Swap):
        if move.child[:-1] != move.parent or len(move.child) != len(move.parent) + 1:
            raise TreeError(f"{move.child!r} is not a child of {move.parent!r}")
        parent = _node_or_error(root, move.parent)
        child = _node_or_error(root, move.child)
        if parent.is_leaf or child.is_leaf:
            raise TreeError("swap needs two internal nodes")
        new_child = Internal(parent.rule, child.left, child.right)
        if move.child[-1] == "L":
            new_parent = Internal(child.rule, new_child, parent.right)
        else:
            new_parent = Internal(child.rule, parent.left, new_child)
        return tree.with_root(replace_node(root, move.parent, new_parent))
    raise TypeError(f"unknown move {move!r}")


def _node_or_error(root: Node, path: str) -> Node:
    try:
        return get_node(root, path)
    except TreeError:
        raise TreeError(f"no node at path {path!r}") from None


def topology(node: Node):
    """Nested tuple describing the split rules only (leaf values dropped)."""
    if node.is_leaf:
        return None
    return (node.rule, topology(node.left), topology(node.right))


def split_counts(tree: Tree, p: int) -> np.ndarray:
    counts = np.zeros(p, dtype=np.int64)
    for _, node in tree.nodes():
        if not node.is_leaf:
            counts[node.rule.variable] += 1
    return counts


# -- serialisation ----------------------------------------------------------


def to_nested(node: Node):
    """Leaves become floats, internals ``[variable, cutpoint, left, right]``."""
    if node.is_leaf:
        return node.mu
    return [node.rule.variable, node.rule.cutpoint, to_nested(node.left), to_nested(node.right)]


def from_nested(obj) -> Node:
    if isinstance(obj, list):
        v, c, left, right = obj
        return Internal(SplitRule(int(v), float(c)), from_nested(left), from_nested(right))
    return Leaf(None if obj is None else float(obj))
