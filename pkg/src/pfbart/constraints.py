"""Fixed-layer policy: which covariates may split at the top levels of a tree."""

from __future__ import annotations

from dataclasses import dataclass

from pfbart.tree import Change, Grow, MoveKind, Prune, Swap, Tree


@dataclass(frozen=True)
class FixedLayerPolicy:
    """Pins ``fixed_vars`` to depths ``0 .. h-1`` of every tree.

    Parameters
    ----------
    fixed_vars : tuple of int
        Covariate indices, in layer order.  ``h = len(fixed_vars)``; an empty
        tuple is plain BART.
    swap_flag : bool
        If True any fixed variable may appear at any fixed layer, otherwise
        layer ``d`` only admits ``fixed_vars[d]``.
    allow_prune : bool
        If False, internal nodes inside the fixed layers can never be pruned.
    change_prior : bool
        If True, fixed layers split with probability ``alpha`` and deeper
        nodes use ``alpha * (1 + d - h) ** -beta``.
    """

    fixed_vars: tuple[int, ...] = ()
    swap_flag: bool = False
    allow_prune: bool = True
    change_prior: bool = False

    def __post_init__(self):
        object.__setattr__(self, "fixed_vars", tuple(int(v) for v in self.fixed_vars))
        if len(set(self.fixed_vars)) != len(self.fixed_vars):
            raise ValueError(f"fixed variables must be distinct: {self.fixed_vars}")
        if any(v < 0 for v in self.fixed_vars):
            raise ValueError("fixed variable indices must be non-negative")

    @property
    def h(self) -> int:
        return len(self.fixed_vars)

    def validate(self, p: int) -> None:
        bad = [v for v in self.fixed_vars if v >= p]
        if bad:
            raise ValueError(f"fixed variables {bad} out of range for {p} covariates")


def allowed_variables(policy: FixedLayerPolicy, depth: int, p: int) -> frozenset[int]:
    if depth >= policy.h:
        return frozenset(range(p))
    if policy.swap_flag:
        return frozenset(policy.fixed_vars)
    return frozenset((policy.fixed_vars[depth],))


def split_probability(policy: FixedLayerPolicy, depth: int, alpha: float, beta: float) -> float:
    if not policy.change_prior:
        return alpha * (1.0 + depth) ** -beta
    if depth < policy.h:
        return alpha
    return alpha * (1.0 + depth - policy.h) ** -beta


def variable_allowed(policy: FixedLayerPolicy, depth: int, variable: int) -> bool:
    if depth >= policy.h:
        return True
    if policy.swap_flag:
        return variable in policy.fixed_vars
    return variable == policy.fixed_vars[depth]


def move_legal(policy: FixedLayerPolicy, tree: Tree, move: MoveKind) -> bool:
    """Whether a structurally valid ``move`` respects the fixed layers."""
    if isinstance(move, (Grow, Change)):
        return variable_allowed(policy, len(move.path), move.rule.variable)
    if isinstance(move, Prune):
        return policy.allow_prune or len(move.path) >= policy.h
    if isinstance(move, Swap):
        # after the exchange the child's rule sits at the parent's depth
        v_parent = tree.node(move.parent).rule.variable
        v_child = tree.node(move.child).rule.variable
        return variable_allowed(policy, len(move.parent), v_child) and variable_allowed(
            policy, len(move.child), v_parent
        )
    raise TypeError(f"unknown move {move!r}")


def tree_respects(policy: FixedLayerPolicy, tree: Tree) -> bool:
    """Full traversal: no node above depth ``h`` uses a disallowed variable."""
    for path, node in tree.nodes():
        if len(path) >= policy.h:
            continue
        if not node.is_leaf and not variable_allowed(policy, len(path), node.rule.variable):
            return False
    return True
