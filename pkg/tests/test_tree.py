import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfbart.tree import (
    Change,
    Grow,
    Internal,
    Leaf,
    Prune,
    SplitRule,
    Swap,
    Tree,
    TreeError,
    apply_move,
    evaluate,
    from_nested,
    leaf_partition,
    predict_tree,
    to_nested,
    topology,
)


def stump(v=0, c=0.5, left=1.0, right=2.0):
    return Tree(Internal(SplitRule(v, c), Leaf(left), Leaf(right)))


def quadrant_tree():
    # var 0 at the root, var 1 below on both sides
    return Tree(
        Internal(
            SplitRule(0, 0.5),
            Internal(SplitRule(1, 0.5), Leaf(1.0), Leaf(2.0)),
            Internal(SplitRule(1, 0.5), Leaf(3.0), Leaf(4.0)),
        )
    )


def random_tree(rng, p, depth, prob=0.8):
    def grow(d):
        if d >= depth or rng.random() > prob:
            return Leaf(float(rng.normal()))
        return Internal(SplitRule(int(rng.integers(p)), float(rng.random())), grow(d + 1), grow(d + 1))

    return Tree(grow(0))


class TestEvaluate:
    def test_single_leaf(self):
        assert evaluate(Tree(Leaf(3.5)), [0.1, 0.9]) == 3.5

    def test_boundary_goes_left(self):
        assert evaluate(stump(), [0.5, 0.0]) == 1.0
        assert evaluate(stump(), [0.5000001, 0.0]) == 2.0

    def test_quadrants(self):
        # routes worked out by hand: (x0 <= .5, x1 <= .5) -> 1, (<=, >) -> 2, (>, <=) -> 3, (>, >) -> 4
        t = quadrant_tree()
        got = [evaluate(t, x) for x in ([0.2, 0.2], [0.2, 0.8], [0.8, 0.2], [0.8, 0.8])]
        assert got == [1.0, 2.0, 3.0, 4.0]

    def test_dimension_mismatch(self):
        with pytest.raises(TreeError):
            evaluate(stump(), [0.1, 0.2, 0.3], p=2)
        with pytest.raises(TreeError):
            evaluate(stump(v=3), [0.1, 0.2])

    def test_unset_leaf_is_an_error(self):
        t = apply_move(Tree(Leaf(0.0)), Grow("", SplitRule(0, 0.5)))
        with pytest.raises(TreeError):
            evaluate(t, [0.1])


class TestLeafPartition:
    def test_single_leaf(self):
        part = leaf_partition(Tree(Leaf(0.0)), np.zeros((5, 2)))
        assert list(part) == [""]
        np.testing.assert_array_equal(part[""], np.arange(5))

    def test_stump(self):
        part = leaf_partition(stump(), np.array([[0.2, 0.0], [0.8, 0.0]]))
        np.testing.assert_array_equal(part["L"], [0])
        np.testing.assert_array_equal(part["R"], [1])

    def test_absent_leaf_is_empty(self):
        part = leaf_partition(stump(), np.array([[0.1, 0.0], [0.2, 0.0]]))
        assert part["R"].size == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_rowwise_evaluate(self, seed):
        rng = np.random.default_rng(seed)
        t = random_tree(rng, 3, 3, prob=1.0)
        X = rng.random((100, 3))
        part = leaf_partition(t, X)
        allrows = np.sort(np.concatenate(list(part.values())))
        np.testing.assert_array_equal(allrows, np.arange(100))
        for path, rows in part.items():
            for i in rows:
                assert evaluate(t, X[i]) == t.node(path).mu
        np.testing.assert_array_equal(predict_tree(t, X), [evaluate(t, x) for x in X])


class TestMoves:
    def test_grow_root(self):
        t = apply_move(Tree(Leaf(0.0)), Grow("", SplitRule(0, 0.5)))
        assert t.n_internal() == 1 and t.n_leaves() == 2

    def test_grow_then_prune_is_identity_on_topology(self):
        base = Tree(Leaf(0.0))
        grown = apply_move(base, Grow("", SplitRule(0, 0.5)))
        pruned = apply_move(grown, Prune(""))
        assert topology(pruned.root) == topology(base.root)

    def test_swap_chain_and_involution(self):
        t = Tree(Internal(SplitRule(0, 0.3), Internal(SplitRule(1, 0.7), Leaf(1.0), Leaf(2.0)), Leaf(3.0)))
        once = apply_move(t, Swap("", "L"))
        assert once.root.rule == SplitRule(1, 0.7)
        assert once.root.left.rule == SplitRule(0, 0.3)
        assert apply_move(once, Swap("", "L")) == t

    def test_change_with_original_rule_is_identity(self):
        t = quadrant_tree()
        assert apply_move(t, Change("L", SplitRule(1, 0.5))) == t

    def test_original_not_mutated(self):
        t = quadrant_tree()
        snapshot = to_nested(t.root)
        apply_move(t, Prune("L"))
        apply_move(t, Change("", SplitRule(1, 0.1)))
        assert to_nested(t.root) == snapshot

    @pytest.mark.parametrize(
        "move",
        [Grow("L", SplitRule(0, 0.1)), Prune(""), Swap("L", "LL"), Change("LL", SplitRule(0, 0.1)), Prune("RRR")],
    )
    def test_wrong_targets_raise(self, move):
        with pytest.raises(TreeError):
            apply_move(quadrant_tree(), move)

    def test_swap_needs_parent_child(self):
        with pytest.raises(TreeError):
            apply_move(quadrant_tree(), Swap("L", "R"))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n_moves=st.integers(1, 25))
def test_leaf_count_relation_after_random_moves(seed, n_moves):
    rng = np.random.default_rng(seed)
    t = Tree(Leaf(0.0))
    for _ in range(n_moves):
        kind = rng.integers(4)
        if kind == 0:
            leaves = t.leaves()
            t = apply_move(t, Grow(leaves[rng.integers(len(leaves))], SplitRule(int(rng.integers(3)), float(rng.random()))))
        elif kind == 1 and t.prunable():
            pr = t.prunable()
            t = apply_move(t, Prune(pr[rng.integers(len(pr))]))
        elif kind == 2 and t.swappable_pairs():
            pairs = t.swappable_pairs()
            t = apply_move(t, Swap(*pairs[rng.integers(len(pairs))]))
        elif kind == 3 and t.internals():
            ints = t.internals()
            t = apply_move(t, Change(ints[rng.integers(len(ints))], SplitRule(0, 0.5)))
        assert t.n_leaves() == t.n_internal() + 1
    X = rng.random((30, 3))
    part = leaf_partition(t, X)
    assert sum(len(r) for r in part.values()) == 30
    assert set(part) == set(t.leaves())


def test_nested_round_trip():
    t = quadrant_tree()
    assert Tree(from_nested(to_nested(t.root))) == t
