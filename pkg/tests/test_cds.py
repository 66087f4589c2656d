import random

import pytest
from hypothesis import given, settings, strategies as st

from gapjoin.ctree import WILDCARD, Constraint, ConstraintTree
from gapjoin.intervals import NEG_INF, POS_INF

W = WILDCARD


def worked_step1_tree():
    t = ConstraintTree(3)
    t.ins_constraint(Constraint((), NEG_INF, 1))
    t.ins_constraint(Constraint((1,), NEG_INF, 1))
    t.ins_constraint(Constraint((W,), NEG_INF, 2))
    t.ins_constraint(Constraint((W, 2), NEG_INF, 2))
    t.ins_constraint(Constraint((W, W), NEG_INF, 1))
    return t


def test_worked_instance_dump_golden():
    t = worked_step1_tree()
    assert t.dump() == "\n".join([
        "<> | (-inf,1) | 1",
        "<1> | (-inf,1) | ",
        "<*> | (-inf,2) | 2",
        "<*,2> | (-inf,2) | ",
        "<*,*> | (-inf,1) | ",
    ])


def test_insert_idempotent():
    t = worked_step1_tree()
    before = t.dump()
    t.ins_constraint(Constraint((W, 2), NEG_INF, 2))
    t.ins_constraint(Constraint((), NEG_INF, 1))
    assert t.dump() == before


def test_interval_engulfs_equality_branch():
    t = ConstraintTree(3)
    t.ins_constraint(Constraint((1,), NEG_INF, 1))
    assert t.find_node((1,)) is not None
    t.ins_constraint(Constraint((), 0, 2))
    assert t.find_node((1,)) is None
    assert t.root.intervals.pieces() == [(0, 2)]


def test_subsumed_insert_is_dropped():
    t = ConstraintTree(3)
    t.ins_constraint(Constraint((), 0, 5))
    t.ins_constraint(Constraint((3,), 0, 9))  # 3 is covered at the root
    assert t.find_node((3,)) is None
    t.ins_constraint(Constraint((5,), 0, 9))  # 5 is not covered (open interval)
    assert t.find_node((5,)) is not None


def test_below_domain_normalization_and_empty_drop():
    t = ConstraintTree(2)
    t.ins_constraint(Constraint((), -2, 4))
    assert t.root.intervals.pieces() == [(NEG_INF, 4)]
    before = t.dump()
    t.ins_constraint(Constraint((), 7, 8))  # contains no integer
    assert t.dump() == before
    with pytest.raises(ValueError):
        t.ins_constraint(Constraint((), 5, 5))


def test_principal_filter_memoization_example():
    # two-attribute prefixes over three levels, equalities from the prefix (1, 1)
    n_vals = 2
    t = ConstraintTree(3)
    for a in range(1, n_vals + 1):
        for b in range(1, n_vals + 1):
            t.ins_constraint(Constraint((a, b), NEG_INF, 1))
    for b in range(1, n_vals + 1):
        for i in range(1, n_vals + 1):
            t.ins_constraint(Constraint((W, b), 2 * i - 2, 2 * i))
    for i in range(1, n_vals + 1):
        t.ins_constraint(Constraint((W, W), 2 * i - 1, 2 * i + 1))
    t.ins_constraint(Constraint((W, W), 2 * n_vals, POS_INF))
    patterns = [u.pattern for u in t.principal_filter((1, 1))]
    assert patterns == [(1, 1), (W, 1), (W, W)]


def test_principal_filter_empty_and_worked():
    assert ConstraintTree(3).principal_filter(()) == []
    t = worked_step1_tree()
    nodes = t.principal_filter((1,))
    assert [u.pattern for u in nodes] == [(1,), (W,)]
    assert nodes[0].intervals.pieces() == [(NEG_INF, 1)]
    assert nodes[1].intervals.pieces() == [(NEG_INF, 2)]


patterns_st = st.lists(
    st.tuples(
        st.lists(st.one_of(st.none(), st.integers(0, 3)), max_size=2),
        st.integers(-1, 7),
        st.integers(0, 8),
    ),
    max_size=25,
)


def _satisfies_flat(t, c):
    pattern, lo, hi = c
    for pos, comp in enumerate(pattern):
        if comp is not None and t[pos] != comp:
            return False
    return lo < t[len(pattern)] < hi


@settings(max_examples=120, deadline=None)
@given(patterns_st)
def test_tree_matches_flat_constraint_list(raw):
    tree = ConstraintTree(3)
    flat = []
    for pattern, lo, hi in raw:
        if not lo < hi:
            continue
        c = Constraint(tuple(pattern), lo, hi)
        tree.ins_constraint(c)
        lo_n = NEG_INF if lo < 0 else lo
        if lo_n == NEG_INF or hi - lo_n > 1:
            flat.append((tuple(pattern), lo_n, hi))

    def tree_satisfies(t):
        for depth in range(3):
            for node in tree.generalizing_nodes(tuple(t[:depth])):
                if node.intervals.covers(t[depth]):
                    return True
        return False

    for a in range(8):
        for b in range(8):
            for c in range(8):
                t = (a, b, c)
                assert tree_satisfies(t) == any(_satisfies_flat(t, f) for f in flat)


@settings(max_examples=120, deadline=None)
@given(patterns_st)
def test_node_invariant_no_covered_equality_labels(raw):
    tree = ConstraintTree(3)
    for pattern, lo, hi in raw:
        if not lo < hi:
            continue
        tree.ins_constraint(Constraint(tuple(pattern), lo, hi))

    def visit(node):
        for label in node.equalities:
            assert not node.intervals.covers(label)
            visit(node.children[label])
        if node.star is not None:
            visit(node.star)

    visit(tree.root)
