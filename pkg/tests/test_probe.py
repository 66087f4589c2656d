import random

import pytest

from gapjoin import bench, engine
from gapjoin.ctree import WILDCARD, Constraint, ConstraintTree
from gapjoin.intervals import NEG_INF, POS_INF
from gapjoin.probe import (
    ChainViolation,
    chain_of,
    get_probe_point_beta,
    get_probe_point_general,
    next_chain_val,
    shadow_patterns,
)

W = WILDCARD


def test_empty_cds_probe():
    assert get_probe_point_beta(ConstraintTree(3)) == (-1, -1, -1)
    assert get_probe_point_general(ConstraintTree(3)) == (-1, -1, -1)


def worked_step1_tree():
    t = ConstraintTree(3)
    for c in [
        Constraint((), NEG_INF, 1),
        Constraint((1,), NEG_INF, 1),
        Constraint((W,), NEG_INF, 2),
        Constraint((W, 2), NEG_INF, 2),
        Constraint((W, W), NEG_INF, 1),
    ]:
        t.ins_constraint(c)
    return t


def test_probe_after_worked_step1():
    assert get_probe_point_beta(worked_step1_tree()) == (1, 2, 2)
    assert get_probe_point_general(worked_step1_tree()) == (1, 2, 2)


def test_probe_none_when_space_covered():
    t = ConstraintTree(3)
    t.ins_constraint(Constraint((W,), NEG_INF, POS_INF))
    assert get_probe_point_beta(t) is None
    t2 = ConstraintTree(2)
    t2.ins_constraint(Constraint((), NEG_INF, POS_INF))
    assert get_probe_point_general(t2) is None


def test_backtrack_constraint_rules_out_dead_prefix():
    t = ConstraintTree(2)
    t.ins_constraint(Constraint((), NEG_INF, 5))  # first free first coordinate is 5
    t.ins_constraint(Constraint((5,), NEG_INF, POS_INF))  # but 5 is dead below
    probe = get_probe_point_beta(t)
    assert probe == (6, -1)
    # the dead prefix is now covered at the root and never proposed again
    assert t.root.intervals.covers(5)


def test_next_chain_val_trivial():
    from gapjoin.ctree import Node

    t = ConstraintTree(2)
    node = Node((7,), None)  # empty interval list
    assert next_chain_val(t, 5, [node]) == 5


def test_next_chain_val_two_nodes():
    t = ConstraintTree(3)
    t.ins_constraint(Constraint((1, 2), 0, 4))
    t.ins_constraint(Constraint((W, 2), 3, 8))
    chain = t.principal_filter((1, 2))
    assert [u.pattern for u in chain] == [(1, 2), (W, 2)]
    assert next_chain_val(t, 1, chain) == 8
    assert t.find_node((1, 2)).intervals.pieces() == [(0, 8)]


def test_next_chain_val_memoization_cascade():
    # prefix (1, 1): per-column evens dead, global odds dead; everything dies
    n_vals = 3
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
    chain = t.principal_filter((1, 1))
    assert next_chain_val(t, -1, chain) == POS_INF
    inferred = t.find_node((W, 1))
    assert inferred.intervals.pieces() == [(0, POS_INF)]


def test_chain_violation_detected():
    def tree():
        t = ConstraintTree(3)
        t.ins_constraint(Constraint((1, W), 0, 5))
        t.ins_constraint(Constraint((W, 2), 0, 5))
        # steer the probe to the prefix (1, 2) where the filter is not a chain
        t.ins_constraint(Constraint((), NEG_INF, 1))
        t.ins_constraint(Constraint((1,), NEG_INF, 2))
        return t

    with pytest.raises(ChainViolation):
        chain_of(tree().principal_filter((1, 2)))
    with pytest.raises(ChainViolation):
        get_probe_point_beta(tree())
    assert get_probe_point_general(tree()) is not None


def test_shadow_patterns_example():
    a, b, c = 4, 5, 6
    linearization = [
        (a, W, c),
        (W, b, c),
        (a, b, W),
        (W, b, W),
        (W, W, W),
    ]
    assert shadow_patterns(linearization) == [
        (a, b, c),
        (a, b, c),
        (a, b, W),
        (W, b, W),
        (W, W, W),
    ]


def _flat_active(t, constraints):
    for pattern, lo, hi in constraints:
        if all(p is None or t[i] == p for i, p in enumerate(pattern)) and lo < t[len(pattern)] < hi:
            return False
    return True


def _random_constraints(rng, n, count, vmax):
    out = []
    for _ in range(count):
        depth = rng.randint(0, n - 1)
        pattern = tuple(
            rng.choice([None, rng.randint(0, vmax)]) for _ in range(depth)
        )
        lo = rng.choice([NEG_INF, rng.randint(-1, vmax)])
        hi = rng.choice([POS_INF, rng.randint(0, vmax + 2)])
        if not lo < hi:
            continue
        out.append((pattern, lo, hi))
    return out


def test_general_probe_sound_and_complete_vs_flat_oracle():
    rng = random.Random(0)
    n, vmax = 3, 6
    for trial in range(150):
        raw = _random_constraints(rng, n, rng.randint(0, 14), vmax)
        tree = ConstraintTree(n)
        flat = []
        for pattern, lo, hi in raw:
            tree.ins_constraint(Constraint(pattern, lo, hi))
            lo_n = NEG_INF if lo < 0 else lo
            flat.append((pattern, lo_n, hi))
        probe = get_probe_point_general(tree)
        domain = range(0, vmax + 3)
        if probe is None:
            for a in domain:
                for b in domain:
                    for c in domain:
                        assert not _flat_active((a, b, c), flat), (raw, (a, b, c))
        else:
            assert _flat_active(probe, flat), (raw, probe)


def test_beta_probe_sound_on_chain_safe_states():
    # constraint patterns drawn from one prefix family keep filters chains
    rng = random.Random(1)
    n, vmax = 3, 5
    for trial in range(150):
        flat = []
        tree = ConstraintTree(n)
        base = tuple(rng.randint(0, vmax) for _ in range(n))
        for _ in range(rng.randint(0, 12)):
            depth = rng.randint(0, n - 1)
            keep = rng.randint(0, depth)  # equalities form a prefix of base
            pattern = base[:keep] + (None,) * (depth - keep)
            lo = rng.choice([NEG_INF, rng.randint(-1, vmax)])
            hi = rng.choice([POS_INF, rng.randint(0, vmax + 2)])
            if not lo < hi:
                continue
            tree.ins_constraint(Constraint(pattern, lo, hi))
            flat.append((pattern, NEG_INF if lo < 0 else lo, hi))
        probe = get_probe_point_beta(tree)
        if probe is not None:
            assert _flat_active(probe, flat)


def test_general_equals_beta_traces_on_nested_order_runs():
    # on beta-acyclic inputs under a nested order the two strategies coincide
    for seed in range(25):
        inst = bench.bowtie_random(6, seed)
        tb, tg = [], []
        rb = engine.evaluate(engine.prepare(inst, mode="beta"), trace=tb)
        gao = engine.prepare(inst, mode="beta").plan.gao
        rg = engine.evaluate(engine.prepare(inst, mode="general", gao=gao), trace=tg)
        assert rb.tuples == rg.tuples
        assert [e for e in tb if e[0] == "probe"] == [e for e in tg if e[0] == "probe"]

    inst = bench.worked_q2(4)
    tb, tg = [], []
    engine.evaluate(engine.prepare(inst, mode="beta", gao=(0, 1, 2)), trace=tb)
    engine.evaluate(engine.prepare(inst, mode="general", gao=(0, 1, 2)), trace=tg)
    assert tb == tg


def test_probes_strictly_lexicographic_across_run():
    # constraints only accumulate, so the least active tuple rises strictly
    for seed in range(30):
        inst = bench.random_instance(seed)
        trace = []
        engine.evaluate(engine.prepare(inst, mode="general"), trace=trace)
        probes = [e[2] for e in trace if e[0] == "probe"]
        assert all(a < b for a, b in zip(probes, probes[1:]))
