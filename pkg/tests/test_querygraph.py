import itertools
import random

import pytest

from gapjoin import querygraph as qg
from gapjoin.queries import parse_query

TRIANGLE = parse_query("Q(A,B,C) :- R(A,B), S(A,C), T(B,C).").hypergraph()
TRIANGLE_U = parse_query("Q(A,B,C) :- R(A,B), S(A,C), T(B,C), U(A,B,C).").hypergraph()
BOWTIE = parse_query("Q(X,Y) :- R(X), S(X,Y), T(Y).").hypergraph()
SINGLE = parse_query("Q(A) :- R(A).").hypergraph()
NEST_EXAMPLE = parse_query("Q(A,B,C) :- R(A,B,C), S(A,C), T(B,C).").hypergraph()


def random_hypergraph(rng, max_n=5, max_edges=5):
    n = rng.randint(1, max_n)
    edges = []
    for i in range(rng.randint(1, max_edges)):
        size = rng.randint(1, n)
        edges.append((f"R{i}", frozenset(rng.sample(range(n), size))))
    covered = set().union(*(e for _, e in edges))
    missing = set(range(n)) - covered
    if missing:
        name, e = edges[0]
        edges[0] = (name, e | missing)
    return qg.Hypergraph(n, tuple(edges))


def sub_hypergraphs(h):
    for k in range(1, len(h.edges) + 1):
        for combo in itertools.combinations(h.edges, k):
            covered = sorted(set().union(*(e for _, e in combo)))
            remap = {v: i for i, v in enumerate(covered)}
            edges = tuple((nm, frozenset(remap[v] for v in e)) for nm, e in combo)
            yield qg.Hypergraph(len(covered), edges)


def test_gyo_examples():
    assert qg.gyo_reduce(TRIANGLE) == (False, None)
    ok, tree = qg.gyo_reduce(TRIANGLE_U)
    assert ok and tree is not None
    ok, tree = qg.gyo_reduce(SINGLE)
    assert ok and tree == {"R": None}


def check_join_tree(h, parent):
    roots = [n for n, p in parent.items() if p is None]
    assert len(roots) == 1
    assert set(parent) == {name for name, _ in h.edges}
    # (a) is trivial here: each hyperedge is its own bag.
    # (b) the bags holding any vertex form a connected subtree: exactly one
    # of them may have its parent outside the set.
    for v in range(h.n_attrs):
        holders = {n for n, e in h.edges if v in e}
        exits = [n for n in holders if parent[n] not in holders]
        assert len(exits) == 1, f"vertex {v}: holders {holders} not connected"


def test_join_tree_is_tree_decomposition():
    rng = random.Random(7)
    checked = 0
    while checked < 60:
        h = random_hypergraph(rng)
        ok, parent = qg.gyo_reduce(h)
        if not ok:
            continue
        check_join_tree(h, parent)
        checked += 1


def test_beta_examples():
    assert qg.is_beta_acyclic(BOWTIE)
    assert not qg.is_beta_acyclic(TRIANGLE_U)
    assert not qg.is_beta_acyclic(TRIANGLE)


def _poset_chains(h, order):
    return all(qg._is_chain(p) for p in qg.prefix_posets(h, order))


def test_nested_elimination_order_examples():
    order = qg.find_nested_elimination_order(NEST_EXAMPLE)
    assert order is not None
    assert _poset_chains(NEST_EXAMPLE, order)
    # (C, A, B) is one valid nested order for this query
    assert (2, 0, 1) in qg.all_nested_elimination_orders(NEST_EXAMPLE)

    assert qg.find_nested_elimination_order(TRIANGLE) is None
    for perm in itertools.permutations(range(3)):
        assert not _poset_chains(TRIANGLE, perm)

    assert qg.find_nested_elimination_order(SINGLE) == (0,)


def test_neo_exists_iff_beta_acyclic_random():
    rng = random.Random(11)
    for _ in range(120):
        h = random_hypergraph(rng)
        has_neo = qg.find_nested_elimination_order(h) is not None
        assert has_neo == qg.is_beta_acyclic(h)
        if has_neo:
            assert _poset_chains(h, qg.find_nested_elimination_order(h))


def test_beta_matches_subhypergraph_oracle_random():
    rng = random.Random(3)
    for _ in range(60):
        h = random_hypergraph(rng, max_n=4, max_edges=4)
        oracle = all(qg.gyo_reduce(sub)[0] for sub in sub_hypergraphs(h))
        assert qg.is_beta_acyclic(h) == oracle


def test_elimination_width_examples():
    assert qg.elimination_width(TRIANGLE, (0, 1, 2)) == 2
    single_edge = parse_query("Q(A,B) :- R(A,B).").hypergraph()
    for perm in itertools.permutations(range(2)):
        assert qg.elimination_width(single_edge, perm) == 1
    path = parse_query(
        "Q(A1,A2,A3,A4,A5,A6) :- R1(A1,A2), R2(A2,A3), R3(A3,A4), R4(A4,A5), R5(A5,A6)."
    ).hypergraph()
    assert qg.elimination_width(path, tuple(range(6))) == 1


def test_width_dominates_treewidth_and_min_matches():
    rng = random.Random(5)
    for _ in range(40):
        h = random_hypergraph(rng, max_n=5, max_edges=4)
        tw = qg.treewidth_exact(h)
        widths = [qg.elimination_width(h, p) for p in itertools.permutations(range(h.n_attrs))]
        assert all(w >= tw for w in widths)
        assert min(widths) == tw


def test_choose_gao():
    assert qg.choose_gao(BOWTIE).mode == "betaChain"
    c = qg.choose_gao(TRIANGLE)
    assert (c.mode, c.width) == ("shadowGeneral", 2)
    c = qg.choose_gao(SINGLE)
    assert (c.mode, c.width) == ("betaChain", 0)


def test_invalid_hypergraphs_rejected():
    with pytest.raises(ValueError):
        qg.Hypergraph(2, (("R", frozenset({0})),))  # attribute 1 uncovered
    with pytest.raises(ValueError):
        qg.Hypergraph(1, (("R", frozenset()),))
    with pytest.raises(ValueError):
        qg.Hypergraph(1, (("R", frozenset({0})), ("R", frozenset({0}))))
