from hypothesis import given, settings, strategies as st

from gapjoin.intervals import NEG_INF, POS_INF, IntervalList, OpCounter, SortedList, next_union


def test_mixed_endpoint_pieces_stay_separate():
    lst = IntervalList()
    lst.insert(2, 5)
    lst.insert(5, 9)
    assert lst.pieces() == [(2, 5), (5, 9)]
    assert not lst.covers(5)
    assert lst.covers(4) and lst.covers(6)


def test_containment_merges_to_one_piece():
    lst = IntervalList()
    lst.insert(1, 10)
    lst.insert(3, 4)
    assert lst.pieces() == [(1, 10)]


def test_overlap_merges():
    lst = IntervalList()
    lst.insert(1, 4)
    lst.insert(3, 8)
    assert lst.covers(2) and lst.covers(5)
    assert not lst.covers(1) and not lst.covers(8)
    assert lst.pieces() == [(1, 8)]


def test_next_val_examples():
    lst = IntervalList()
    lst.insert(1, 10)
    assert lst.next_val(5) == 10

    empty = IntervalList()
    assert empty.next_val(-1) == -1

    lo = IntervalList()
    lo.insert(NEG_INF, 1)
    lo.insert(1, 3)
    assert lo.next_val(-1) == 1


def test_malformed_interval_rejected():
    lst = IntervalList()
    for bad in [(5, 5), (7, 3)]:
        try:
            lst.insert(*bad)
            assert False, "expected ValueError"
        except ValueError:
            pass


def test_insert_idempotent():
    lst = IntervalList()
    lst.insert(2, 5)
    lst.insert(NEG_INF, 0)
    snapshot = lst.pieces()
    lst.insert(2, 5)
    lst.insert(NEG_INF, 0)
    assert lst.pieces() == snapshot


def test_infinite_interval():
    lst = IntervalList()
    lst.insert(NEG_INF, POS_INF)
    assert lst.covers(0) and lst.covers(10**9) and lst.covers(-5)
    assert lst.next_val(-3) == POS_INF


interval_st = st.tuples(st.integers(-2, 256), st.integers(-2, 258)).filter(lambda p: p[0] < p[1])


@settings(max_examples=200, deadline=None)
@given(st.lists(interval_st, max_size=40), st.lists(st.integers(-2, 258), max_size=30))
def test_bitmap_oracle_equivalence(intervals, queries):
    lst = IntervalList()
    covered = set()
    for lo, hi in intervals:
        lst.insert(lo, hi)
        covered |= set(range(lo + 1, hi))
        for v in queries:
            assert lst.covers(v) == (v in covered)
            want = v
            while want in covered:
                want += 1
            assert lst.next_val(v) == want


def test_sorted_list_ops():
    s = SortedList()
    assert s.find_lub(0) is None
    assert not s.find(3)
    for v in (7, 3):
        s.insert(v)
    assert s.find(3) and s.find(7) and not s.find(5)
    assert s.find_lub(4) == 7
    assert s.find_lub(3) == 3
    assert s.find_lub(8) is None
    s2 = SortedList()
    for v in (3, 7):
        s2.insert(v)
    assert s2.delete_interval(3, 7) == []
    assert list(s2) == [3, 7]
    assert s2.delete_interval(2, 8) == [3, 7]
    assert list(s2) == []
    s.delete(3)
    assert list(s) == [7]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["ins", "del", "delint"]),
                          st.integers(0, 40), st.integers(0, 42)), max_size=60))
def test_sorted_list_vs_set_oracle(ops):
    s = SortedList()
    model = set()
    for kind, a, b in ops:
        if kind == "ins":
            s.insert(a)
            model.add(a)
        elif kind == "del":
            s.delete(a)
            model.discard(a)
        else:
            lo, hi = min(a, b), max(a, b)
            s.delete_interval(lo, hi)
            model -= {v for v in model if lo < v < hi}
        assert list(s) == sorted(model)


def test_next_union_examples():
    a, b = IntervalList(), IntervalList()
    a.insert(0, 4)
    b.insert(3, 8)
    assert next_union(a, b, 1) == 8
    assert next_union(a, IntervalList(), 1) == a.next_val(1)
    assert next_union(a, a, 1) == a.next_val(1)


def test_op_counter_ticks():
    ops = OpCounter()
    lst = IntervalList(ops)
    lst.insert(1, 5)
    lst.covers(3)
    lst.next_val(0)
    assert ops.n >= 3
