"""Triangle-query constraint store: dyadic summaries over the middle attribute.

For R(A,B) |x| S(B,C) |x| T(A,C) the generic store can spend time linear in
the number of (a, b) pairs. Here the wildcard branch under B is replaced by a
dyadic tree: node x summarizes the C-gaps shared by every column b in x's
range, maintained as covered(I(x)) = covered(I(x0)) & covered(I(x1)). One
lookup at a high node can then dismiss a whole range of b values for the
current a, and a per-(a, node) cache makes revisits cheap.

The B domain is padded to N = 2^d; padding columns carry no tuples so they
cannot join.
"""

from __future__ import annotations

from .ctree import WILDCARD, Constraint
from .intervals import NEG_INF, POS_INF, IntervalList, OpCounter, next_union

Range = tuple  # inclusive integer range (lo, hi), ends may be +-inf


def dyadic_decompose(a1: int, a2: int, d: int) -> list[tuple[int, ...]]:
    """Minimal dyadic cover of the closed integer range [a1, a2] in [0, 2^d).

    Returns node bit strings, each standing for [b(x)*2^(d-j), (b(x)+1)*2^(d-j)).
    At most 2d pieces.
    """
    n = 1 << d
    if not (0 <= a1 <= a2 < n):
        raise ValueError(f"[{a1}, {a2}] out of domain [0, {n})")
    out = []
    lo, hi = a1, a2 + 1  # half-open [lo, hi)
    while lo < hi:
        size = lo & -lo or n
        while size > hi - lo:
            size //= 2
        j = d - size.bit_length() + 1
        out.append(_bits_of(lo // size, j))
        lo += size
    return out


def _bits_of(value: int, length: int) -> tuple[int, ...]:
    return tuple((value >> (length - 1 - i)) & 1 for i in range(length))


def node_range(bits: tuple[int, ...], d: int) -> tuple[int, int]:
    """Half-open [lo, hi) slice of [0, 2^d) covered by a dyadic node."""
    size = 1 << (d - len(bits))
    lo = 0
    for b in bits:
        lo = (lo << 1) | b
    lo *= size
    return lo, lo + size


def next_sibling(bits: tuple[int, ...]):
    """Pre-order successor skipping the subtree: flip the last 0 bit to 1.

    None when the traversal is exhausted (all bits are 1).
    """
    for i in range(len(bits) - 1, -1, -1):
        if bits[i] == 0:
            return bits[:i] + (1,)
    return None


# -- integer-range algebra for float-up computations -------------------------


def _pieces_to_ranges(lst: IntervalList) -> list[Range]:
    """Covered integers of an interval list as inclusive ranges."""
    out = []
    for lo, hi in lst.pieces():
        a = NEG_INF if lo == NEG_INF else int(lo) + 1
        b = POS_INF if hi == POS_INF else int(hi) - 1
        if a == NEG_INF or b == POS_INF or a <= b:
            out.append((a, b))
    return out


def _intersect_ranges(xs: list[Range], ys: list[Range]) -> list[Range]:
    out = []
    for a1, b1 in xs:
        for a2, b2 in ys:
            a, b = max(a1, a2), min(b1, b2)
            if a <= b:
                out.append((a, b))
    out.sort(key=lambda r: r[0])
    return out


def _subtract_ranges(xs: list[Range], ys: list[Range]) -> list[Range]:
    out = list(xs)
    for a2, b2 in ys:
        nxt = []
        for a1, b1 in out:
            if b2 < a1 or a2 > b1:
                nxt.append((a1, b1))
                continue
            if a1 < a2:
                nxt.append((a1, a2 - 1))
            if b2 < b1:
                nxt.append((b2 + 1, b1))
        out = nxt
    return out


def _insert_range(lst: IntervalList, r: Range) -> None:
    a, b = r
    lo = NEG_INF if a == NEG_INF else a - 1
    hi = POS_INF if b == POS_INF else b + 1
    lst.insert(lo, hi)


class DyadicTree:
    """Per-dyadic-node interval lists with the upward intersection invariant."""

    def __init__(self, d: int, ops: OpCounter | None = None):
        self.d = d
        self.n = 1 << d
        self.ops = ops
        self.lists: dict[tuple[int, ...], IntervalList] = {}

    def node(self, bits: tuple[int, ...]) -> IntervalList:
        lst = self.lists.get(bits)
        if lst is None:
            lst = IntervalList(self.ops)
            self.lists[bits] = lst
        return lst

    def leaf_bits(self, b: int) -> tuple[int, ...]:
        return _bits_of(b, self.d)

    def insert_at_leaf(self, b: int, lo, hi) -> None:
        """Insert a C-interval at column b and float newly covered ranges up."""
        bits = self.leaf_bits(b)
        lst = self.node(bits)
        before = _pieces_to_ranges(lst)
        lst.insert(lo, hi)
        newly = _subtract_ranges(_pieces_to_ranges(lst), before)
        self._float_up(bits, newly)

    def insert_full_at(self, bits: tuple[int, ...]) -> None:
        """Mark a whole dyadic range dead for every C value."""
        lst = self.node(bits)
        before = _pieces_to_ranges(lst)
        lst.insert(NEG_INF, POS_INF)
        newly = _subtract_ranges([(NEG_INF, POS_INF)], before)
        self._float_up(bits, newly)

    def _float_up(self, bits: tuple[int, ...], newly: list[Range]) -> None:
        while bits and newly:
            sibling = bits[:-1] + (1 - bits[-1],)
            sib_ranges = _pieces_to_ranges(self.node(sibling))
            rising = _intersect_ranges(newly, sib_ranges)
            if not rising:
                return
            bits = bits[:-1]
            parent = self.node(bits)
            before = _pieces_to_ranges(parent)
            for r in rising:
                _insert_range(parent, r)
            newly = _subtract_ranges(rising, before)

    def covered_ints(self, bits: tuple[int, ...], lo: int, hi: int) -> set[int]:
        return self.node(bits).covered_ints(lo, hi)


class TriangleCds:
    """Drop-in constraint store for the triangle query (GAO-relabeled A, B, C)."""

    def __init__(self, b_domain: int, ops: OpCounter | None = None, trace=None):
        self.d = max(1, (max(b_domain, 2) - 1).bit_length())
        self.n_pad = 1 << self.d
        self.ops = ops
        self.trace = trace
        self.i_root = IntervalList(ops)  # A intervals
        self.i_star_b = IntervalList(ops)  # B intervals under the wildcard
        self._eq_a: dict[int, IntervalList] = {}  # B intervals under =a
        self._eq_a_star: dict[int, IntervalList] = {}  # C intervals under (=a, *)
        self._eq_ab: dict[tuple, IntervalList] = {}  # C intervals under (=a, =b)
        self.dyadic = DyadicTree(self.d, ops)  # C intervals under (*, =b) and ranges
        self.cache: dict[tuple, object] = {}  # (a, bits or None) -> last free value
        self.inserts = 0

    def eq_a(self, a) -> IntervalList:
        lst = self._eq_a.get(a)
        if lst is None:
            lst = IntervalList(self.ops)
            self._eq_a[a] = lst
        return lst

    def eq_a_star(self, a) -> IntervalList:
        lst = self._eq_a_star.get(a)
        if lst is None:
            lst = IntervalList(self.ops)
            self._eq_a_star[a] = lst
        return lst

    # -- constraint insertion ------------------------------------------------

    def ins_constraint(self, c: Constraint) -> None:
        lo, hi = c.lo, c.hi
        if not lo < hi:
            raise ValueError(f"malformed interval ({lo}, {hi})")
        if lo < 0 and lo != NEG_INF:
            lo = NEG_INF
        if lo != NEG_INF and hi != POS_INF and hi - lo <= 1:
            return
        self.inserts += 1
        p = c.pattern
        if p == ():
            self.i_root.insert(lo, hi)
        elif len(p) == 1 and p[0] is WILDCARD:
            self.i_star_b.insert(lo, hi)
            self._mark_dead_columns(lo, hi)
        elif len(p) == 1:
            self.eq_a(p[0]).insert(lo, hi)
        elif len(p) == 2 and p[0] is WILDCARD and p[1] is not WILDCARD:
            self.dyadic.insert_at_leaf(p[1], lo, hi)
        elif len(p) == 2 and p[1] is WILDCARD and p[0] is not WILDCARD:
            self.eq_a_star(p[0]).insert(lo, hi)
        elif len(p) == 2 and p[0] is not WILDCARD and p[1] is not WILDCARD:
            key = (p[0], p[1])
            lst = self._eq_ab.get(key)
            if lst is None:
                lst = IntervalList(self.ops)
                self._eq_ab[key] = lst
            lst.insert(lo, hi)
            # output bookkeeping: skip past the ruled-out value at this column
            bits = self.dyadic.leaf_bits(p[1]) if 0 <= p[1] < self.n_pad else None
            cur = self.cache.get((p[0], bits), -1)
            if lo <= cur:
                self.cache[(p[0], bits)] = max(cur, hi)
        else:
            raise ValueError(f"constraint {c} does not fit the triangle store")

    def _mark_dead_columns(self, lo, hi) -> None:
        """A B-gap under the wildcard kills those columns for every C value."""
        r_lo = 0 if lo == NEG_INF else max(0, int(lo) + 1)
        r_hi = self.n_pad - 1 if hi == POS_INF else min(self.n_pad - 1, int(hi) - 1)
        if r_lo > r_hi:
            return
        for bits in dyadic_decompose(r_lo, r_hi, self.d):
            self.dyadic.insert_full_at(bits)

    # -- probe search ---------------------------------------------------------

    def _rule_out_a(self, a) -> None:
        if self.trace is not None:
            self.trace.append(("rule_out_a", a))
        self.inserts += 1
        self.i_root.insert(a - 1, a + 1)

    def _rule_out_range(self, a, bits) -> None:
        lo, hi = node_range(bits, self.d)
        if self.trace is not None:
            self.trace.append(("rule_out_range", a, (lo, hi)))
        self.inserts += 1
        self.eq_a(a).insert(lo - 1 if lo > 0 else NEG_INF, hi)

    def _probe_c(self, a, b):
        """First free C value for the fixed prefix (a, b), walking b's dyadic
        path root to leaf; None when some ancestor range is dead for this a."""
        ia = self.eq_a_star(a)
        if b < 0 or b >= self.n_pad:
            # no column constraints exist outside the padded domain
            key = (a, None) if b < 0 else (a, "high")
            z = self.cache.get(key, -1)
            c = ia.next_val(z)
            self.cache[key] = c
            if c == POS_INF:
                self.inserts += 1
                if b < 0:
                    self.eq_a(a).insert(NEG_INF, 0)
                else:
                    self.eq_a(a).insert(self.n_pad - 1, POS_INF)
                return None
            return c
        bits_full = self.dyadic.leaf_bits(b)
        for j in range(self.d + 1):
            bits = bits_full[:j]
            z = self.cache.get((a, bits), -1)
            c = next_union(ia, self.dyadic.node(bits), z)
            self.cache[(a, bits)] = c
            if c == POS_INF:
                self._rule_out_range(a, bits)
                return None
        return c

    def get_probe_point(self):
        while True:
            a = self.i_root.next_val(-1)
            if a == POS_INF:
                return None
            b = next_union(self.eq_a(a), self.i_star_b, -1)
            if b == POS_INF or self.eq_a_star(a).next_val(-1) == POS_INF:
                self._rule_out_a(a)
                continue
            while True:
                c = self._probe_c(a, b)
                if c is not None:
                    return (a, b, c)
                b = next_union(self.eq_a(a), self.i_star_b, b)
                if b == POS_INF:
                    self._rule_out_a(a)
                    break
