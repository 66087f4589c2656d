"""Ordered building blocks: sorted key lists and merging open-interval lists.

Endpoints live in Z extended with -inf/+inf (Python floats). An IntervalList
stores the union of all inserted open intervals as disjoint pieces; adjacent
pieces that merely share an endpoint are kept separate, so the shared point
stays uncovered.
"""

from __future__ import annotations

import bisect

NEG_INF = float("-inf")
POS_INF = float("inf")

# endpoint tags
LEFT = 0
RIGHT = 1
MIXED = 2


class OpCounter:
    """Counts elementary ordered-structure operations for work accounting."""

    __slots__ = ("n",)

    def __init__(self) -> None:
        self.n = 0

    def tick(self, k: int = 1) -> None:
        self.n += k


class SortedList:
    """Sorted distinct keys over a bisect-backed array.

    Searches are O(log n); inserts and deletes pay an O(n) array shift, which
    is fine at the in-memory scales this engine targets.
    """

    __slots__ = ("keys", "ops")

    def __init__(self, ops: OpCounter | None = None):
        self.keys: list = []
        self.ops = ops

    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self):
        return iter(self.keys)

    def __contains__(self, v) -> bool:
        return self.find(v)

    def _tick(self) -> None:
        if self.ops is not None:
            self.ops.n += 1

    def find(self, v) -> bool:
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        return i < len(self.keys) and self.keys[i] == v

    def find_lub(self, v):
        """Least key >= v, or None."""
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        return self.keys[i] if i < len(self.keys) else None

    def insert(self, v) -> None:
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        if i == len(self.keys) or self.keys[i] != v:
            self.keys.insert(i, v)

    def delete(self, v) -> None:
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        if i < len(self.keys) and self.keys[i] == v:
            del self.keys[i]

    def delete_interval(self, lo, hi) -> list:
        """Remove and return all keys strictly inside the open interval (lo, hi)."""
        self._tick()
        i = bisect.bisect_right(self.keys, lo)
        j = bisect.bisect_left(self.keys, hi)
        if i >= j:
            return []
        dropped = self.keys[i:j]
        del self.keys[i:j]
        return dropped


class IntervalList:
    """Union of open intervals, stored as disjoint pieces of tagged endpoints.

    Two pieces like (2,5) and (5,9) stay separate with a mixed endpoint at 5,
    so covers(5) is False. Overlapping inserts merge.
    """

    __slots__ = ("keys", "tags", "ops")

    def __init__(self, ops: OpCounter | None = None):
        self.keys: list = []
        self.tags: list = []
        self.ops = ops

    def __len__(self) -> int:
        # number of stored disjoint pieces
        return sum(1 for t in self.tags if t != LEFT)

    def __bool__(self) -> bool:
        return bool(self.keys)

    def _tick(self) -> None:
        if self.ops is not None:
            self.ops.n += 1

    def pieces(self) -> list[tuple]:
        """The stored disjoint open intervals, in order."""
        out = []
        left = None
        for k, t in zip(self.keys, self.tags):
            if t == LEFT:
                left = k
            elif t == RIGHT:
                out.append((left, k))
                left = None
            else:  # MIXED: closes one piece, opens the next
                out.append((left, k))
                left = k
        return out

    def covers(self, v) -> bool:
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        if i == len(self.keys):
            return False
        return self.keys[i] != v and self.tags[i] != LEFT

    def next_val(self, v):
        """Smallest v' >= v not covered by any stored interval."""
        self._tick()
        i = bisect.bisect_left(self.keys, v)
        if i == len(self.keys):
            return v
        if self.keys[i] != v and self.tags[i] != LEFT:
            return self.keys[i]
        return v

    def insert(self, lo, hi) -> None:
        """Insert the open interval (lo, hi); lo < hi required."""
        if not lo < hi:
            raise ValueError(f"malformed interval ({lo}, {hi})")
        self._tick()
        cov_lo = self.covers(lo)
        cov_hi = self.covers(hi)
        # drop endpoints strictly inside (lo, hi)
        i = bisect.bisect_right(self.keys, lo)
        j = bisect.bisect_left(self.keys, hi)
        del self.keys[i:j]
        del self.tags[i:j]
        if not cov_lo:
            i = bisect.bisect_left(self.keys, lo)
            if i < len(self.keys) and self.keys[i] == lo:
                if self.tags[i] == RIGHT:
                    self.tags[i] = MIXED
            else:
                self.keys.insert(i, lo)
                self.tags.insert(i, LEFT)
        if not cov_hi:
            j = bisect.bisect_left(self.keys, hi)
            if j < len(self.keys) and self.keys[j] == hi:
                if self.tags[j] == LEFT:
                    self.tags[j] = MIXED
            else:
                self.keys.insert(j, hi)
                self.tags.insert(j, RIGHT)

    def covered_ints(self, lo: int, hi: int) -> set[int]:
        """Integers in [lo, hi] covered by the union (test/debug helper)."""
        return {v for v in range(lo, hi + 1) if self.covers(v)}


def next_union(a: IntervalList, b: IntervalList, v):
    """Smallest v' >= v uncovered by covered(a) | covered(b).

    Alternates next_val calls on the two lists until a common fixed point.
    """
    y = v
    while True:
        z = a.next_val(y)
        y = b.next_val(z)
        if y == z:
            return y
