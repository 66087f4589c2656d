"""The constraint tree: pattern-addressed interval lists encoding known gaps.

A constraint is an equality/wildcard prefix plus one open interval; the tree
has one level per attribute in the GAO, equality children in a sorted list
plus at most one wildcard child per node, and per-node interval lists for the
next attribute. The tree owns the invariant that no equality child label is
covered by its own node's intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intervals import NEG_INF, POS_INF, IntervalList, OpCounter, SortedList

WILDCARD = None  # wildcard pattern component


@dataclass(frozen=True)
class Constraint:
    """pattern: tuple of int or None (wildcard); open interval (lo, hi) sits
    at attribute position len(pattern); later components are implicit wildcards."""

    pattern: tuple
    lo: object
    hi: object

    def __str__(self) -> str:
        return render_constraint(self.pattern, self.lo, self.hi)


def render_constraint(pattern, lo, hi) -> str:
    parts = ["*" if c is WILDCARD else str(c) for c in pattern]
    parts.append(f"({fmt_end(lo)},{fmt_end(hi)})")
    return "<" + ",".join(parts) + ">"


def fmt_end(v) -> str:
    if v == NEG_INF:
        return "-inf"
    if v == POS_INF:
        return "+inf"
    return str(int(v))


def pattern_str(pattern) -> str:
    if not pattern:
        return "<>"
    return "<" + ",".join("*" if c is WILDCARD else str(c) for c in pattern) + ">"


def generalizes(p, q) -> bool:
    """True iff p's equalities agree with q wherever p is not a wildcard
    (q at least as specialized as p; q may itself contain wildcards)."""
    return all(a is WILDCARD or a == b for a, b in zip(p, q))


def pattern_meet(p, q):
    """Componentwise meet: value beats wildcard; conflicting values are a bug
    here because all equalities in one principal filter come from one prefix."""
    out = []
    for a, b in zip(p, q):
        if a is WILDCARD:
            out.append(b)
        elif b is WILDCARD or a == b:
            out.append(a)
        else:
            raise AssertionError(f"meet of conflicting equalities {a} != {b}")
    return tuple(out)


def num_equalities(p) -> int:
    return sum(1 for c in p if c is not WILDCARD)


def _component_key(c):
    return (1,) if c is WILDCARD else (0, c)


def pattern_sort_key(p):
    """Specialized-first total order: equality count descending, then a
    lexicographic order that puts values before wildcards."""
    return (-num_equalities(p), tuple(_component_key(c) for c in p))


class Node:
    __slots__ = ("pattern", "equalities", "children", "star", "intervals")

    def __init__(self, pattern: tuple, ops: OpCounter | None):
        self.pattern = pattern
        self.equalities = SortedList(ops)
        self.children: dict = {}
        self.star: Node | None = None
        self.intervals = IntervalList(ops)


class ConstraintTree:
    """Mutable, single-owner per evaluation."""

    def __init__(self, n_attrs: int, ops: OpCounter | None = None, trace: list | None = None):
        self.n = n_attrs
        self.ops = ops
        self.trace = trace
        self.root = Node((), ops)
        self.inserts = 0  # attempted constraint insertions (W counter)

    # -- insertion ---------------------------------------------------------

    def ins_constraint(self, c: Constraint) -> None:
        if len(c.pattern) >= self.n:
            raise ValueError("constraint pattern too long for the attribute count")
        lo, hi = c.lo, c.hi
        if not lo < hi:
            raise ValueError(f"malformed interval ({lo}, {hi})")
        # intervals reaching below the domain act like (-inf, hi)
        if lo < 0 and lo != NEG_INF:
            lo = NEG_INF
        if _integer_empty(lo, hi):
            return
        self.inserts += 1
        node = self.root
        for comp in c.pattern:
            if comp is WILDCARD:
                if node.star is None:
                    node.star = Node(node.pattern + (WILDCARD,), self.ops)
                node = node.star
            else:
                if node.intervals.covers(comp):
                    return  # subsumed by an ancestor's interval
                child = node.children.get(comp)
                if child is None:
                    node.equalities.insert(comp)
                    child = Node(node.pattern + (comp,), self.ops)
                    node.children[comp] = child
                node = child
        node.intervals.insert(lo, hi)
        for label in node.equalities.delete_interval(lo, hi):
            del node.children[label]  # engulfed branches are now implied

    # -- queries -----------------------------------------------------------

    def generalizing_nodes(self, prefix: tuple) -> list[Node]:
        """All nodes at depth len(prefix) whose pattern generalizes the prefix."""
        layer = [self.root]
        for v in prefix:
            nxt = []
            for node in layer:
                child = node.children.get(v)
                if child is not None:
                    nxt.append(child)
                if node.star is not None:
                    nxt.append(node.star)
            layer = nxt
        return layer

    def principal_filter(self, prefix: tuple) -> list[Node]:
        """Nodes with nonempty intervals generalizing the prefix, most
        specialized first (a total order whenever the filter is a chain)."""
        nodes = [u for u in self.generalizing_nodes(prefix) if u.intervals]
        nodes.sort(key=lambda u: pattern_sort_key(u.pattern))
        return nodes

    def find_node(self, pattern: tuple) -> Node | None:
        node = self.root
        for comp in pattern:
            node = node.star if comp is WILDCARD else node.children.get(comp)
            if node is None:
                return None
        return node

    # -- debug dump --------------------------------------------------------

    def dump(self) -> str:
        """One line per node: `pattern | intervals | equality-labels`."""
        lines = []

        def visit(node: Node):
            ivs = " ".join(f"({fmt_end(a)},{fmt_end(b)})" for a, b in node.intervals.pieces())
            eqs = " ".join(str(k) for k in node.equalities)
            lines.append(f"{pattern_str(node.pattern)} | {ivs} | {eqs}")
            for label in node.equalities:
                visit(node.children[label])
            if node.star is not None:
                visit(node.star)

        visit(self.root)
        return "\n".join(lines)


def _integer_empty(lo, hi) -> bool:
    """True when the open interval (lo, hi) contains no integer."""
    if lo == NEG_INF or hi == POS_INF:
        return False
    return hi - lo <= 1
