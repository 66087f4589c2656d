"""Probe-point search over the constraint tree.

Both strategies build a candidate tuple one coordinate at a time, starting
each coordinate at -1 and asking the filter of applicable nodes for the next
free value; +inf forces a backtrack that is memoized as a new constraint so
the dead prefix is never proposed again. The chain strategy requires every
principal filter to be a chain (nested elimination orders guarantee this);
the general strategy linearizes the filter and works on a shadow chain of
pattern meets, consulting each shadow node together with its original.
"""

from __future__ import annotations

from .ctree import (
    WILDCARD,
    Constraint,
    ConstraintTree,
    Node,
    generalizes,
    num_equalities,
    pattern_meet,
    pattern_sort_key,
)
from .intervals import POS_INF


class ChainViolation(Exception):
    """A principal filter was not a chain: wrong mode or GAO for this query."""


def chain_of(filter_nodes: list[Node]) -> list[Node]:
    """Validate that the (already specialized-first) filter is a chain and
    return it bottom (most specialized) to top."""
    for a, b in zip(filter_nodes, filter_nodes[1:]):
        if not generalizes(b.pattern, a.pattern):
            raise ChainViolation(
                f"incomparable patterns in principal filter: "
                f"{a.pattern} vs {b.pattern}"
            )
    return filter_nodes


def next_chain_val(tree: ConstraintTree, x, chain: list[Node], idx: int = 0):
    """Smallest y >= x free at chain[idx] and every node above it.

    Ping-pongs between this node's intervals and the rest of the chain, then
    memoizes the inferred gap at this node's pattern.
    """
    u = chain[idx]
    if idx == len(chain) - 1:
        return u.intervals.next_val(x)
    y = x
    while True:
        z = next_chain_val(tree, y, chain, idx + 1)
        y = u.intervals.next_val(z)
        if y == z:
            break
    if y > x:
        tree.ins_constraint(Constraint(u.pattern, x - 1, y))
    return y


def _backtrack(tree: ConstraintTree, pbar: tuple, trace=None):
    """Insert the constraint that rules the dead prefix out and return the
    0-based coordinate to redo, or None when the whole space is covered."""
    eq_positions = [k for k, c in enumerate(pbar) if c is not WILDCARD]
    if not eq_positions:
        return None
    i0 = eq_positions[-1]
    c = Constraint(pbar[:i0], pbar[i0] - 1, pbar[i0] + 1)
    if trace is not None:
        trace.append(("backtrack", str(c)))
    tree.ins_constraint(c)
    return i0


def get_probe_point_beta(tree: ConstraintTree, trace=None, dead_prefixes: set | None = None):
    """An active tuple built along chain filters, or None when covered."""
    n = tree.n
    t = [-1] * n
    i = 0
    while i < n:
        prefix = tuple(t[:i])
        if dead_prefixes is not None:
            assert prefix not in dead_prefixes, f"dead prefix re-proposed: {prefix}"
        filt = tree.principal_filter(prefix)
        if not filt:
            t[i] = -1
            i += 1
            continue
        chain = chain_of(filt)
        v = next_chain_val(tree, -1, chain)
        if v == POS_INF:
            if dead_prefixes is not None:
                dead_prefixes.add(prefix)
            i0 = _backtrack(tree, chain[0].pattern, trace)
            if i0 is None:
                return None
            i = i0
            continue
        t[i] = v
        i += 1
    return tuple(t)


# -- general (shadow chain) strategy ----------------------------------------


def linearize(filter_nodes: list[Node]) -> list[Node]:
    """A linear extension of the specialization order, specialized first.

    Sorting by descending equality count is valid: a strict specialization
    always has strictly more equalities.
    """
    return sorted(filter_nodes, key=lambda u: pattern_sort_key(u.pattern))


def shadow_patterns(patterns: list[tuple]) -> list[tuple]:
    """Suffix meets of a linearization; always a chain, bottom first."""
    out = list(patterns)
    for j in range(len(out) - 2, -1, -1):
        out[j] = pattern_meet(out[j], out[j + 1])
    return out


def _next_pair_val(tree: ConstraintTree, x, shadow: Node, orig: Node):
    """next_chain_val on the two-node chain {shadow, original}."""
    if shadow is orig:
        return shadow.intervals.next_val(x)
    y = x
    while True:
        z = orig.intervals.next_val(y)
        y = shadow.intervals.next_val(z)
        if y == z:
            break
    if y > x:
        tree.ins_constraint(Constraint(shadow.pattern, x - 1, y))
    return y


def next_shadow_chain_val(tree: ConstraintTree, x, pairs: list[tuple[Node, Node]], idx: int = 0):
    """Smallest y >= x free at every shadow node above idx and its original.

    The inferred gap is memoized at the shadow pattern: everything the search
    skipped is covered by nodes at least as general as the shadow, so the
    shadow's pattern is the most general one the inference supports.
    """
    shadow, orig = pairs[idx]
    if idx == len(pairs) - 1:
        return _next_pair_val(tree, x, shadow, orig)
    y = x
    while True:
        z = next_shadow_chain_val(tree, y, pairs, idx + 1)
        y = _next_pair_val(tree, z, shadow, orig)
        if y == z:
            break
    if y > x:
        tree.ins_constraint(Constraint(shadow.pattern, x - 1, y))
    return y


def _shadow_pairs(tree: ConstraintTree, filt: list[Node]) -> list[tuple[Node, Node]]:
    lin = linearize(filt)
    shadows = shadow_patterns([u.pattern for u in lin])
    pairs = []
    for u, pat in zip(lin, shadows):
        node = tree.find_node(pat)
        if node is None:
            tree.ins_constraint(Constraint(pat, float("-inf"), 0))
            node = tree.find_node(pat)
            assert node is not None, f"shadow node {pat} not materialized"
        pairs.append((node, u))
    return pairs


def get_probe_point_general(tree: ConstraintTree, trace=None, dead_prefixes: set | None = None):
    """Like the chain strategy, but sound for arbitrary principal filters."""
    n = tree.n
    t = [-1] * n
    i = 0
    while i < n:
        prefix = tuple(t[:i])
        if dead_prefixes is not None:
            assert prefix not in dead_prefixes, f"dead prefix re-proposed: {prefix}"
        filt = tree.principal_filter(prefix)
        if not filt:
            t[i] = -1
            i += 1
            continue
        pairs = _shadow_pairs(tree, filt)
        v = next_shadow_chain_val(tree, -1, pairs)
        if v == POS_INF:
            if dead_prefixes is not None:
                dead_prefixes.add(prefix)
            i0 = _backtrack(tree, pairs[0][0].pattern, trace)
            if i0 is None:
                return None
            i = i0
            continue
        t[i] = v
        i += 1
    return tuple(t)
