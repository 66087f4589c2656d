"""Query hypergraph analysis: acyclicity classes, elimination orders, widths.

Attributes are integer ids 0..n-1. A global attribute order (GAO) is a
permutation of them. The engine picks its probe strategy from this analysis:
a nested elimination order exists exactly for beta-acyclic queries and makes
every principal filter in the constraint tree a chain; otherwise we fall back
to the general shadow-chain strategy and try to minimize elimination width.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class Hypergraph:
    n_attrs: int
    edges: tuple[tuple[str, frozenset[int]], ...]

    def __post_init__(self):
        names = [name for name, _ in self.edges]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        covered = set()
        for name, e in self.edges:
            if not e:
                raise ValueError(f"edge {name} is empty")
            if not e <= set(range(self.n_attrs)):
                raise ValueError(f"edge {name} has out-of-range attributes")
            covered |= e
        if covered != set(range(self.n_attrs)):
            raise ValueError("every attribute must appear in some edge")

    def edge_sets(self) -> list[frozenset[int]]:
        return [e for _, e in self.edges]


@dataclass(frozen=True)
class GaoChoice:
    gao: tuple[int, ...]
    mode: str  # "betaChain" | "shadowGeneral"
    width: int


def gyo_reduce(h: Hypergraph):
    """GYO reduction. Returns (is_alpha_acyclic, join_tree).

    The join tree, present iff acyclic, is a dict mapping edge name ->
    parent edge name (root maps to None); bags are the original edge sets.
    """
    live = {name: set(e) for name, e in h.edges}
    parent: dict[str, str | None] = {}
    changed = True
    while live and changed:
        changed = False
        # vertices in at most one live edge are private: drop them
        count: dict[int, int] = {}
        for e in live.values():
            for v in e:
                count[v] = count.get(v, 0) + 1
        for e in live.values():
            private = {v for v in e if count[v] <= 1}
            if private:
                e -= private
                changed = True
        # drop edges that are empty or contained in another live edge
        names = list(live)
        for name in names:
            e = live[name]
            if not e:
                if len(live) == 1:
                    parent[name] = None
                else:
                    # attach to an arbitrary surviving edge deterministically
                    host = min(k for k in live if k != name)
                    parent[name] = host
                del live[name]
                changed = True
                continue
            host = None
            for other in live:
                if other != name and e <= live[other]:
                    host = other
                    break
            if host is not None:
                parent[name] = host
                del live[name]
                changed = True
    if live:
        return False, None
    return True, parent


def _nest_point(edge_sets: list[frozenset[int]], vertices: set[int]) -> int | None:
    """Smallest vertex whose incident edges form a nested chain, or None."""
    for v in sorted(vertices):
        incident = sorted({e for e in edge_sets if v in e}, key=len)
        ok = all(a <= b for a, b in zip(incident, incident[1:]))
        if ok:
            return v
    return None


def is_beta_acyclic(h: Hypergraph) -> bool:
    """True iff every sub-hypergraph is alpha-acyclic, via nest-point elimination."""
    return find_nested_elimination_order(h) is not None


def find_nested_elimination_order(h: Hypergraph):
    """A GAO whose every prefix poset is a chain, or None if none exists.

    Built back to front: the last attribute is always a nest point of the
    remaining hypergraph (ties broken by smallest id, so the result is
    deterministic).
    """
    edge_sets = [frozenset(e) for e in h.edge_sets()]
    vertices = set(range(h.n_attrs))
    order_rev: list[int] = []
    while vertices:
        v = _nest_point(edge_sets, vertices)
        if v is None:
            return None
        order_rev.append(v)
        vertices.discard(v)
        edge_sets = [e - {v} for e in edge_sets]
        edge_sets = [e for e in edge_sets if e]
    return tuple(reversed(order_rev))


def all_nested_elimination_orders(h: Hypergraph):
    """Every GAO whose prefix posets are all chains (exhaustive; small n only)."""
    out = []
    for perm in itertools.permutations(range(h.n_attrs)):
        if all(_is_chain(p) for p in prefix_posets(h, perm)):
            out.append(perm)
    return out


def _is_chain(sets: list[frozenset[int]]) -> bool:
    distinct = sorted(set(sets), key=len)
    return all(a <= b for a, b in zip(distinct, distinct[1:]))


def prefix_posets(h: Hypergraph, gao) -> list[list[frozenset[int]]]:
    """The collections P_k for k = 1..n under the given order.

    Eliminates the last attribute, adds the union edge, and recurses; P_k
    collects the incident edges of v_k with v_k removed.
    """
    _check_gao(h, gao)
    posets: list[list[frozenset[int]]] = [[] for _ in range(h.n_attrs)]
    edge_sets = [frozenset(e) for e in h.edge_sets()]
    for k in range(h.n_attrs - 1, -1, -1):
        v = gao[k]
        incident = [e for e in edge_sets if v in e]
        p_k = [e - {v} for e in incident]
        posets[k] = p_k
        u = frozenset().union(*p_k) if p_k else frozenset()
        edge_sets = [e - {v} for e in edge_sets] + [u]
        edge_sets = [e for e in edge_sets if e]
    return posets


def elimination_width(h: Hypergraph, gao) -> int:
    """max_k |U(P_k)| under the elimination process for this order."""
    width = 0
    for p_k in prefix_posets(h, gao):
        u = frozenset().union(*p_k) if p_k else frozenset()
        width = max(width, len(u))
    return width


def _check_gao(h: Hypergraph, gao) -> None:
    if sorted(gao) != list(range(h.n_attrs)):
        raise ValueError("GAO must be a permutation of the attribute ids")


def gaifman_neighbors(h: Hypergraph) -> list[set[int]]:
    nbr: list[set[int]] = [set() for _ in range(h.n_attrs)]
    for e in h.edge_sets():
        for a in e:
            nbr[a] |= e - {a}
    return nbr


def treewidth_exact(h: Hypergraph) -> int:
    """Brute-force treewidth of the Gaifman graph via subset DP (n <= ~16)."""
    n = h.n_attrs
    if n == 0:
        return 0
    nbr_bits = [0] * n
    for e in h.edge_sets():
        for a in e:
            for b in e:
                if a != b:
                    nbr_bits[a] |= 1 << b
    # dp[S] = min over elimination orders of S (eliminated first) of the max
    # degree seen, where degrees are taken in the graph with S's fill-in.
    full = (1 << n) - 1
    dp = {0: 0}
    # reach[v][S]: neighbors of v in the graph where S was eliminated =
    # vertices outside S reachable from v through S. Computed on the fly.
    import functools

    @functools.lru_cache(maxsize=None)
    def reach(v: int, s: int) -> int:
        seen = 1 << v
        frontier = nbr_bits[v]
        out = 0
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            if seen & b:
                continue
            seen |= b
            u = b.bit_length() - 1
            if s & b:
                frontier |= nbr_bits[u] & ~seen
            else:
                out |= b
        return out

    for s in range(1, full + 1):
        best = None
        rest = s
        while rest:
            b = rest & -rest
            rest ^= b
            v = b.bit_length() - 1
            prev = dp[s ^ b]
            deg = bin(reach(v, s ^ b)).count("1")
            cand = max(prev, deg)
            if best is None or cand < best:
                best = cand
        dp[s] = best
    reach.cache_clear()
    return dp[full]


def min_width_gao(h: Hypergraph, exhaustive_limit: int = 8):
    """The minimum-elimination-width GAO, exhaustively for small n,
    otherwise greedy min-degree on the Gaifman graph."""
    n = h.n_attrs
    if n <= exhaustive_limit:
        best = None
        for perm in itertools.permutations(range(n)):
            w = elimination_width(h, perm)
            if best is None or w < best[1]:
                best = (perm, w)
        return best
    # greedy min-degree elimination, built back to front
    nbr = gaifman_neighbors(h)
    alive = set(range(n))
    order_rev = []
    width = 0
    while alive:
        v = min(alive, key=lambda u: (len(nbr[u] & alive), u))
        width = max(width, len(nbr[v] & alive))
        for a in nbr[v] & alive:
            nbr[a] |= (nbr[v] & alive) - {a}
        alive.discard(v)
        order_rev.append(v)
    return tuple(reversed(order_rev)), width


def choose_gao(h: Hypergraph) -> GaoChoice:
    """Nested elimination order when one exists, else a low-width GAO."""
    neo = find_nested_elimination_order(h)
    if neo is not None:
        return GaoChoice(neo, "betaChain", elimination_width(h, neo))
    gao, width = min_width_gao(h)
    return GaoChoice(gao, "shadowGeneral", width)
