"""Certificate lab: join oracle, symbolic comparisons, bound certificates.

Comparisons relate index-tuple variables of the form R[x1,..,xj], both sides
on the same attribute. An argument is a set of comparisons; the r*N-bounded
argument built here pins down, per attribute, the equalities within each
value group and the order between groups, so any instance satisfying it has
the same witness structure as the source instance.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .queries import Instance, Query
from .storage import TrieIndex, Relation


class ShapeMismatch(Exception):
    """A variable's index tuple does not exist in the instance's trees."""


@dataclass(frozen=True)
class Var:
    relation: str
    coords: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.relation}[{','.join(map(str, self.coords))}]"


@dataclass(frozen=True)
class Comparison:
    left: Var
    op: str  # '<' | '=' | '>'
    right: Var

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


Argument = frozenset  # of Comparison


@dataclass
class IndexedInstance:
    """Raw instance plus per-relation search trees over raw values.

    Raw values are compared directly, so each relation's attributes must be
    listed consistently with the GAO (here: the query's attribute id order).
    """

    instance: Instance
    tries: dict  # relation name -> TrieIndex
    attr_orders: dict  # relation name -> positions of atom attrs in id order

    @classmethod
    def build(cls, instance: Instance, gao=None) -> "IndexedInstance":
        q = instance.query
        pos = {a: i for i, a in enumerate(gao)} if gao is not None else {
            i: i for i in range(q.n_attrs)
        }
        tries = {}
        orders = {}
        for atom in q.atoms:
            ids = [q.attr_id(a) for a in atom.attrs]
            order = sorted(range(len(ids)), key=lambda j: pos[ids[j]])
            rows = frozenset(tuple(row[j] for j in order) for row in instance.data[atom.name])
            rel = Relation(atom.name, tuple(ids[j] for j in order), rows)
            tries[atom.name] = TrieIndex(rel)
            orders[atom.name] = order
        return cls(instance, tries, orders)

    def value(self, var: Var):
        trie = self.tries.get(var.relation)
        if trie is None:
            raise ShapeMismatch(f"unknown relation {var.relation}")
        try:
            v = trie.access(var.coords)
        except IndexError as exc:
            raise ShapeMismatch(str(exc)) from exc
        if v in (float("-inf"), float("inf")):
            raise ShapeMismatch(f"{var} is an out-of-range sentinel")
        return v


def nested_loop_join(instance: Instance):
    """Exact natural join by enumeration; returns (tuples, witnesses).

    Witnesses are one frozenset per output tuple: {(relation, full index
    tuple)} with exactly one entry per atom.
    """
    q = instance.query
    indexed = IndexedInstance.build(instance)
    out: set[tuple] = set()
    witnesses: set[frozenset] = set()
    assignment: dict[int, object] = {}

    def rec(i: int):
        if i == len(q.atoms):
            t = tuple(assignment[k] for k in range(q.n_attrs))
            out.add(t)
            wit = []
            for atom in q.atoms:
                ids = sorted(q.attr_id(a) for a in atom.attrs)
                proj = tuple(assignment[k] for k in ids)
                coords = indexed.tries[atom.name].index_of(proj)
                wit.append((atom.name, coords))
            witnesses.add(frozenset(wit))
            return
        atom = q.atoms[i]
        ids = [q.attr_id(a) for a in atom.attrs]
        for row in instance.data[atom.name]:
            ok = True
            for k, v in zip(ids, row):
                if k in assignment and assignment[k] != v:
                    ok = False
                    break
            if not ok:
                continue
            added = []
            for k, v in zip(ids, row):
                if k not in assignment:
                    assignment[k] = v
                    added.append(k)
            rec(i + 1)
            for k in added:
                del assignment[k]

    rec(0)
    return out, witnesses


def _attr_variables(indexed: IndexedInstance, attr: int):
    """(Var, value) pairs for every distinct index prefix ending at attr."""
    q = indexed.instance.query
    out = []
    for atom in q.atoms:
        trie = indexed.tries[atom.name]
        ids = list(trie.attrs)
        if attr not in ids:
            continue
        depth = ids.index(attr)  # 0-based level of attr within the relation
        prefixes = [()]
        for _ in range(depth):
            prefixes = [p + (i,) for p in prefixes for i in range(1, trie.fanout(p) + 1)]
        for p in prefixes:
            for i in range(1, trie.fanout(p) + 1):
                var = Var(atom.name, p + (i,))
                out.append((var, trie.access(p + (i,))))
    return out


def build_upper_bound_certificate(instance: Instance, gao=None) -> Argument:
    """Per attribute: spanning equalities within each value group (star from
    the lexicographically least variable) plus a chain of inequalities between
    group representatives. Size is at most max-arity times the tuple count."""
    indexed = IndexedInstance.build(instance, gao)
    comparisons: set[Comparison] = set()
    for attr in range(instance.query.n_attrs):
        groups: dict[object, list[Var]] = {}
        for var, value in _attr_variables(indexed, attr):
            groups.setdefault(value, []).append(var)
        reps = []
        for value in sorted(groups):
            members = sorted(groups[value], key=lambda v: (v.relation, v.coords))
            base = members[0]
            reps.append(base)
            for other in members[1:]:
                comparisons.add(Comparison(base, "=", other))
        for lo, hi in zip(reps, reps[1:]):
            comparisons.add(Comparison(lo, "<", hi))
    return frozenset(comparisons)


def verify_satisfies(instance: Instance, argument: Argument) -> bool:
    indexed = IndexedInstance.build(instance)
    for comp in argument:
        a = indexed.value(comp.left)
        b = indexed.value(comp.right)
        ok = a < b if comp.op == "<" else a > b if comp.op == ">" else a == b
        if not ok:
            return False
    return True


def witness_equivalence_check(argument: Argument, inst_a: Instance, inst_b: Instance):
    """Necessary-condition test for certificatehood on a concrete pair.

    Returns (equal_witness_sets, vacuous). The check is vacuous when either
    instance fails the argument.
    """
    if not (verify_satisfies(inst_a, argument) and verify_satisfies(inst_b, argument)):
        return True, True
    _, wits_a = nested_loop_join(inst_a)
    _, wits_b = nested_loop_join(inst_b)
    return wits_a == wits_b, False


def certificate_size_bound(instance: Instance) -> int:
    r = max(len(atom.attrs) for atom in instance.query.atoms)
    return r * instance.total_tuples()


# -- serialization ------------------------------------------------------------

_VAR_RE = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)\[([0-9,\s]*)\]\s*")


def argument_to_text(argument: Argument) -> str:
    return "\n".join(sorted(str(c) for c in argument))


def argument_from_text(text: str) -> Argument:
    comps = set()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        m = re.fullmatch(rf"({_VAR_RE.pattern})([<=>])({_VAR_RE.pattern})", line.replace(" ", ""))
        if not m:
            raise ValueError(f"bad comparison line: {line!r}")
        left = Var(m.group(2), tuple(int(x) for x in m.group(3).split(",") if x))
        right = Var(m.group(6), tuple(int(x) for x in m.group(7).split(",") if x))
        comps.add(Comparison(left, m.group(4), right))
    return frozenset(comps)


def order_isomorphic_revaluation(instance: Instance, rng) -> Instance:
    """Apply a random strictly increasing map per attribute to the raw values."""
    q = instance.query
    columns: dict[int, set] = {i: set() for i in range(q.n_attrs)}
    for atom in q.atoms:
        ids = [q.attr_id(a) for a in atom.attrs]
        for row in instance.data[atom.name]:
            for k, v in zip(ids, row):
                columns[k].add(v)
    maps = {}
    for k, vals in columns.items():
        ordered = sorted(vals)
        # strictly increasing random image
        image = []
        cur = rng.randint(0, 3)
        for _ in ordered:
            image.append(cur)
            cur += rng.randint(1, 4)
        maps[k] = dict(zip(ordered, image))
    data = {}
    for atom in q.atoms:
        ids = [q.attr_id(a) for a in atom.attrs]
        data[atom.name] = frozenset(
            tuple(maps[k][v] for k, v in zip(ids, row)) for row in instance.data[atom.name]
        )
    return Instance(q, data)
