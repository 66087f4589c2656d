"""Query text model: atoms, parsed queries, concrete instances.

Grammar: `Q(A,B,C) :- R(A,B), S(B,C), T(A,C).`  The head is ignored for the
natural-join semantics; attribute ids follow first appearance in the body.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .querygraph import Hypergraph


class QuerySyntaxError(Exception):
    pass


@dataclass(frozen=True)
class Atom:
    name: str
    attrs: tuple[str, ...]


@dataclass(frozen=True)
class Query:
    attrs: tuple[str, ...]
    atoms: tuple[Atom, ...]

    @property
    def n_attrs(self) -> int:
        return len(self.attrs)

    def attr_id(self, name: str) -> int:
        return self.attrs.index(name)

    def hypergraph(self) -> Hypergraph:
        ids = {a: i for i, a in enumerate(self.attrs)}
        edges = tuple(
            (atom.name, frozenset(ids[a] for a in atom.attrs)) for atom in self.atoms
        )
        return Hypergraph(self.n_attrs, edges)


@dataclass(frozen=True)
class Instance:
    """A query plus raw tuples per atom. Tuples are dedup'd (set semantics)."""

    query: Query
    data: dict  # atom name -> frozenset of raw tuples

    def __post_init__(self):
        for atom in self.query.atoms:
            rows = self.data.get(atom.name)
            if rows is None:
                raise ValueError(f"no data for atom {atom.name}")
            for t in rows:
                if len(t) != len(atom.attrs):
                    raise ValueError(f"{atom.name}: arity mismatch in {t!r}")

    def total_tuples(self) -> int:
        return sum(len(v) for v in self.data.values())


_ATOM_RE = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*\(([^()]*)\)\s*")


def parse_query(text: str) -> Query:
    text = text.strip()
    if text.endswith("."):
        text = text[:-1]
    if ":-" not in text:
        raise QuerySyntaxError("expected `Head(...) :- Body.`")
    head_txt, body_txt = text.split(":-", 1)
    head = _parse_atom(head_txt)
    body = [_parse_atom(part) for part in _split_atoms(body_txt)]
    if not body:
        raise QuerySyntaxError("empty body")
    names = [a.name for a in body]
    if len(set(names)) != len(names):
        raise QuerySyntaxError("duplicate atom names in body")
    seen: list[str] = []
    for atom in body:
        for v in atom.attrs:
            if v not in seen:
                seen.append(v)
    for v in head.attrs:
        if v not in seen:
            raise QuerySyntaxError(f"head variable {v} not in any body atom")
    return Query(tuple(seen), tuple(body))


def _split_atoms(body_txt: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in body_txt:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    return parts


def _parse_atom(txt: str) -> Atom:
    m = _ATOM_RE.fullmatch(txt)
    if not m:
        raise QuerySyntaxError(f"malformed atom: {txt.strip()!r}")
    name = m.group(1)
    attrs = tuple(v.strip() for v in m.group(2).split(",") if v.strip())
    if not attrs:
        raise QuerySyntaxError(f"atom {name} has no variables")
    if len(set(attrs)) != len(attrs):
        raise QuerySyntaxError(f"atom {name} repeats a variable")
    return Atom(name, attrs)
