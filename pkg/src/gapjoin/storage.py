"""Dictionary-encoded relations stored as flattened ordered search trees.

Index tuples are 1-based per level: coordinate x_j addresses the x_j'th
smallest distinct value under the prefix. Coordinate 0 maps to -inf and
fanout+1 maps to +inf; those sentinels are only legal in the last position.
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field

from .intervals import NEG_INF, POS_INF, OpCounter


class DataError(Exception):
    """Bad input data: arity mismatch, unreadable file, mixed-type column."""


@dataclass(frozen=True)
class Dictionary:
    """Order-preserving raw value <-> code map for one attribute."""

    codes: dict  # raw -> int
    raws: tuple  # code -> raw

    @classmethod
    def from_values(cls, values) -> "Dictionary":
        ordered = sorted(set(values))
        return cls({v: i for i, v in enumerate(ordered)}, tuple(ordered))

    def encode(self, raw) -> int:
        try:
            return self.codes[raw]
        except KeyError:
            raise DataError(f"value {raw!r} not in dictionary") from None

    def decode(self, code: int):
        return self.raws[code]

    def __len__(self) -> int:
        return len(self.raws)


@dataclass(frozen=True)
class Relation:
    """A named set of integer tuples; attrs are attribute ids in GAO position order."""

    name: str
    attrs: tuple[int, ...]
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self):
        for t in self.tuples:
            if len(t) != len(self.attrs):
                raise DataError(f"{self.name}: tuple arity {len(t)} != {len(self.attrs)}")

    @property
    def arity(self) -> int:
        return len(self.attrs)


class TrieIndex:
    """Sorted distinct child values per node, flattened level by level.

    Level d stores every depth-d node's values in one array; a node is a
    contiguous (start, end) slice of that array, and child_span maps each
    value slot to its children's slice one level down.
    """

    def __init__(self, rel: Relation, gao_position=None):
        if gao_position is not None:
            pos = [gao_position[a] for a in rel.attrs]
            if pos != sorted(pos):
                raise DataError(f"{rel.name}: attribute order inconsistent with the GAO")
        self.name = rel.name
        self.attrs = rel.attrs
        self.arity = rel.arity
        self.vals: list[list[int]] = [[] for _ in range(self.arity)]
        self.child_span: list[list[tuple[int, int]]] = [[] for _ in range(self.arity)]
        self._root_span = (0, 0)
        self._build(sorted(rel.tuples))

    def _build(self, rows: list[tuple[int, ...]]) -> None:
        if not rows:
            return

        def build_level(d: int, lo: int, hi: int) -> tuple[int, int]:
            # group rows[lo:hi] by their value at depth d
            start = len(self.vals[d])
            i = lo
            while i < hi:
                v = rows[i][d]
                j = i
                while j < hi and rows[j][d] == v:
                    j += 1
                self.vals[d].append(v)
                if d + 1 < self.arity:
                    span = build_level(d + 1, i, j)
                else:
                    span = (0, 0)
                self.child_span[d].append(span)
                i = j
            return (start, len(self.vals[d]))

        self._root_span = build_level(0, 0, len(rows))

    def _span(self, x: tuple[int, ...]) -> tuple[int, int]:
        """The children slice addressed by the in-range index prefix x."""
        span = self._root_span
        for d, coord in enumerate(x):
            lo, hi = span
            if not 1 <= coord <= hi - lo:
                raise IndexError(f"{self.name}: coordinate {coord} out of range at depth {d}")
            span = self.child_span[d][lo + coord - 1]
        return span

    def fanout(self, x: tuple[int, ...] = ()) -> int:
        lo, hi = self._span(x)
        return hi - lo

    def access(self, x: tuple[int, ...]):
        """Value at index tuple x; only the last coordinate may be out of range."""
        if not x:
            raise IndexError("empty index tuple has no value")
        lo, hi = self._span(x[:-1])
        last = x[-1]
        if last == 0:
            return NEG_INF
        if last == hi - lo + 1:
            return POS_INF
        if not 1 <= last <= hi - lo:
            raise IndexError(f"{self.name}: coordinate {last} out of range")
        return self.vals[len(x) - 1][lo + last - 1]

    def values_under(self, x: tuple[int, ...]) -> list[int]:
        lo, hi = self._span(x)
        return self.vals[len(x)][lo:hi]

    def find_gap(self, x: tuple[int, ...], a, ops: OpCounter | None = None):
        """Tightest bracketing child coordinates (x-, x+) around value a.

        access((x, x-)) <= a <= access((x, x+)), with x- maximal and x+
        minimal; x- == x+ iff a is present. Binary search on the child slice.
        """
        if len(x) >= self.arity:
            raise IndexError(f"{self.name}: prefix length {len(x)} not below arity")
        lo, hi = self._span(x)
        if ops is not None:
            ops.n += max(1, (hi - lo).bit_length())
        d = len(x)
        x_minus = bisect.bisect_right(self.vals[d], a, lo, hi) - lo
        i_ge = bisect.bisect_left(self.vals[d], a, lo, hi)
        x_plus = (i_ge - lo) + 1 if i_ge < hi else (hi - lo) + 1
        return x_minus, x_plus

    def index_of(self, t: tuple[int, ...]) -> tuple[int, ...] | None:
        """The full index tuple addressing data tuple t, or None if absent."""
        coords = []
        x: tuple[int, ...] = ()
        for v in t:
            xm, xp = self.find_gap(x, v)
            if xm != xp:
                return None
            coords.append(xm)
            x = tuple(coords)
        return x


@dataclass
class AttributeColumn:
    """Raw values observed for one attribute across relations, plus ordering mode."""

    values: set = field(default_factory=set)


def build_dictionaries(columns: dict[int, set], numeric: str = "auto") -> dict[int, Dictionary]:
    """Per-attribute dictionaries; numeric is one of auto|always|never.

    Raw values are strings from ingestion or already-typed values from
    generators. Under auto, a column whose strings all parse as integers is
    ordered numerically; "always" demands it and raises DataError otherwise.
    """
    out = {}
    for attr, vals in columns.items():
        out[attr] = Dictionary.from_values(_coerce_column(vals, numeric))
    return out


def _coerce_column(vals: set, numeric: str):
    if not vals:
        return []
    if all(isinstance(v, (int, float)) for v in vals):
        return list(vals)
    as_str = [str(v) for v in vals]
    if numeric == "never":
        return as_str
    try:
        nums = [int(s) for s in as_str]
    except ValueError:
        if numeric == "always":
            raise DataError("numeric ordering requested but column has non-integer values")
        return as_str
    return nums


def read_rows(path, arity: int, delimiter: str = "\t", header: bool = True):
    """Rows from a delimited file; the header row, when present, is skipped."""
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            for i, row in enumerate(reader):
                if i == 0 and header:
                    continue
                if not row:
                    continue
                if len(row) != arity:
                    raise DataError(f"{path}: row {i + 1} has {len(row)} fields, expected {arity}")
                rows.append(tuple(row))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return rows
