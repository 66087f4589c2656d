"""The outer join loop: probe, explore gaps around the probe, emit or constrain.

One evaluation owns one constraint store and one counter set; indexes are
immutable and shareable. Probe tuples come from the constraint store; for
each one, every relation is searched around the probe along all low/high
index paths. A full match on the all-high path in every relation makes the
probe an output tuple; otherwise the discovered gaps are inserted back as
constraints. Termination: every non-output probe inserts a constraint that
covers it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import querygraph
from .ctree import WILDCARD, Constraint, ConstraintTree, render_constraint
from .intervals import OpCounter
from .probe import ChainViolation, get_probe_point_beta, get_probe_point_general
from .queries import Instance, Query
from .storage import DataError, Dictionary, TrieIndex, Relation, build_dictionaries

MODES = ("betaChain", "shadowGeneral", "triangle")


class PlanError(Exception):
    """Mode/GAO mismatch or malformed plan input."""


@dataclass
class EngineStats:
    probe_calls: int = 0
    constraints_inserted: int = 0  # engine-initiated (gap + output constraints)
    cds_inserts: int = 0  # all constraint-store insert attempts, incl. memos
    find_gap_calls: int = 0
    output_count: int = 0
    comparisons: int = 0  # elementary ordered-structure operations

    def as_dict(self) -> dict:
        return {
            "probeCalls": self.probe_calls,
            "constraintsInserted": self.constraints_inserted,
            "cdsInserts": self.cds_inserts,
            "findGapCalls": self.find_gap_calls,
            "outputCount": self.output_count,
            "comparisons": self.comparisons,
        }


@dataclass(frozen=True)
class RelationPlan:
    name: str
    attr_ids: tuple[int, ...]  # attribute ids, GAO-position order
    gao_positions: tuple[int, ...]  # s: level p -> position in the GAO


@dataclass(frozen=True)
class QueryPlan:
    query: Query
    gao: tuple[int, ...]  # attribute ids in global order
    mode: str
    width: int
    relations: tuple[RelationPlan, ...]

    @property
    def n(self) -> int:
        return len(self.gao)

    @property
    def max_arity(self) -> int:
        return max(len(r.attr_ids) for r in self.relations)


@dataclass
class Prepared:
    plan: QueryPlan
    dictionaries: dict  # attr id -> Dictionary
    indexes: dict  # relation name -> TrieIndex
    relations: dict  # relation name -> Relation (encoded)


@dataclass
class EvalResult:
    tuples: set  # raw tuples in query attribute order
    stats: EngineStats
    trace: list | None = None


def is_triangle_query(q: Query) -> bool:
    if q.n_attrs != 3 or len(q.atoms) != 3:
        return False
    ids = [frozenset(q.attr_id(a) for a in atom.attrs) for atom in q.atoms]
    return sorted(map(sorted, ids)) == [[0, 1], [0, 2], [1, 2]]


def make_plan(query: Query, mode: str = "auto", gao=None) -> QueryPlan:
    h = query.hypergraph()
    choice = querygraph.choose_gao(h)
    if mode == "auto":
        resolved = choice.mode
    elif mode == "beta":
        resolved = "betaChain"
    elif mode == "general":
        resolved = "shadowGeneral"
    elif mode == "triangle":
        resolved = "triangle"
    else:
        raise PlanError(f"unknown mode {mode!r}")
    if gao is None:
        if resolved == "betaChain" and choice.mode != "betaChain":
            raise PlanError("betaChain mode requires a beta-acyclic query")
        gao = choice.gao  # nested order when one exists, else minimum width
    gao = tuple(gao)
    if sorted(gao) != list(range(query.n_attrs)):
        raise PlanError("GAO must permute the query attributes")
    if resolved == "betaChain":
        posets = querygraph.prefix_posets(h, gao)
        if not all(querygraph._is_chain(p) for p in posets):
            raise PlanError("betaChain mode requires the GAO to be a nested elimination order")
    if resolved == "triangle" and not is_triangle_query(query):
        raise PlanError("triangle mode requires three binary atoms over three attributes")
    gao_pos = {a: i for i, a in enumerate(gao)}
    rels = []
    for atom in query.atoms:
        ids = sorted((query.attr_id(a) for a in atom.attrs), key=lambda i: gao_pos[i])
        rels.append(RelationPlan(atom.name, tuple(ids), tuple(gao_pos[i] for i in ids)))
    return QueryPlan(query, gao, resolved, querygraph.elimination_width(h, gao), tuple(rels))


def prepare(instance: Instance, mode: str = "auto", gao=None, numeric: str = "auto") -> Prepared:
    plan = make_plan(instance.query, mode, gao)
    q = instance.query
    columns: dict[int, set] = {q.attr_id(a): set() for atom in q.atoms for a in atom.attrs}
    for atom in q.atoms:
        ids = [q.attr_id(a) for a in atom.attrs]
        for row in instance.data[atom.name]:
            for i, v in zip(ids, row):
                columns[i].add(v)
    dicts = build_dictionaries(columns, numeric)
    gao_pos = {a: i for i, a in enumerate(plan.gao)}
    relations = {}
    indexes = {}
    for atom, rp in zip(q.atoms, plan.relations):
        ids = [q.attr_id(a) for a in atom.attrs]
        order = sorted(range(len(ids)), key=lambda j: gao_pos[ids[j]])
        encoded = frozenset(
            tuple(dicts[ids[j]].encode(row[j]) for j in order) for row in instance.data[atom.name]
        )
        rel = Relation(rp.name, rp.attr_ids, encoded)
        relations[rp.name] = rel
        indexes[rp.name] = TrieIndex(rel, gao_pos)
    return Prepared(plan, dicts, indexes, relations)


class ChainCds:
    """Constraint-tree store driven by the chain or shadow-chain probe."""

    def __init__(self, n: int, mode: str, ops: OpCounter, trace=None, debug=False):
        self.tree = ConstraintTree(n, ops)
        self.mode = mode
        self.trace = trace
        self.dead_prefixes: set | None = set() if debug else None

    def ins_constraint(self, c: Constraint) -> None:
        self.tree.ins_constraint(c)

    def get_probe_point(self):
        if self.mode == "betaChain":
            return get_probe_point_beta(self.tree, self.trace, self.dead_prefixes)
        return get_probe_point_general(self.tree, self.trace, self.dead_prefixes)

    @property
    def inserts(self) -> int:
        return self.tree.inserts


def _make_cds(plan: QueryPlan, prep: Prepared, ops: OpCounter, trace, debug):
    if plan.mode == "triangle":
        from .triangle import TriangleCds

        b_attr = plan.gao[1]
        return TriangleCds(len(prep.dictionaries[b_attr]), ops=ops, trace=trace)
    return ChainCds(plan.n, plan.mode, ops, trace, debug)


def evaluate(prep: Prepared, trace: list | None = None, debug: bool = False,
             max_probes: int | None = None) -> EvalResult:
    plan = prep.plan
    n = plan.n
    ops = OpCounter()
    stats = EngineStats()
    cds = _make_cds(plan, prep, ops, trace, debug)
    outputs_enc: list[tuple] = []

    while True:
        t = cds.get_probe_point()
        if t is None:
            break
        stats.probe_calls += 1
        if max_probes is not None and stats.probe_calls > max_probes:
            raise RuntimeError("probe budget exceeded")
        if trace is not None:
            trace.append(("probe", _decode_tuple(prep, t), t))
        all_match = True
        gaps: list[Constraint] = []
        for rp in plan.relations:
            idx = prep.indexes[rp.name]
            match = _explore(idx, rp, t, gaps, stats, ops, prep, trace)
            all_match = all_match and match
        if all_match:
            outputs_enc.append(t)
            stats.output_count += 1
            c = Constraint(tuple(t[:-1]), t[-1] - 1, t[-1] + 1)
            if trace is not None:
                trace.append(("output", _decode_tuple(prep, t)))
            stats.constraints_inserted += 1
            cds.ins_constraint(c)
        else:
            for c in gaps:
                stats.constraints_inserted += 1
                cds.ins_constraint(c)

    stats.cds_inserts = cds.inserts
    stats.comparisons = ops.n
    out = {_present(prep, t) for t in outputs_enc}
    return EvalResult(out, stats, trace)


def _explore(idx: TrieIndex, rp: RelationPlan, t, gaps, stats, ops, prep, trace) -> bool:
    """Search around t in one relation; extend low/high paths level by level.

    Appends the nonempty gap constraints found along in-range paths and
    reports whether the all-high path matched t exactly at every level.
    """
    k = idx.arity
    paths = {(): ((), ())}  # v-vector -> (coords, values along them)
    all_h_match = True
    for p in range(k):
        a = t[rp.gao_positions[p]]
        level_next = {}
        for v, (coords, vals) in paths.items():
            stats.find_gap_calls += 1
            xm, xp = idx.find_gap(coords, a, ops)
            vlo = idx.access(coords + (xm,))
            vhi = idx.access(coords + (xp,))
            if xm != xp:
                if v == (1,) * p:
                    all_h_match = False
                pattern = [WILDCARD] * rp.gao_positions[p]
                for lvl, val in enumerate(vals):
                    pattern[rp.gao_positions[lvl]] = val
                c = Constraint(tuple(pattern), vlo, vhi)
                gaps.append(c)
                if trace is not None:
                    trace.append(("gap", rp.name, _decode_constraint(prep, c), c))
            if p + 1 < k:
                fan = idx.fanout(coords)
                if 1 <= xm <= fan:
                    level_next[v + (0,)] = (coords + (xm,), vals + (vlo,))
                if 1 <= xp <= fan:
                    level_next[v + (1,)] = (coords + (xp,), vals + (vhi,))
        paths = level_next
    return all_h_match


def _present(prep: Prepared, t_enc) -> tuple:
    """Decode a probe tuple to raw values in original attribute order."""
    q = prep.plan.query
    gao_pos = {a: i for i, a in enumerate(prep.plan.gao)}
    return tuple(
        prep.dictionaries[i].decode(t_enc[gao_pos[i]]) for i in range(q.n_attrs)
    )


def _decode_tuple(prep: Prepared, t_enc) -> tuple:
    out = []
    for pos, v in enumerate(t_enc):
        d = prep.dictionaries[prep.plan.gao[pos]]
        out.append(d.decode(v) if isinstance(v, int) and 0 <= v < len(d) else v)
    return tuple(out)


def _decode_constraint(prep: Prepared, c: Constraint) -> str:
    """Render a gap constraint with dictionary-decoded values.

    Gap constraints only carry genuine relation values (or sentinels), so
    decoding is always faithful for them.
    """
    gao = prep.plan.gao
    pattern = []
    for pos, comp in enumerate(c.pattern):
        if comp is WILDCARD:
            pattern.append(WILDCARD)
        else:
            pattern.append(prep.dictionaries[gao[pos]].decode(comp))
    d = prep.dictionaries[gao[len(c.pattern)]]

    def end(v):
        return d.decode(v) if isinstance(v, int) and 0 <= v < len(d) else v

    return render_constraint(tuple(pattern), end(c.lo), end(c.hi))


def stats_report(stats: EngineStats, cert_ub: int, z: int, m: int, r: int) -> dict:
    """Counters next to the reference iteration/insert budgets for the run."""
    probe_budget = (2**r) * cert_ub + z
    insert_budget = m * (4**r) * cert_ub + z
    return {
        **stats.as_dict(),
        "certUB": cert_ub,
        "Z": z,
        "probeBudget": probe_budget,
        "insertBudget": insert_budget,
        "probeRatio": stats.probe_calls / probe_budget if probe_budget else None,
        "insertRatio": stats.constraints_inserted / insert_budget if insert_budget else None,
    }


def run(instance: Instance, mode: str = "auto", gao=None, trace: list | None = None,
        debug: bool = False) -> EvalResult:
    return evaluate(prepare(instance, mode, gao), trace=trace, debug=debug)
