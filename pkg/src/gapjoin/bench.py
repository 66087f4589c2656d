"""Instance generators, baseline join algorithms, and benchmark suites.

Every generator is deterministic given its parameters and seed. Baselines
return the join output plus a work counter (element visits / seeks) so
scaling trends can be compared against the engine's counters without wall
clocks.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass

from . import engine
from .certlab import build_upper_bound_certificate, nested_loop_join
from .queries import Atom, Instance, Query, parse_query
from .querygraph import gyo_reduce
from .storage import read_rows, build_dictionaries


class BaselineError(Exception):
    """Baseline not applicable to this query class."""


# -- generators ---------------------------------------------------------------


def set_intersect_disjoint(n: int) -> Instance:
    q = parse_query("Q(A) :- S1(A), S2(A).")
    return Instance(q, {
        "S1": frozenset((v,) for v in range(1, n + 1)),
        "S2": frozenset((v,) for v in range(n + 1, 2 * n + 1)),
    })


def set_intersect_example(n: int) -> Instance:
    """R(A) join T(A,B) with two fanout-n groups under A values 1 and 2."""
    q = parse_query("Q(A,B) :- R(A), T(A,B).")
    rows = {(1, 2 * i) for i in range(1, n + 1)} | {(2, 3 * i) for i in range(1, n + 1)}
    return Instance(q, {
        "R": frozenset((v,) for v in range(1, n + 1)),
        "T": frozenset(rows),
    })


def worked_q2(n: int = 4) -> Instance:
    """Four-atom fixture with an empty output: R(A1), S(A1,A2), T(A2,A3), U(A3)."""
    q = parse_query("Q(A1,A2,A3) :- R(A1), S(A1,A2), T(A2,A3), U(A3).")
    return Instance(q, {
        "R": frozenset((v,) for v in range(1, n + 1)),
        "S": frozenset((a, b) for a in range(1, n + 1) for b in range(1, n + 1)),
        "T": frozenset({(2, 2), (2, 4)}),
        "U": frozenset({(1,), (3,)}),
    })


def bowtie_random(n: int, seed: int) -> Instance:
    rng = random.Random(seed)
    q = parse_query("Q(X,Y) :- R(X), S(X,Y), T(Y).")
    xs = range(1, n + 1)
    return Instance(q, {
        "R": frozenset((v,) for v in xs if rng.random() < 0.6),
        "S": frozenset((x, y) for x in xs for y in xs if rng.random() < 0.4),
        "T": frozenset((v,) for v in xs if rng.random() < 0.6),
    })


def _path_query(m: int, k: int = 2) -> Query:
    atoms = []
    for i in range(1, m + 1):
        attrs = tuple(f"A{j}" for j in range(i, i + k))
        atoms.append(f"R{i}({','.join(attrs)})")
    head = ",".join(f"A{j}" for j in range(1, m + k))
    return parse_query(f"Q({head}) :- {', '.join(atoms)}.")


def path_hard(m: int, big_m: int) -> Instance:
    """Chain query with the certificate hidden along the path; empty output.

    Relation R_i has m chunks over domain [m*M]: chunk j is the full square
    [(j-1)M+2, jM]^2 for j not in {i, i-1}, chunk i is the single tuple
    ((i-1)M+1, (i-1)M+1), and chunk i-1 (index mod m) is empty.
    """
    if m < 3:
        raise ValueError("need m >= 3")
    q = _path_query(m)
    data = {}
    for i in range(1, m + 1):
        rows = set()
        skip = m if i == 1 else i - 1
        for j in range(1, m + 1):
            lo, hi = (j - 1) * big_m + 2, j * big_m
            if j == i:
                rows.add(((i - 1) * big_m + 1, (i - 1) * big_m + 1))
            elif j == skip:
                pass
            else:
                rows.update((a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1))
        data[f"R{i}"] = frozenset(rows)
    return Instance(q, data)


def path_hard_wide(m: int, big_m: int, k: int) -> Instance:
    """Arity-k variant of path_hard with k-dimensional chunk cubes."""
    import itertools

    if m < 3 or k < 2:
        raise ValueError("need m >= 3 and k >= 2")
    q = _path_query(m, k)
    data = {}
    for i in range(1, m + 1):
        rows = set()
        skip = m if i == 1 else i - 1
        for j in range(1, m + 1):
            lo, hi = (j - 1) * big_m + 2, j * big_m
            if j == i:
                rows.add(((i - 1) * big_m + 1,) * k)
            elif j == skip:
                pass
            else:
                rows.update(itertools.product(range(lo, hi + 1), repeat=k))
        data[f"R{i}"] = frozenset(rows)
    return Instance(q, data)


TRIANGLE_QUERY_TEXT = "Q(A,B,C) :- R(A,B), S(B,C), T(A,C)."


def triangle_random(n_vertices: int, p: float, seed: int, tripartite: bool = False) -> Instance:
    """Random graph as the three orientations of the triangle query.

    Plain mode uses one vertex set with symmetric edge pairs; tripartite mode
    draws three independent bipartite edge sets.
    """
    rng = random.Random(seed)
    q = parse_query(TRIANGLE_QUERY_TEXT)
    vs = range(n_vertices)
    if tripartite:
        def bi():
            return frozenset((u, v) for u in vs for v in vs if rng.random() < p)

        return Instance(q, {"R": bi(), "S": bi(), "T": bi()})
    edges = {(u, v) for u in vs for v in vs if u < v and rng.random() < p}
    sym = frozenset(e for u, v in edges for e in ((u, v), (v, u)))
    return Instance(q, {"R": sym, "S": sym, "T": sym})


def triangle_rowcol(k: int) -> Instance:
    """Empty-output triangle family that separates the probe strategies.

    All (a, b) pairs exist in R; every S column shares one hub C value and
    every T row has its own private C value, so no pair of them meets. The
    generic store pays per (a, b) pair; the dyadic store dismisses whole b
    ranges per a.
    """
    q = parse_query(TRIANGLE_QUERY_TEXT)
    ks = range(1, k + 1)
    return Instance(q, {
        "R": frozenset((a, b) for a in ks for b in ks),
        "S": frozenset((b, 0) for b in ks),
        "T": frozenset((a, a) for a in ks),
    })


def random_instance(seed: int, max_attrs: int = 4, max_rels: int = 4,
                    max_values: int = 8, max_rows: int = 12) -> Instance:
    """Seeded random query + data for differential testing."""
    rng = random.Random(seed)
    n = rng.randint(1, max_attrs)
    attrs = [f"A{i}" for i in range(n)]
    m = rng.randint(1, max_rels)
    atoms = []
    for i in range(m):
        arity = rng.randint(1, n)
        chosen = rng.sample(attrs, arity)
        atoms.append(Atom(f"R{i}", tuple(chosen)))
    atoms = _cover_all(atoms, attrs, rng)
    q = Query(tuple(attrs), tuple(atoms))
    data = {}
    for atom in q.atoms:
        rows = set()
        for _ in range(rng.randint(0, max_rows)):
            rows.add(tuple(rng.randint(0, max_values - 1) for _ in atom.attrs))
        data[atom.name] = frozenset(rows)
    return Instance(q, data)


def _cover_all(atoms: list[Atom], attrs: list[str], rng) -> list[Atom]:
    atoms = [a for a in atoms if a.attrs]
    if not atoms:
        atoms = [Atom("R0", (attrs[0],))]
    covered = {a for atom in atoms for a in atom.attrs}
    missing = [a for a in attrs if a not in covered]
    if missing:
        i = rng.randrange(len(atoms))
        base = atoms[i]
        atoms[i] = Atom(base.name, base.attrs + tuple(missing))
    return atoms


FAMILIES = {
    "setIntersectDisjoint": lambda params: set_intersect_disjoint(int(params.get("n", 1000))),
    "setIntersectExample21": lambda params: set_intersect_example(int(params.get("n", 3))),
    "workedQ2": lambda params: worked_q2(int(params.get("n", 4))),
    "bowtieRandom": lambda params: bowtie_random(int(params.get("n", 8)), int(params.get("seed", 0))),
    "pathHard": lambda params: path_hard(int(params.get("m", 5)), int(params.get("M", 16))),
    "pathHardWide": lambda params: path_hard_wide(
        int(params.get("m", 5)), int(params.get("M", 8)), int(params.get("k", 3))),
    "triangleRandom": lambda params: triangle_random(
        int(params.get("v", 16)), float(params.get("p", 0.3)), int(params.get("seed", 0)),
        bool(int(params.get("tripartite", 0)))),
    "triangleRowCol": lambda params: triangle_rowcol(int(params.get("k", 16))),
    "random": lambda params: random_instance(int(params.get("seed", 0))),
}


def generate_instance(family: str, params: dict) -> Instance:
    try:
        factory = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; known: {sorted(FAMILIES)}") from None
    return factory(params)


# -- baselines ----------------------------------------------------------------


@dataclass
class BaselineResult:
    tuples: set
    work: int


def merge_intersect(instance: Instance) -> BaselineResult:
    """m-way sorted intersection with galloping jumps; unary atoms only."""
    q = instance.query
    if q.n_attrs != 1 or any(len(a.attrs) != 1 for a in q.atoms):
        raise BaselineError("merge intersection needs unary atoms over one attribute")
    import bisect

    lists = [sorted(v[0] for v in instance.data[a.name]) for a in q.atoms]
    if any(not lst for lst in lists):
        return BaselineResult(set(), 1)
    work = 0
    out = set()
    cand = lists[0][0]
    idx = [0] * len(lists)
    j = 0
    while True:
        lst = lists[j]
        work += 1
        i = bisect.bisect_left(lst, cand, idx[j])
        if i == len(lst):
            break
        idx[j] = i
        if lst[i] == cand:
            j += 1
            if j == len(lists):
                out.add((cand,))
                cand += 1
                j = 0
        else:
            cand = lst[i]
            j = 0
    return BaselineResult(out, work)


def yannakakis(instance: Instance) -> BaselineResult:
    """Semijoin full reducer along the GYO join tree, then tree joins."""
    q = instance.query
    acyclic, parent = gyo_reduce(q.hypergraph())
    if not acyclic:
        raise BaselineError("Yannakakis requires an alpha-acyclic query")
    work = 0
    attr_ids = {a.name: [q.attr_id(x) for x in a.attrs] for a in q.atoms}
    rels = {a.name: set(instance.data[a.name]) for a in q.atoms}
    children: dict[str, list[str]] = {a.name: [] for a in q.atoms}
    root = None
    for name, par in parent.items():
        if par is None:
            root = name
        else:
            children[par].append(name)
    order = _topo_order(root, children)

    def semijoin(target: str, source: str) -> None:
        nonlocal work
        shared = sorted(set(attr_ids[target]) & set(attr_ids[source]))
        if not shared:
            work += len(rels[source])
            keep_all = bool(rels[source])
            if not keep_all:
                rels[target] = set()
            return
        spos = [attr_ids[source].index(a) for a in shared]
        tpos = [attr_ids[target].index(a) for a in shared]
        keys = set()
        for row in rels[source]:
            work += 1
            keys.add(tuple(row[i] for i in spos))
        kept = set()
        for row in rels[target]:
            work += 1
            if tuple(row[i] for i in tpos) in keys:
                kept.add(row)
        rels[target] = kept

    for name in reversed(order):  # leaves to root
        if parent.get(name) is not None:
            semijoin(parent[name], name)
    for name in order:  # root to leaves
        if parent.get(name) is not None:
            semijoin(name, parent[name])

    # join along the tree, root first
    out_attrs: list[int] = list(attr_ids[root])
    joined = {tuple(row) for row in rels[root]}
    for name in order[1:]:
        new_attrs = [a for a in attr_ids[name] if a not in out_attrs]
        pos_shared_out = [out_attrs.index(a) for a in attr_ids[name] if a in out_attrs]
        pos_shared_rel = [attr_ids[name].index(a) for a in attr_ids[name] if a in out_attrs]
        pos_new_rel = [attr_ids[name].index(a) for a in new_attrs]
        by_key: dict[tuple, list] = {}
        for row in rels[name]:
            work += 1
            by_key.setdefault(tuple(row[i] for i in pos_shared_rel), []).append(
                tuple(row[i] for i in pos_new_rel))
        nxt = set()
        for row in joined:
            work += 1
            for ext in by_key.get(tuple(row[i] for i in pos_shared_out), ()):
                nxt.add(row + ext)
        joined = nxt
        out_attrs += new_attrs
    perm = [out_attrs.index(i) for i in range(q.n_attrs)]
    out = {tuple(row[p] for p in perm) for row in joined}
    return BaselineResult(out, work)


def _topo_order(root: str, children: dict[str, list[str]]) -> list[str]:
    order = []
    stack = [root]
    while stack:
        name = stack.pop()
        order.append(name)
        stack.extend(sorted(children[name], reverse=True))
    return order


def leapfrog(instance: Instance, gao=None) -> BaselineResult:
    """Backtracking multiway trie join over the GAO; counts seeks/advances.

    No worst-case-optimal refinements: at each depth the participating
    relations' sorted child lists are intersected by bisect-driven jumping.
    """
    prep = engine.prepare(instance, mode="general", gao=gao)
    import bisect

    plan = prep.plan
    n = plan.n
    work = 0
    out = []
    parts_at = [[] for _ in range(n)]
    for rp in plan.relations:
        for level, pos in enumerate(rp.gao_positions):
            parts_at[pos].append((rp.name, level))

    paths = {rp.name: () for rp in plan.relations}
    t = [None] * n

    def intersect(lists: list[list]) -> list:
        """Leapfrog m-way intersection: alternating galloping seeks."""
        nonlocal work
        if any(not lst for lst in lists):
            work += 1
            return []
        k = len(lists)
        pos = [0] * k
        common = []
        x = max(lst[0] for lst in lists)
        j = 0
        matched = 0
        while True:
            lst = lists[j]
            work += 1
            i = bisect.bisect_left(lst, x, pos[j])
            if i == len(lst):
                return common
            pos[j] = i
            if lst[i] == x:
                matched += 1
                if matched >= k:
                    common.append(x)
                    x += 1
                    matched = 0
            else:
                x = lst[i]
                matched = 1
            j = (j + 1) % k

    def rec(depth: int) -> None:
        if depth == n:
            out.append(tuple(t))
            return
        parts = parts_at[depth]
        lists = [prep.indexes[name].values_under(paths[name]) for name, _ in parts]
        for v in intersect(lists):
            t[depth] = v
            saved = {}
            for name, _ in parts:
                saved[name] = paths[name]
                idx = prep.indexes[name]
                xm, _ = idx.find_gap(paths[name], v)
                paths[name] = paths[name] + (xm,)
            rec(depth + 1)
            for name, _ in parts:
                paths[name] = saved[name]

    rec(0)
    decoded = {engine._present(prep, tuple(v for v in row)) for row in out}
    return BaselineResult(decoded, work)


BASELINES = {
    "mergeIntersect": merge_intersect,
    "yannakakis": yannakakis,
    "leapfrog": leapfrog,
}


def run_baseline(name: str, instance: Instance) -> BaselineResult:
    try:
        fn = BASELINES[name]
    except KeyError:
        raise ValueError(f"unknown baseline {name!r}; known: {sorted(BASELINES)}") from None
    return fn(instance)


# -- reports ------------------------------------------------------------------


def doubling_ratios(values: list[float]) -> list[float]:
    return [b / a if a else float("inf") for a, b in zip(values, values[1:])]


def _engine_row(instance: Instance, mode: str, label: str, size, gao=None) -> dict:
    t0 = time.perf_counter()
    prep = engine.prepare(instance, mode=mode, gao=gao)
    res = engine.evaluate(prep)
    wall = time.perf_counter() - t0
    # the bound certificate enumerates every index variable; skip it on bulk data
    cert = (
        build_upper_bound_certificate(instance, prep.plan.gao)
        if instance.total_tuples() <= 20_000 else None
    )
    return {
        "instance": label,
        "size": size,
        "mode": mode,
        "resolvedMode": prep.plan.mode,
        "gao": [instance.query.attrs[i] for i in prep.plan.gao],
        "inputTuples": instance.total_tuples(),
        "Z": len(res.tuples),
        "certUB": len(cert) if cert is not None else None,
        **res.stats.as_dict(),
        "wallTime": wall,
    }


def suite_pathhard(seed: int = 0, ms=(16, 32, 64, 128), m: int = 5) -> dict:
    """Both systems run under the natural chain order A1..A_{m+1}, which is a
    nested elimination order for this query; the report records it."""
    gao = tuple(range(m + 1))
    rows, lf_rows = [], []
    for big_m in ms:
        inst = path_hard(m, big_m)
        rows.append(_engine_row(inst, "auto", f"pathHard({m},{big_m})", big_m, gao=gao))
        t0 = time.perf_counter()
        lf = leapfrog(inst, gao=gao)
        lf_rows.append({
            "instance": f"pathHard({m},{big_m})", "size": big_m, "mode": "leapfrog",
            "gao": [inst.query.attrs[i] for i in gao],
            "Z": len(lf.tuples), "work": lf.work,
            "wallTime": time.perf_counter() - t0,
        })
    return {
        "suite": "pathhard",
        "rows": rows + lf_rows,
        "engineProbeRatios": doubling_ratios([r["probeCalls"] for r in rows]),
        "leapfrogWorkRatios": doubling_ratios([r["work"] for r in lf_rows]),
    }


def suite_setintersect(seed: int = 0, ns=(10**3, 10**4, 10**5)) -> dict:
    rows, merge_rows = [], []
    for n in ns:
        inst = set_intersect_disjoint(n)
        rows.append(_engine_row(inst, "auto", f"setIntersectDisjoint({n})", n))
        mr = merge_intersect(inst)
        merge_rows.append({
            "instance": f"setIntersectDisjoint({n})", "size": n,
            "mode": "mergeIntersect", "Z": len(mr.tuples), "work": mr.work,
        })
    return {
        "suite": "setintersect",
        "rows": rows + merge_rows,
        "engineProbeCalls": [r["probeCalls"] for r in rows],
    }


def suite_trianglemodes(seed: int = 0, ks=(8, 16, 32, 64)) -> dict:
    rows = []
    for k in ks:
        inst = triangle_rowcol(k)
        rows.append(_engine_row(inst, "general", f"triangleRowCol({k})", k))
        rows.append(_engine_row(inst, "triangle", f"triangleRowCol({k})", k))
    gen = [r for r in rows if r["mode"] == "general"]
    tri = [r for r in rows if r["mode"] == "triangle"]
    return {
        "suite": "trianglemodes",
        "rows": rows,
        "generalWorkRatios": doubling_ratios([r["comparisons"] for r in gen]),
        "triangleWorkRatios": doubling_ratios([r["comparisons"] for r in tri]),
        "generalInsertRatios": doubling_ratios([r["cdsInserts"] for r in gen]),
        "triangleInsertRatios": doubling_ratios([r["cdsInserts"] for r in tri]),
    }


def suite_randomcheck(seed: int = 0, count: int = 50) -> dict:
    rows = []
    mismatches = 0
    for i in range(count):
        inst = random_instance(seed * 10_000 + i)
        res = engine.run(inst)
        oracle, _ = nested_loop_join(inst)
        ok = res.tuples == oracle
        mismatches += 0 if ok else 1
        rows.append({
            "instance": f"random({seed * 10_000 + i})", "size": inst.total_tuples(),
            "mode": "auto", "Z": len(res.tuples), "match": ok,
            **res.stats.as_dict(),
        })
    return {"suite": "randomcheck", "rows": rows, "mismatches": mismatches}


SUITES = {
    "pathhard": suite_pathhard,
    "setintersect": suite_setintersect,
    "trianglemodes": suite_trianglemodes,
    "randomcheck": suite_randomcheck,
}


def run_suite(name: str, seed: int = 0) -> dict:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; known: {sorted(SUITES)}") from None
    report = fn(seed=seed)
    report["seed"] = seed
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def strip_timing(report: dict) -> dict:
    """Copy of a report without machine-dependent fields, for comparisons."""
    out = json.loads(json.dumps(report))
    for row in out.get("rows", []):
        row.pop("wallTime", None)
    return out


# -- file ingestion -------------------------------------------------------------


def load_instance(query_text: str, data_dir, delimiter: str = "\t",
                  numeric: str = "auto") -> Instance:
    """Query text plus one `<atom>.tsv` per atom under data_dir.

    Values are kept raw here; ordering (numeric vs lexicographic) is resolved
    by the dictionary builder at prepare time, per the numeric flag.
    """
    import os

    q = parse_query(query_text)
    data = {}
    for atom in q.atoms:
        path = os.path.join(str(data_dir), f"{atom.name}.tsv")
        rows = read_rows(path, len(atom.attrs), delimiter=delimiter)
        data[atom.name] = frozenset(rows)
    inst = Instance(q, data)
    # validate the numeric flag eagerly so bad columns fail at load time
    columns: dict[int, set] = {q.attr_id(a): set() for atom in q.atoms for a in atom.attrs}
    for atom in q.atoms:
        ids = [q.attr_id(a) for a in atom.attrs]
        for row in inst.data[atom.name]:
            for i, v in zip(ids, row):
                columns[i].add(v)
    build_dictionaries(columns, numeric)
    return inst
