"""Pattern matching: predicate containment, subgraph isomorphism, evaluation.

Three independent concerns live here:

* predicate_contains decides logical containment between conjunctive
  predicates by interval/point reasoning per key.
* subgraph_isomorphisms enumerates label-preserving injective embeddings
  between two patterns (VF2-style backtracking with deterministic order).
* evaluate_query computes the homomorphic matches of a pattern over a data
  graph, edge by edge in the query's written order, and reports a
  deterministic cost: every data edge inspected plus every intermediate row
  produced. The counter-based cost stands in for wall-clock profiling so
  that benefits are reproducible across machines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

from .model import (
    Atom,
    KindMismatchError,
    PatternQuery,
    Predicate,
    PropertyGraph,
    value_kind,
)

# ---------------------------------------------------------------------------
# Predicate containment


class _Range:
    """Solution set of a conjunction of atoms over one key: an interval with
    open/closed bounds plus a set of excluded points."""

    def __init__(self) -> None:
        self.lo = None
        self.lo_strict = False
        self.hi = None
        self.hi_strict = False
        self.excluded: set = set()
        self.kind: Optional[str] = None

    def add(self, atom: Atom) -> None:
        kind = value_kind(atom.value)
        if self.kind is None:
            self.kind = kind
        elif self.kind != kind:
            raise KindMismatchError(
                f"incomparable value kinds on key {atom.key!r}: {self.kind} vs {kind}"
            )
        v = atom.value
        if atom.op == "=":
            self._tighten_lo(v, False)
            self._tighten_hi(v, False)
        elif atom.op == "!=":
            self.excluded.add(v)
        elif atom.op == "<":
            self._tighten_hi(v, True)
        elif atom.op == "<=":
            self._tighten_hi(v, False)
        elif atom.op == ">":
            self._tighten_lo(v, True)
        else:  # >=
            self._tighten_lo(v, False)

    def _tighten_lo(self, v, strict: bool) -> None:
        if self.lo is None or v > self.lo or (v == self.lo and strict):
            self.lo, self.lo_strict = v, strict

    def _tighten_hi(self, v, strict: bool) -> None:
        if self.hi is None or v < self.hi or (v == self.hi and strict):
            self.hi, self.hi_strict = v, strict

    def normalize(self) -> None:
        # integers have successors: convert strict bounds to closed ones,
        # which makes point detection exact (x>1 and x<3 means x=2)
        if self.kind == "bool":
            # treat booleans as the 0/1 integers
            self.kind = "int"
            self.lo = int(self.lo) if self.lo is not None else 0
            self.hi = int(self.hi) if self.hi is not None else 1
            self.excluded = {int(v) for v in self.excluded}
            self._tighten_lo(0, False)
            self._tighten_hi(1, False)
        if self.kind == "int":
            if self.lo is not None and self.lo_strict:
                self.lo, self.lo_strict = self.lo + 1, False
            if self.hi is not None and self.hi_strict:
                self.hi, self.hi_strict = self.hi - 1, False
            # drop excluded points sitting on closed integer bounds
            while self.lo is not None and self.lo in self.excluded:
                self.lo += 1
            while self.hi is not None and self.hi in self.excluded:
                self.hi -= 1

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return self.lo_strict or self.hi_strict or self.lo in self.excluded
        if self.kind == "int":
            span = self.hi - self.lo + 1
            if span <= len(self.excluded):
                return all(v in self.excluded for v in range(self.lo, self.hi + 1))
        return False

    def implies(self, atom: Atom) -> bool:
        """True if every point of this range satisfies `atom`."""
        v = atom.value
        if self.kind == "int" and isinstance(v, bool):
            v = int(v)
        op = atom.op
        if op in ("<", "<="):
            if self.hi is None:
                return False
            return self.hi < v or (self.hi == v and (self.hi_strict or op == "<="))
        if op in (">", ">="):
            if self.lo is None:
                return False
            return self.lo > v or (self.lo == v and (self.lo_strict or op == ">="))
        if op == "=":
            return (
                self.lo is not None
                and self.hi is not None
                and not self.lo_strict
                and not self.hi_strict
                and self.lo == self.hi == v
            )
        # op == "!="
        if v in self.excluded:
            return True
        if self.lo is not None and (v < self.lo or (v == self.lo and self.lo_strict)):
            return True
        if self.hi is not None and (v > self.hi or (v == self.hi and self.hi_strict)):
            return True
        return False


def predicate_contains(weaker: Predicate, stronger: Predicate) -> bool:
    """True iff every value assignment satisfying `stronger` satisfies `weaker`.

    Decided per key: a key missing from `weaker` is universal; otherwise the
    range of `stronger`'s atoms on the key must imply every `weaker` atom.
    Raises KindMismatchError when the two predicates use incomparable value
    kinds on a shared key.
    """
    strong_by_key: dict[str, list[Atom]] = {}
    for atom in stronger.atoms:
        strong_by_key.setdefault(atom.key, []).append(atom)
    for atom in weaker.atoms:
        satoms = strong_by_key.get(atom.key)
        if not satoms:
            # stronger is unconstrained on this key but weaker is not
            return False
        if value_kind(atom.value) != value_kind(satoms[0].value):
            raise KindMismatchError(
                f"incomparable value kinds on key {atom.key!r}: "
                f"{value_kind(atom.value)} vs {value_kind(satoms[0].value)}"
            )
        rng = _Range()
        for s in satoms:
            rng.add(s)
        rng.normalize()
        if rng.is_empty():
            continue  # stronger unsatisfiable on this key: vacuously contained
        probe = atom
        if rng.kind == "int" and isinstance(atom.value, bool):
            probe = Atom(atom.key, atom.op, int(atom.value))
        if not rng.implies(probe):
            return False
    return True


# ---------------------------------------------------------------------------
# Subgraph isomorphism between patterns


@dataclass(frozen=True)
class Mapping:
    """An injective embedding of one pattern into another.

    node_map sends aliases to aliases; edge_map sends edge positions to edge
    positions, consistently with node_map.
    """

    node_map: dict[str, str]
    edge_map: dict[int, int]

    def mapped_aliases(self) -> frozenset[str]:
        return frozenset(self.node_map.values())

    def mapped_edges(self) -> frozenset[int]:
        return frozenset(self.edge_map.values())


def _node_order(needle: PatternQuery, haystack: PatternQuery) -> list[str]:
    """Connectivity-aware processing order: rarer haystack labels first,
    ties broken by alias, each next node adjacent to the chosen prefix."""
    freq: dict[str, int] = {}
    for n in haystack.nodes.values():
        freq[n.label] = freq.get(n.label, 0) + 1
    adj: dict[str, set[str]] = {a: set() for a in needle.nodes}
    for e in needle.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)

    def key(alias: str):
        return (freq.get(needle.nodes[alias].label, 0), alias)

    remaining = set(needle.nodes)
    order = [min(remaining, key=key)]
    remaining.discard(order[0])
    while remaining:
        frontier = {a for a in remaining if any(b in adj[a] for b in order)}
        pick = min(frontier or remaining, key=key)
        order.append(pick)
        remaining.discard(pick)
    return order


def iter_subgraph_isomorphisms(
    needle: PatternQuery, haystack: PatternQuery
) -> Iterator[Mapping]:
    """Enumerate label-preserving injective embeddings of needle into haystack.

    Node and edge labels must match exactly; predicates are deliberately not
    checked here (callers apply their own predicate rules). Enumeration order
    is deterministic: candidate aliases are tried in sorted order.
    """
    order = _node_order(needle, haystack)
    hay_edges = haystack.edges

    # group haystack edge positions by (src, dst, label) for edge assignment
    hay_groups: dict[tuple[str, str, str], list[int]] = {}
    for j, e in enumerate(hay_edges):
        hay_groups.setdefault((e.src, e.dst, e.label), []).append(j)

    node_map: dict[str, str] = {}
    used: set[str] = set()

    def edge_assignments(assign: dict[str, str]) -> Iterator[dict[int, int]]:
        # bucket needle edges by their image group, then injectively assign
        # within each group (relevant only for parallel edges)
        buckets: dict[tuple[str, str, str], list[int]] = {}
        for i, e in enumerate(needle.edges):
            key = (assign[e.src], assign[e.dst], e.label)
            if key not in hay_groups or len(hay_groups[key]) == 0:
                return
            buckets.setdefault(key, []).append(i)
        choices = []
        for key, needle_ids in buckets.items():
            pool = hay_groups[key]
            if len(needle_ids) > len(pool):
                return
            choices.append((needle_ids, _injections(len(needle_ids), pool)))
        for combo in product(*(c[1] for c in choices)):
            emap: dict[int, int] = {}
            for (needle_ids, _), chosen in zip(choices, combo):
                for ni, hj in zip(needle_ids, chosen):
                    emap[ni] = hj
            yield Mapping(node_map=dict(assign), edge_map=emap)

    def extend(depth: int) -> Iterator[Mapping]:
        if depth == len(order):
            yield from edge_assignments(node_map)
            return
        alias = order[depth]
        node = needle.nodes[alias]
        for cand in sorted(haystack.nodes):
            if cand in used:
                continue
            if haystack.nodes[cand].label != node.label:
                continue
            ok = True
            for e in needle.edges:
                # consistency with already-placed neighbors (existence check;
                # exact multiplicities are resolved in edge_assignments)
                if e.src == alias and e.dst in node_map:
                    if (cand, node_map[e.dst], e.label) not in hay_groups:
                        ok = False
                        break
                if e.dst == alias and e.src in node_map:
                    if (node_map[e.src], cand, e.label) not in hay_groups:
                        ok = False
                        break
                if e.src == alias and e.dst == alias:
                    if (cand, cand, e.label) not in hay_groups:
                        ok = False
                        break
            if not ok:
                continue
            node_map[alias] = cand
            used.add(cand)
            yield from extend(depth + 1)
            del node_map[alias]
            used.discard(cand)

    yield from extend(0)


def _injections(k: int, pool: list[int]) -> list[tuple[int, ...]]:
    """All ordered injective k-tuples from pool, in lexicographic order."""
    if k == 0:
        return [()]
    out = []
    for i, p in enumerate(pool):
        for rest in _injections(k - 1, pool[:i] + pool[i + 1 :]):
            out.append((p,) + rest)
    return out


def subgraph_isomorphisms(
    needle: PatternQuery, haystack: PatternQuery, limit: Optional[int] = None
) -> list[Mapping]:
    out = []
    for m in iter_subgraph_isomorphisms(needle, haystack):
        out.append(m)
        if limit is not None and len(out) >= limit:
            break
    return out


# ---------------------------------------------------------------------------
# Query evaluation over a data graph


@dataclass
class CostReport:
    """Deterministic evaluation cost: edges inspected plus rows produced."""

    edges_examined: int = 0
    rows_emitted: int = 0

    @property
    def cost(self) -> int:
        return self.edges_examined + self.rows_emitted

    def add(self, other: "CostReport") -> None:
        self.edges_examined += other.edges_examined
        self.rows_emitted += other.rows_emitted


@dataclass
class MatchSet:
    """Distinct rows binding every pattern alias to a data vertex id."""

    rows: list[dict[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def key_set(self) -> frozenset:
        return frozenset(frozenset(r.items()) for r in self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatchSet):
            return NotImplemented
        return self.key_set() == other.key_set()


def _node_ok(graph: PropertyGraph, query: PatternQuery, alias: str, vid: str) -> bool:
    node = query.nodes[alias]
    v = graph.vertices[vid]
    return v.label == node.label and node.predicate.matches(v.props)


def evaluate_query(graph: PropertyGraph, query: PatternQuery) -> tuple[MatchSet, CostReport]:
    """Homomorphic matches of `query` over `graph` plus the evaluation cost.

    Rows may bind two aliases to one vertex. Evaluation joins candidate rows
    edge by edge in the query's edge order; when an endpoint alias is already
    bound the matching edges are looked up through the adjacency index, so
    edges_examined counts exactly the edges a traversal engine would touch.
    """
    report = CostReport()
    rows: list[dict[str, str]] = [{}]
    for e in query.edges:
        new_rows: list[dict[str, str]] = []
        seen: set = set()
        for row in rows:
            src_bound = e.src in row
            dst_bound = e.dst in row
            if src_bound:
                candidates = graph.out_edges(row[e.src], e.label)
            elif dst_bound:
                candidates = graph.in_edges(row[e.dst], e.label)
            else:
                candidates = graph.edges_with_label(e.label)
            for de in candidates:
                report.edges_examined += 1
                if src_bound and de.src != row[e.src]:
                    continue
                if dst_bound and de.dst != row[e.dst]:
                    continue
                if not e.predicate.matches(de.props):
                    continue
                if not src_bound and not _node_ok(graph, query, e.src, de.src):
                    continue
                if not dst_bound and not _node_ok(graph, query, e.dst, de.dst):
                    continue
                if e.src == e.dst and de.src != de.dst:
                    continue
                extended = dict(row)
                extended[e.src] = de.src
                extended[e.dst] = de.dst
                report.rows_emitted += 1
                key = tuple(sorted(extended.items()))
                if key not in seen:
                    seen.add(key)
                    new_rows.append(extended)
        rows = new_rows
        if not rows:
            break
    return MatchSet(rows=rows), report
