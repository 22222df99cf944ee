"""Core data model: property graphs, predicates, pattern queries, schema graphs.

Graphs are directed multigraphs whose vertices and edges carry exactly one
label and a flat key/value property map. Everything here is immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

PropertyValue = Union[str, int, float, bool]

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=")


class GraphError(ValueError):
    """Base class for data-model violations."""


class KindMismatchError(GraphError):
    """Raised when values of different kinds are compared."""


def value_kind(value: PropertyValue) -> str:
    # bool must be tested before int: bool is a subclass of int in Python
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "string"
    raise GraphError(f"unsupported property value type: {type(value).__name__}")


def compare_values(a: PropertyValue, b: PropertyValue) -> int:
    """Three-way comparison. Raises KindMismatchError on mixed kinds."""
    ka, kb = value_kind(a), value_kind(b)
    if ka != kb:
        raise KindMismatchError(f"cannot compare {ka} with {kb}")
    if a < b:  # type: ignore[operator]
        return -1
    if a > b:  # type: ignore[operator]
        return 1
    return 0


@dataclass(frozen=True)
class Atom:
    """A single comparison `key op value`."""

    key: str
    op: str
    value: PropertyValue

    def __post_init__(self) -> None:
        if self.op not in COMPARATORS:
            raise GraphError(f"unknown comparator {self.op!r}")
        value_kind(self.value)

    def satisfied_by(self, value: PropertyValue) -> bool:
        """True if `value` satisfies this atom. Mixed kinds never satisfy."""
        try:
            c = compare_values(value, self.value)
        except KindMismatchError:
            return False
        if self.op == "=":
            return c == 0
        if self.op == "!=":
            return c != 0
        if self.op == "<":
            return c < 0
        if self.op == "<=":
            return c <= 0
        if self.op == ">":
            return c > 0
        return c >= 0


@dataclass(frozen=True)
class Predicate:
    """A conjunction of atoms. The empty conjunction is universally true.

    Atoms that share a key must agree on the value kind; this is checked at
    construction so that kind errors surface at parse time, not match time.
    """

    atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        kinds: dict[str, str] = {}
        for atom in self.atoms:
            kind = value_kind(atom.value)
            seen = kinds.setdefault(atom.key, kind)
            if seen != kind:
                raise KindMismatchError(
                    f"predicate mixes {seen} and {kind} values on key {atom.key!r}"
                )

    @property
    def is_universal(self) -> bool:
        return not self.atoms

    def matches(self, props: Mapping[str, PropertyValue]) -> bool:
        for atom in self.atoms:
            if atom.key not in props:
                return False
            if not atom.satisfied_by(props[atom.key]):
                return False
        return True

    def keys(self) -> set[str]:
        return {a.key for a in self.atoms}


TRUE = Predicate()


@dataclass(frozen=True)
class Vertex:
    id: str
    label: str
    props: Mapping[str, PropertyValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    label: str
    props: Mapping[str, PropertyValue] = field(default_factory=dict)


class PropertyGraph:
    """A labeled, directed multigraph with per-element property maps.

    Vertex and edge ids must be unique; every edge endpoint must exist.
    Parallel edges with distinct ids are allowed. Iteration order over the
    internal indexes is always sorted by id so downstream algorithms are
    deterministic regardless of input order.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge]):
        self.vertices: dict[str, Vertex] = {}
        self.edges: dict[str, Edge] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise GraphError(f"duplicate vertex id {v.id!r}")
            self.vertices[v.id] = v
        for e in edges:
            if e.id in self.edges:
                raise GraphError(f"duplicate edge id {e.id!r}")
            for endpoint in (e.src, e.dst):
                if endpoint not in self.vertices:
                    raise GraphError(
                        f"edge {e.id!r} references undeclared vertex {endpoint!r}"
                    )
            self.edges[e.id] = e

        self._by_label: dict[str, list[Edge]] = {}
        self._out: dict[tuple[str, str], list[Edge]] = {}
        self._in: dict[tuple[str, str], list[Edge]] = {}
        for eid in sorted(self.edges):
            e = self.edges[eid]
            self._by_label.setdefault(e.label, []).append(e)
            self._out.setdefault((e.src, e.label), []).append(e)
            self._in.setdefault((e.dst, e.label), []).append(e)

    def edges_with_label(self, label: str) -> list[Edge]:
        return self._by_label.get(label, [])

    def out_edges(self, vertex_id: str, label: str) -> list[Edge]:
        return self._out.get((vertex_id, label), [])

    def in_edges(self, vertex_id: str, label: str) -> list[Edge]:
        return self._in.get((vertex_id, label), [])

    def element_sets(self) -> tuple[frozenset, frozenset]:
        """Canonical identity of the graph: its vertex and edge element sets."""
        vs = frozenset(
            (v.id, v.label, frozenset(v.props.items())) for v in self.vertices.values()
        )
        es = frozenset(
            (e.id, e.src, e.dst, e.label, frozenset(e.props.items()))
            for e in self.edges.values()
        )
        return vs, es

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self.element_sets() == other.element_sets()

    def __repr__(self) -> str:
        return f"PropertyGraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"


@dataclass(frozen=True)
class PatternNode:
    alias: str
    label: str
    predicate: Predicate = TRUE


@dataclass(frozen=True)
class PatternEdge:
    src: str
    dst: str
    label: str
    predicate: Predicate = TRUE


class PatternQuery:
    """A small directed pattern with labels and conjunctive predicates.

    The pattern must be weakly connected and contain at least one edge.
    Edge order is preserved as written; `weight` is the query's weight or
    frequency in a workload (defaults to 1.0).
    """

    def __init__(
        self,
        nodes: Iterable[PatternNode],
        edges: Iterable[PatternEdge],
        weight: float = 1.0,
        name: str = "",
    ):
        self.nodes: dict[str, PatternNode] = {}
        for n in nodes:
            if n.alias in self.nodes:
                raise GraphError(f"duplicate alias {n.alias!r}")
            self.nodes[n.alias] = n
        self.edges: tuple[PatternEdge, ...] = tuple(edges)
        if not self.edges:
            raise GraphError("pattern must have at least one edge")
        for e in self.edges:
            for alias in (e.src, e.dst):
                if alias not in self.nodes:
                    raise GraphError(f"edge endpoint {alias!r} is not a declared alias")
        if weight < 0:
            raise GraphError("query weight must be nonnegative")
        self.weight = float(weight)
        self.name = name
        if not self._is_weakly_connected():
            raise GraphError("pattern must be weakly connected")

    def _is_weakly_connected(self) -> bool:
        adj: dict[str, set[str]] = {a: set() for a in self.nodes}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.nodes)

    def aliases(self) -> list[str]:
        return sorted(self.nodes)

    def signature(self) -> tuple:
        """Structural identity (ignores weight and name)."""
        nodes = frozenset(
            (n.alias, n.label, n.predicate.atoms) for n in self.nodes.values()
        )
        edges = tuple(
            (e.src, e.dst, e.label, e.predicate.atoms) for e in self.edges
        )
        return nodes, edges

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternQuery):
            return NotImplemented
        return self.signature() == other.signature()

    def __repr__(self) -> str:
        return f"PatternQuery({self.name or '?'}, |V|={len(self.nodes)}, |E|={len(self.edges)})"


@dataclass(frozen=True)
class SchemaGraph:
    """Distinct label structure of a graph plus per-label element counts."""

    vertex_labels: Mapping[str, int]
    triples: Mapping[tuple[str, str, str], int]

    def triple_count(self, src_label: str, edge_label: str, dst_label: str) -> int:
        return self.triples.get((src_label, edge_label, dst_label), 0)


def infer_schema(graph: PropertyGraph) -> SchemaGraph:
    """Derive the schema graph: label sets and element tallies."""
    vlabels: dict[str, int] = {}
    for v in graph.vertices.values():
        vlabels[v.label] = vlabels.get(v.label, 0) + 1
    triples: dict[tuple[str, str, str], int] = {}
    for e in graph.edges.values():
        key = (graph.vertices[e.src].label, e.label, graph.vertices[e.dst].label)
        triples[key] = triples.get(key, 0) + 1
    return SchemaGraph(vertex_labels=vlabels, triples=triples)


def graph_union(a: PropertyGraph, b: PropertyGraph) -> PropertyGraph:
    """Union two subgraphs of a common base graph, deduplicating by id."""
    vertices = dict(a.vertices)
    vertices.update(b.vertices)
    edges = dict(a.edges)
    edges.update(b.edges)
    return PropertyGraph(vertices.values(), edges.values())


def subgraph_of(small: PropertyGraph, big: PropertyGraph) -> bool:
    sv, se = small.element_sets()
    bv, be = big.element_sets()
    return sv <= bv and se <= be
