"""Graph genes: decomposing a pattern into sub-patterns at articulation points.

A gene is a connected fragment of a view pattern, represented as a
ViewPattern of its own: its edges keep the parent's aliases, labels and
predicates, and its traversal order is the parent's order restricted to the
fragment. Genes partition the parent's edges; two genes overlap only on
articulation aliases, which is exactly where multi-view answers are joined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .model import GraphError, PatternQuery

if TYPE_CHECKING:  # pragma: no cover
    from .views import ViewPattern


def articulation_points(pattern: PatternQuery) -> set[str]:
    """Aliases whose removal disconnects the underlying undirected pattern.

    Standard DFS lowpoint computation, O(V+E). Parallel edges between a pair
    of aliases form a cycle and therefore never make their endpoints
    articulation points; the edge-indexed parent bookkeeping handles that.
    """
    adj: dict[str, list[tuple[str, int]]] = {a: [] for a in pattern.nodes}
    for i, e in enumerate(pattern.edges):
        if e.src == e.dst:
            continue  # self loops never affect connectivity
        adj[e.src].append((e.dst, i))
        adj[e.dst].append((e.src, i))

    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    result: set[str] = set()
    counter = 0

    def dfs(root: str) -> None:
        nonlocal counter
        stack: list[tuple[str, int, int]] = [(root, -1, 0)]
        children_of_root = 0
        order: list[tuple[str, int]] = []
        disc[root] = low[root] = counter
        counter += 1
        # iterative DFS so deep chains cannot overflow the stack
        it_stack = [(root, -1, iter(sorted(adj[root])))]
        while it_stack:
            node, via_edge, it = it_stack[-1]
            advanced = False
            for nxt, eidx in it:
                if eidx == via_edge:
                    continue
                if nxt not in disc:
                    disc[nxt] = low[nxt] = counter
                    counter += 1
                    if node == root:
                        children_of_root += 1
                    order.append((node, nxt))
                    it_stack.append((nxt, eidx, iter(sorted(adj[nxt]))))
                    advanced = True
                    break
                low[node] = min(low[node], disc[nxt])
            if not advanced:
                it_stack.pop()
                if it_stack:
                    parent = it_stack[-1][0]
                    low[parent] = min(low[parent], low[node])
                    if parent != root and low[node] >= disc[parent]:
                        result.add(parent)
        if children_of_root > 1:
            result.add(root)

    for alias in sorted(pattern.nodes):
        if alias not in disc:
            dfs(alias)
    return result


def _biconnected_edge_groups(pattern: PatternQuery) -> list[list[int]]:
    """Partition edge positions into biconnected blocks (self loops are their
    own block). Blocks are returned sorted by their smallest edge position."""
    adj: dict[str, list[tuple[str, int]]] = {a: [] for a in pattern.nodes}
    loops: list[int] = []
    for i, e in enumerate(pattern.edges):
        if e.src == e.dst:
            loops.append(i)
            continue
        adj[e.src].append((e.dst, i))
        adj[e.dst].append((e.src, i))

    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    counter = 0
    edge_stack: list[int] = []
    groups: list[list[int]] = []

    def dfs(root: str) -> None:
        nonlocal counter
        disc[root] = low[root] = counter
        counter += 1
        it_stack = [(root, -1, iter(sorted(adj[root])))]
        while it_stack:
            node, via_edge, it = it_stack[-1]
            advanced = False
            for nxt, eidx in it:
                if eidx == via_edge:
                    continue
                if nxt not in disc:
                    edge_stack.append(eidx)
                    disc[nxt] = low[nxt] = counter
                    counter += 1
                    it_stack.append((nxt, eidx, iter(sorted(adj[nxt]))))
                    advanced = True
                    break
                if disc[nxt] < disc[node]:
                    edge_stack.append(eidx)
                    low[node] = min(low[node], disc[nxt])
            if not advanced:
                it_stack.pop()
                if it_stack:
                    parent, parent_edge, _ = it_stack[-1]
                    low[parent] = min(low[parent], low[node])
                    if low[node] >= disc[parent]:
                        group = []
                        while edge_stack and edge_stack[-1] != parent_edge:
                            top = edge_stack[-1]
                            te = pattern.edges[top]
                            # pop edges discovered strictly inside this block
                            if min(disc[te.src], disc[te.dst]) >= disc[parent]:
                                group.append(edge_stack.pop())
                            else:
                                break
                        # the tree edge into `node` closes the block
                        for k, stacked in enumerate(edge_stack):
                            pass
                        if edge_stack:
                            group.append(edge_stack.pop())
                        if group:
                            groups.append(sorted(group))

    for alias in sorted(pattern.nodes):
        if alias not in disc and adj[alias]:
            if alias in disc:
                continue
            dfs(alias)
    for i in loops:
        groups.append([i])
    groups.sort(key=lambda g: g[0])
    return groups


@dataclass
class GeneSet:
    """The genes of one pattern plus the articulation aliases they cut at."""

    genes: tuple["ViewPattern", ...]
    cut_points: frozenset[str]

    def __len__(self) -> int:
        return len(self.genes)

    def edge_multiset(self) -> tuple:
        """Multiset of gene edges, used by conservation checks."""
        out = []
        for g in self.genes:
            for e in g.pattern.edges:
                out.append((e.label, e.predicate.atoms))
        return tuple(sorted(out, key=repr))


def connected_order(pattern: PatternQuery) -> tuple[int, ...]:
    """A deterministic traversal order with weakly connected prefixes:
    start from edge 0, then repeatedly take the lowest-positioned edge
    touching an already visited alias."""
    remaining = set(range(len(pattern.edges)))
    order = [0]
    remaining.discard(0)
    visited = {pattern.edges[0].src, pattern.edges[0].dst}
    while remaining:
        nxt = min(
            i
            for i in remaining
            if pattern.edges[i].src in visited or pattern.edges[i].dst in visited
        )
        order.append(nxt)
        remaining.discard(nxt)
        visited.add(pattern.edges[nxt].src)
        visited.add(pattern.edges[nxt].dst)
    return tuple(order)


def split_genes(vp: "ViewPattern") -> GeneSet:
    """Split a view pattern into genes at its articulation points.

    Each gene keeps the parent aliases, labels and predicates verbatim, and
    orders its edges by their position in the parent traversal. A pattern
    without articulation points yields a single gene equal to itself.
    """
    from .views import ViewPattern

    pattern = vp.pattern
    cut = articulation_points(pattern)
    groups = _biconnected_edge_groups(pattern)
    position = {edge_idx: pos for pos, edge_idx in enumerate(vp.order)}
    genes = []
    for group in sorted(groups, key=lambda g: min(position[i] for i in g)):
        by_traversal = sorted(group, key=lambda i: position[i])
        sub_edges = [pattern.edges[i] for i in by_traversal]
        aliases = {e.src for e in sub_edges} | {e.dst for e in sub_edges}
        sub_nodes = [pattern.nodes[a] for a in sorted(aliases)]
        sub = PatternQuery(sub_nodes, sub_edges, weight=pattern.weight, name=pattern.name)
        genes.append(ViewPattern(sub, tuple(range(len(sub_edges)))))
    if not genes:
        raise GraphError("pattern produced no genes")
    return GeneSet(genes=tuple(genes), cut_points=frozenset(cut))
