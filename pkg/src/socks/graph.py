"""Dependency graph over block IDs and the ordering rules derived from it.

Edges run from a dependency to its dependent (``u -> v`` iff ``v`` consumes
``u``'s block package).  Building and configuring walk the graph forward
(dependencies first); cleaning walks it in exact reverse so the most
fundamental blocks are torn down last.
"""

from __future__ import annotations

import glob as globlib
import heapq
from dataclasses import dataclass, field
from urllib.parse import urlparse

from .errors import CycleError, GraphError
from .validation import BlockSpec

ALL = "all"


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset[str]
    # dep -> set of dependents
    edges: dict[str, frozenset[str]]

    def dependencies_of(self, block_id: str) -> set[str]:
        return {u for u, vs in self.edges.items() if block_id in vs}

    def all_edges(self) -> set[tuple[str, str]]:
        return {(u, v) for u, vs in self.edges.items() for v in vs}


@dataclass(frozen=True)
class Invocation:
    target: str  # block id or ALL
    command: str
    group: bool = False
    options: dict = field(default_factory=dict)


def _is_external_ref(ref: str) -> bool:
    scheme = urlparse(ref).scheme
    return scheme in ("http", "https", "file")


def build_graph(blocks: dict[str, BlockSpec],
                project_dir=None) -> DependencyGraph:
    """Derive the graph from each block's dependencies section.

    A dependency entry naming a configured block creates an edge.  Entries
    pointing at external sources (URLs, or local files that already exist)
    create no edge; anything else is unsatisfiable and rejected.
    """
    edges: dict[str, set[str]] = {bid: set() for bid in blocks}
    for block_id, spec in blocks.items():
        for dep_id, ref in spec.dependencies.items():
            if dep_id in blocks:
                edges[dep_id].add(block_id)
            elif _is_external_ref(ref):
                continue
            else:
                pattern = ref if project_dir is None else str(project_dir / ref)
                if not globlib.glob(pattern):
                    raise GraphError(
                        f"block '{block_id}' depends on '{dep_id}', which is "
                        f"neither a configured block nor an importable "
                        f"package ({ref!r} matches nothing)")
    graph = DependencyGraph(nodes=frozenset(blocks),
                            edges={u: frozenset(vs) for u, vs in edges.items()})
    cycle = _find_cycle(graph)
    if cycle:
        raise CycleError("dependency cycle: " + " -> ".join(cycle), cycle)
    return graph


def _find_cycle(graph: DependencyGraph) -> list[str]:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in graph.nodes}
    stack: list[str] = []

    def dfs(node: str) -> list[str] | None:
        color[node] = GRAY
        stack.append(node)
        for succ in sorted(graph.edges.get(node, ())):
            if color[succ] == GRAY:
                return stack[stack.index(succ):] + [succ]
            if color[succ] == WHITE:
                found = dfs(succ)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for start in sorted(graph.nodes):
        if color[start] == WHITE:
            found = dfs(start)
            if found:
                return found
    return []


def compute_active_set(graph: DependencyGraph, inv: Invocation) -> set[str]:
    """Blocks addressed by the invocation.

    ``all`` selects every node; otherwise the named block, plus its
    transitive dependencies when the group flag is set.
    """
    if inv.target == ALL:
        return set(graph.nodes)
    if inv.target not in graph.nodes:
        valid = ", ".join(sorted(graph.nodes))
        raise GraphError(f"unknown block '{inv.target}' (valid: {valid})")
    if not inv.group:
        return {inv.target}
    active = {inv.target}
    frontier = [inv.target]
    while frontier:
        node = frontier.pop()
        for dep in graph.dependencies_of(node):
            if dep not in active:
                active.add(dep)
                frontier.append(dep)
    return active


# Verb categories steering the execution order.  Cleaning runs in reverse
# topological order; everything else dependencies-first.
REVERSED_CATEGORIES = ("cleaning",)


def topological_order(graph: DependencyGraph, active: set[str]) -> list[str]:
    """Dependencies-first linearization of ``active``; ties broken by block id."""
    unknown = active - graph.nodes
    if unknown:
        raise GraphError(f"active set contains unknown blocks: {sorted(unknown)}")
    indeg = {n: 0 for n in active}
    succs: dict[str, list[str]] = {n: [] for n in active}
    for u, vs in graph.edges.items():
        if u not in active:
            continue
        for v in vs:
            if v in active:
                indeg[v] += 1
                succs[u].append(v)
    ready = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for succ in succs[node]:
            indeg[succ] -= 1
            if indeg[succ] == 0:
                heapq.heappush(ready, succ)
    return order


def order_for_command(active: set[str], category: str,
                      graph: DependencyGraph) -> list[str]:
    order = topological_order(graph, active)
    if category in REVERSED_CATEGORIES:
        return list(reversed(order))
    return order
