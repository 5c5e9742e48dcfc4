"""Weighted digraph primitives: storage, shortest paths, aggregate graphs, pruning.

Nodes are 1-based and the goal is by convention the highest node id. All graph
values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import GraphError

Edge = tuple[int, int]


@dataclass(frozen=True)
class PositionGraph:
    """A weighted digraph the blue robots move on.

    ``weights`` maps each directed edge to its nonnegative traversal cost; the
    edge set is exactly ``weights.keys()``. The goal node carries a zero-cost
    self-loop so robots that arrive can stay for free.
    """

    node_count: int
    goal: int
    weights: dict[Edge, float]
    _out: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphError(f"node_count must be positive, got {self.node_count}")
        if not 1 <= self.goal <= self.node_count:
            raise GraphError(f"goal {self.goal} outside 1..{self.node_count}")
        out: dict[int, list[int]] = {p: [] for p in range(1, self.node_count + 1)}
        for (i, j) in self.weights:
            if not (1 <= i <= self.node_count and 1 <= j <= self.node_count):
                raise GraphError(f"edge ({i},{j}) outside 1..{self.node_count}")
            out[i].append(j)
        object.__setattr__(
            self, "_out", {p: tuple(sorted(qs)) for p, qs in out.items()}
        )

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.weights))

    def out_neighbors(self, node: int) -> tuple[int, ...]:
        """Out-neighbors of ``node`` in ascending order."""
        self._check_node(node)
        return self._out[node]

    def weight(self, i: int, j: int) -> float:
        return self.weights[(i, j)]

    def _check_node(self, node: int) -> None:
        if not 1 <= node <= self.node_count:
            raise GraphError(f"node {node} outside 1..{self.node_count}")


@dataclass(frozen=True)
class GraphSet:
    """An ordered family of K graphs sharing nodes and edges, differing in weights."""

    graphs: tuple[PositionGraph, ...]

    def __post_init__(self):
        if len(self.graphs) < 1:
            raise GraphError("a GraphSet needs at least one graph")
        object.__setattr__(self, "graphs", tuple(self.graphs))

    @property
    def k(self) -> int:
        return len(self.graphs)

    @property
    def node_count(self) -> int:
        return self.graphs[0].node_count

    @property
    def goal(self) -> int:
        return self.graphs[0].goal

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.graphs[0].edges

    def graph(self, index: int) -> PositionGraph:
        """The graph with 1-based index ``index``."""
        if not 1 <= index <= self.k:
            raise GraphError(f"graph index {index} outside 1..{self.k}")
        return self.graphs[index - 1]


def shortest_distance(graph: PositionGraph, src: int, dst: int) -> float:
    """Minimum total weight over directed paths src -> dst; inf if unreachable."""
    graph._check_node(src)
    graph._check_node(dst)
    if src == dst:
        return 0.0
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, p = heapq.heappop(heap)
        if p == dst:
            return d
        if d > dist.get(p, math.inf):
            continue
        for q in graph.out_neighbors(p):
            nd = d + graph.weights[(p, q)]
            if nd < dist.get(q, math.inf):
                dist[q] = nd
                heapq.heappush(heap, (nd, q))
    return math.inf


def distances_to(graph: PositionGraph, dst: int) -> dict[int, float]:
    """Shortest distance from every node to ``dst`` (single reverse Dijkstra)."""
    graph._check_node(dst)
    rin: dict[int, list[tuple[int, float]]] = {
        p: [] for p in range(1, graph.node_count + 1)
    }
    for (i, j), w in graph.weights.items():
        rin[j].append((i, w))
    dist = {p: math.inf for p in range(1, graph.node_count + 1)}
    dist[dst] = 0.0
    heap = [(0.0, dst)]
    while heap:
        d, p = heapq.heappop(heap)
        if d > dist[p]:
            continue
        for i, w in rin[p]:
            nd = d + w
            if nd < dist[i]:
                dist[i] = nd
                heapq.heappush(heap, (nd, i))
    return dist


def _aggregate(gset: GraphSet, pick) -> PositionGraph:
    base = gset.graphs[0]
    weights = {
        e: pick(g.weights[e] for g in gset.graphs) for e in base.weights
    }
    return PositionGraph(base.node_count, base.goal, weights)


def highest_cost_graph(gset: GraphSet) -> PositionGraph:
    """Elementwise maximum of the edge weights over the set."""
    return _aggregate(gset, max)


def best_case_graph(gset: GraphSet) -> PositionGraph:
    """Elementwise minimum of the edge weights over the set."""
    return _aggregate(gset, min)


def _goal_reachers(node_count: int, goal: int, edges) -> set[int]:
    rin: dict[int, list[int]] = {p: [] for p in range(1, node_count + 1)}
    for i, j in edges:
        rin[j].append(i)
    seen = {goal}
    stack = [goal]
    while stack:
        p = stack.pop()
        for i in rin[p]:
            if i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def prune_unreachable(graph_or_set):
    """Drop every node that cannot reach the goal, relabelling the rest 1..N'.

    Returns ``(pruned, mapping)`` where ``mapping`` sends old node ids to new
    ones. Relabelling preserves order, so the goal stays the highest id.
    """
    single = isinstance(graph_or_set, PositionGraph)
    gset = GraphSet((graph_or_set,)) if single else graph_or_set
    keep = _goal_reachers(gset.node_count, gset.goal, gset.edges)
    if gset.goal not in keep:
        raise GraphError("goal node would be pruned")
    mapping = {old: new for new, old in enumerate(sorted(keep), start=1)}
    new_goal = mapping[gset.goal]
    graphs = []
    for g in gset.graphs:
        weights = {
            (mapping[i], mapping[j]): w
            for (i, j), w in g.weights.items()
            if i in keep and j in keep
        }
        graphs.append(PositionGraph(len(keep), new_goal, weights))
    pruned = GraphSet(tuple(graphs))
    return (pruned.graphs[0] if single else pruned), mapping


def validate(gset: GraphSet) -> list[str]:
    """Diagnostics for every violated invariant; empty iff the set is valid."""
    diags: list[str] = []
    base = gset.graphs[0]
    n, goal = base.node_count, base.goal
    if goal != n:
        diags.append(f"goal {goal} is not the highest node id {n}")
    for k, g in enumerate(gset.graphs, start=1):
        if (g.node_count, g.goal) != (n, goal):
            diags.append(f"graph {k}: node count or goal differs from graph 1")
        if g.edges != base.edges:
            diags.append(f"graph {k}: edge sets differ from graph 1")
        if (goal, goal) not in g.weights:
            diags.append(f"graph {k}: goal self-loop ({goal},{goal}) missing")
        elif g.weights[(goal, goal)] != 0:
            diags.append(f"graph {k}: goal self-loop must cost 0, got {g.weights[(goal, goal)]}")
        for e, w in g.weights.items():
            if w < 0:
                diags.append(f"graph {k}: edge {e} has negative weight {w}")
        for p in range(1, g.node_count + 1):
            if p != goal and not g.out_neighbors(p):
                diags.append(f"graph {k}: node {p} has no outgoing edge")
    reachers = _goal_reachers(n, goal, base.edges)
    for p in range(1, n + 1):
        if p not in reachers:
            diags.append(f"node {p} cannot reach the goal {goal}")
    return diags
