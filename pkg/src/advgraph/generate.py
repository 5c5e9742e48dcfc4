"""Random instance generation: directed Erdos-Renyi graphs with permuted weights.

Each ordered node pair is sampled into the edge set independently; the start
and goal are the pair at the longest unweighted distance; nodes that cannot
reach the goal are pruned. Non-self-loop edges get the weight set {2, 4, 8}
(its first k powers of two in general) assigned as a uniformly random
permutation across the k graphs; non-goal self-loops cost 1 everywhere; red's
action graph is complete.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .bounds import bound_table
from .errors import GraphError
from .graphs import GraphSet, PositionGraph
from .model import Instance, RedActionGraph, build_joint


def _bfs_distances(n: int, out: dict[int, list[int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        p = queue.popleft()
        for q in out[p]:
            if q not in dist:
                dist[q] = dist[p] + 1
                queue.append(q)
    return dist


def _longest_pair(n: int, edges: set[tuple[int, int]]):
    out: dict[int, list[int]] = {p: [] for p in range(1, n + 1)}
    for i, j in sorted(edges):
        if i != j:
            out[i].append(j)
    best = None
    best_d = 0
    for s in range(1, n + 1):
        dist = _bfs_distances(n, out, s)
        for g in range(1, n + 1):
            if g != s and g in dist and dist[g] > best_d:
                best, best_d = (s, g), dist[g]
    return best


def random_instance(
    n_max: int,
    k: int = 3,
    edge_prob: float = 0.5,
    *,
    max_ammo: int,
    m_robots: int = 1,
    seed: int,
    include_self_loops: bool = True,
    max_retries: int = 32,
) -> Instance:
    """Sample a game instance; identical seeds give identical instances.

    Sampling that leaves no start-goal pair at finite distance is retried with
    a derived sub-seed up to ``max_retries`` times.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    weight_set = [2 ** (i + 1) for i in range(k)]
    for attempt in range(max_retries):
        rng = np.random.default_rng([int(seed) % 2**64, attempt])
        edges = set()
        for i in range(1, n_max + 1):
            for j in range(1, n_max + 1):
                if i == j and not include_self_loops:
                    continue
                if rng.random() < edge_prob:
                    edges.add((i, j))
        pair = _longest_pair(n_max, edges)
        if pair is None:
            continue
        start, goal = pair
        label = {start: 1, goal: n_max}
        rest = sorted(p for p in range(1, n_max + 1) if p not in (start, goal))
        free = sorted(set(range(1, n_max + 1)) - {1, n_max})
        label.update(dict(zip(rest, free)))
        edges = {(label[i], label[j]) for i, j in edges}
        edges.add((n_max, n_max))  # goal self-loop

        # keep only nodes that reach the goal, relabelling in order
        rin: dict[int, list[int]] = {p: [] for p in range(1, n_max + 1)}
        for i, j in edges:
            rin[j].append(i)
        keep = {n_max}
        stack = [n_max]
        while stack:
            p = stack.pop()
            for i in rin[p]:
                if i not in keep:
                    keep.add(i)
                    stack.append(i)
        relabel = {old: new for new, old in enumerate(sorted(keep), start=1)}
        n = len(keep)
        goal_id = relabel[n_max]
        kept_edges = sorted(
            (relabel[i], relabel[j]) for i, j in edges if i in keep and j in keep
        )

        weight_maps: list[dict[tuple[int, int], float]] = [{} for _ in range(k)]
        for i, j in kept_edges:
            if i == j == goal_id:
                values = [0.0] * k
            elif i == j:
                values = [1.0] * k
            else:
                values = [float(w) for w in rng.permutation(weight_set)]
            for g in range(k):
                weight_maps[g][(i, j)] = values[g]
        graphs = GraphSet(
            tuple(PositionGraph(n, goal_id, wm) for wm in weight_maps)
        )
        return Instance(
            graphs=graphs,
            red_graph=RedActionGraph.complete(k),
            robot_count=m_robots,
            max_ammo=max_ammo,
        )
    raise GraphError(
        f"no usable start-goal pair after {max_retries} sampling attempts (seed {seed})"
    )


def is_trivial(inst: Instance, gamma: float) -> bool:
    """True when the security bounds pin the value at the standard initial state."""
    joint, _ = build_joint(inst)
    table = bound_table(joint, gamma)
    s0 = joint.initial_state()
    return abs(table.upper_at(s0) - table.lower_at(s0)) <= 1e-9
