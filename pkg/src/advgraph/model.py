"""Game state, legal actions, deterministic dynamics, and the joint-graph reduction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from math import comb
from typing import NamedTuple

from .errors import GraphError, IllegalActionError, InvalidInstanceError
from .graphs import GraphSet, PositionGraph, validate


@dataclass(frozen=True)
class RedActionGraph:
    """Unweighted digraph over graph indices 1..K constraining red's switches."""

    node_count: int
    edges: frozenset[tuple[int, int]]
    _out: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        out: dict[int, list[int]] = {k: [] for k in range(1, self.node_count + 1)}
        for (a, b) in self.edges:
            if not (1 <= a <= self.node_count and 1 <= b <= self.node_count):
                raise GraphError(f"red edge ({a},{b}) outside 1..{self.node_count}")
            out[a].append(b)
        object.__setattr__(
            self, "_out", {k: tuple(sorted(v)) for k, v in out.items()}
        )

    @classmethod
    def complete(cls, k: int) -> "RedActionGraph":
        return cls(k, frozenset((a, b) for a in range(1, k + 1) for b in range(1, k + 1)))

    @property
    def is_complete(self) -> bool:
        return len(self.edges) == self.node_count**2

    def out_neighbors(self, index: int) -> tuple[int, ...]:
        return self._out[index]

    def diagnostics(self) -> list[str]:
        diags = []
        for k in range(1, self.node_count + 1):
            if (k, k) not in self.edges:
                diags.append(f"red graph: node {k} lacks a self-loop")
        # weak connectivity over the undirected closure
        seen = {1}
        stack = [1]
        und: dict[int, set[int]] = {k: set() for k in range(1, self.node_count + 1)}
        for a, b in self.edges:
            und[a].add(b)
            und[b].add(a)
        while stack:
            k = stack.pop()
            for j in und[k]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != self.node_count:
            diags.append("red graph: not weakly connected")
        return diags


class GameState(NamedTuple):
    """The Markov state: blue position, active graph index, remaining ammo."""

    position: int
    graph_index: int
    ammo: int


@dataclass(frozen=True)
class Instance:
    """A full game definition.

    ``graphs`` is the position graph set (the joint graph set after a
    multi-robot reduction, in which case ``joint_of`` records the original
    robot count and ``robot_count`` is 1).
    """

    graphs: GraphSet
    red_graph: RedActionGraph
    robot_count: int = 1
    max_ammo: int = 0
    discount: float = 1 - 1e-9
    joint_of: int | None = None

    @property
    def node_count(self) -> int:
        return self.graphs.node_count

    @property
    def goal(self) -> int:
        return self.graphs.goal

    @property
    def k(self) -> int:
        return self.graphs.k

    def initial_state(self) -> GameState:
        """The standard start: position 1 (all robots at node 1), graph 1, full ammo."""
        return GameState(1, 1, self.max_ammo)


def check_instance(inst: Instance) -> list[str]:
    """Diagnostics for instance-level invariants (graph set, red graph, scalars)."""
    diags = validate(inst.graphs)
    diags += inst.red_graph.diagnostics()
    if inst.red_graph.node_count != inst.graphs.k:
        diags.append(
            f"red graph has {inst.red_graph.node_count} nodes but the set has {inst.graphs.k} graphs"
        )
    if inst.robot_count < 1:
        diags.append(f"robot_count must be >= 1, got {inst.robot_count}")
    if inst.max_ammo < 0:
        diags.append(f"max_ammo must be >= 0, got {inst.max_ammo}")
    if not 0 < inst.discount <= 1:
        diags.append(f"discount must lie in (0,1], got {inst.discount}")
    return diags


def require_valid(inst: Instance) -> Instance:
    """Raise :class:`InvalidInstanceError` unless the instance validates cleanly."""
    diags = check_instance(inst)
    if diags:
        raise InvalidInstanceError(diags)
    return inst


def _check_state(state: GameState, inst: Instance) -> None:
    if not 1 <= state.position <= inst.node_count:
        raise IllegalActionError(f"position {state.position} outside 1..{inst.node_count}")
    if not 1 <= state.graph_index <= inst.k:
        raise IllegalActionError(f"graph index {state.graph_index} outside 1..{inst.k}")
    if not 0 <= state.ammo <= inst.max_ammo:
        raise IllegalActionError(f"ammo {state.ammo} outside 0..{inst.max_ammo}")


def blue_actions(state: GameState, inst: Instance) -> tuple[int, ...]:
    """Out-neighbors of the current position on the position graph, ascending."""
    _check_state(state, inst)
    return inst.graphs.graphs[0].out_neighbors(state.position)


def red_actions(state: GameState, inst: Instance) -> tuple[int, ...]:
    """Graphs red may select next: its out-neighbors, or only the current one at ammo 0."""
    _check_state(state, inst)
    if state.ammo == 0:
        return (state.graph_index,)
    return inst.red_graph.out_neighbors(state.graph_index)


def stage_cost(state: GameState, blue_action: int, inst: Instance) -> float:
    """Weight of the traversed edge on the graph active when the move is made."""
    if blue_action not in blue_actions(state, inst):
        raise IllegalActionError(
            f"blue action {blue_action} illegal at {tuple(state)}"
        )
    return inst.graphs.graph(state.graph_index).weights[(state.position, blue_action)]


def step(state: GameState, blue_action: int, red_action: int, inst: Instance) -> GameState:
    """Deterministic dynamics; ammo drops by one exactly when the graph changes."""
    if blue_action not in blue_actions(state, inst):
        raise IllegalActionError(f"blue action {blue_action} illegal at {tuple(state)}")
    if red_action not in red_actions(state, inst):
        raise IllegalActionError(f"red action {red_action} illegal at {tuple(state)}")
    ammo = state.ammo - 1 if red_action != state.graph_index else state.ammo
    return GameState(blue_action, red_action, ammo)


class StateSpace:
    """Deterministic enumeration of all states: position-major, then graph, then ammo."""

    def __init__(self, node_count: int, k: int, ammo_levels: int):
        self.node_count = node_count
        self.k = k
        self.ammo_levels = ammo_levels

    @classmethod
    def from_instance(cls, inst: Instance) -> "StateSpace":
        return cls(inst.node_count, inst.k, inst.max_ammo + 1)

    def __len__(self) -> int:
        return self.node_count * self.k * self.ammo_levels

    def index(self, state: GameState) -> int:
        p, k, a = state
        if not (
            1 <= p <= self.node_count and 1 <= k <= self.k and 0 <= a < self.ammo_levels
        ):
            raise IllegalActionError(f"state {tuple(state)} outside the space")
        return ((p - 1) * self.k + (k - 1)) * self.ammo_levels + a

    def decode(self, i: int) -> GameState:
        if not 0 <= i < len(self):
            raise IndexError(i)
        i, a = divmod(i, self.ammo_levels)
        p, k = divmod(i, self.k)
        return GameState(p + 1, k + 1, a)

    def __iter__(self):
        return (self.decode(i) for i in range(len(self)))


def enumerate_states(inst: Instance) -> tuple[list[GameState], StateSpace]:
    """All states in canonical order plus the bijective index."""
    space = StateSpace.from_instance(inst)
    return list(space), space


def _joint_nodes(n: int, m: int) -> list[tuple[int, ...]]:
    # multisets as sorted tuples, in lexicographic order; (1,..,1) first, (n,..,n) last
    return list(itertools.combinations_with_replacement(range(1, n + 1), m))


def build_joint(inst: Instance):
    """Reduce an M-robot game to a single-robot game on the joint state graph.

    Joint nodes are multisets of robot positions (robots are indistinguishable),
    and the joint weight of a move is the cheapest assignment of per-robot moves
    realizing the target multiset. Returns ``(joint_instance, decode)`` where
    ``decode`` maps joint node ids to sorted position tuples. M=1 passes through.
    """
    m = inst.robot_count
    if m == 1:
        return inst, {p: (p,) for p in range(1, inst.node_count + 1)}
    n = inst.node_count
    nodes = _joint_nodes(n, m)
    assert len(nodes) == comb(n + m - 1, m)
    node_id = {u: i for i, u in enumerate(nodes, start=1)}
    base = inst.graphs.graphs[0]
    kk = inst.k
    weight_maps: list[dict[tuple[int, int], float]] = [{} for _ in range(kk)]
    for u in nodes:
        uid = node_id[u]
        move_sets = [base.out_neighbors(p) for p in u]
        for assignment in itertools.product(*move_sets):
            v = tuple(sorted(assignment))
            vid = node_id[v]
            for g in range(kk):
                w = inst.graphs.graphs[g].weights
                cost = sum(w[(p, q)] for p, q in zip(u, assignment))
                key = (uid, vid)
                cur = weight_maps[g].get(key)
                if cur is None or cost < cur:
                    weight_maps[g][key] = cost
    goal_id = node_id[(inst.goal,) * m]
    assert goal_id == len(nodes)
    graphs = GraphSet(
        tuple(PositionGraph(len(nodes), goal_id, wm) for wm in weight_maps)
    )
    joint = replace(inst, graphs=graphs, robot_count=1, joint_of=m)
    decode = {node_id[u]: u for u in nodes}
    return joint, decode
