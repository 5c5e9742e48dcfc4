"""Shapley value iteration: equilibrium values, mixed policies, and reductions.

Two interchangeable solve modes are provided. ``shapley_solve`` runs synchronous
(Jacobi) sweeps over the whole state space; ``solve_by_subgames`` solves one
sub-game per (graph, ammo) pair in ascending ammo order, treating red's switch
moves as terminal payments into already-solved layers. Both converge to the
same fixpoint; the layered mode is the default since each layer has a short
effective horizon even when the discount factor is nearly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from . import matrixgame
from .bounds import bound_table
from .errors import IllegalActionError
from .graphs import GraphSet, PositionGraph, prune_unreachable
from .model import (
    GameState,
    Instance,
    StateSpace,
    build_joint,
    require_valid,
)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class Solution:
    """Equilibrium values and per-state mixed policies for both players."""

    space: StateSpace
    values: np.ndarray
    blue_supports: list[tuple[int, ...]]
    blue_probs: list[np.ndarray]
    red_supports: list[tuple[int, ...]]
    red_probs: list[np.ndarray]
    iterations: int
    residual: float
    converged: bool
    gamma: float
    tol: float
    mode: str

    def value_at(self, state: GameState) -> float:
        return float(self.values[self.space.index(state)])

    def blue_policy_at(self, state: GameState):
        i = self.space.index(state)
        return self.blue_supports[i], self.blue_probs[i]

    def red_policy_at(self, state: GameState):
        i = self.space.index(state)
        return self.red_supports[i], self.red_probs[i]


class CompiledGame:
    """Flattened successor indices and stage costs for fast sweeps."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.space = StateSpace.from_instance(inst)
        base = inst.graphs.graphs[0]
        n, kk, levels = inst.node_count, inst.k, inst.max_ammo + 1
        self.moves = [base.out_neighbors(p) for p in range(1, n + 1)]
        self.costs = [
            [
                np.array([g.weights[(p, q)] for q in self.moves[p - 1]])
                for g in inst.graphs.graphs
            ]
            for p in range(1, n + 1)
        ]
        red_nbrs = [inst.red_graph.out_neighbors(k) for k in range(1, kk + 1)]
        self.reds: list[tuple[int, ...]] = []
        self.succ: list[np.ndarray] = []
        self.cost_vec: list[np.ndarray] = []
        for i in range(len(self.space)):
            p, k, a = self.space.decode(i)
            reds = (k,) if a == 0 else red_nbrs[k - 1]
            cols = self.moves[p - 1]
            succ = np.empty((len(reds), len(cols)), dtype=np.intp)
            for r, kp in enumerate(reds):
                ap = a - 1 if kp != k else a
                for c, q in enumerate(cols):
                    succ[r, c] = ((q - 1) * kk + (kp - 1)) * levels + ap
            self.reds.append(reds)
            self.succ.append(succ)
            self.cost_vec.append(self.costs[p - 1][k - 1])

    def q_matrix(self, i: int, values: np.ndarray, gamma: float) -> np.ndarray:
        return self.cost_vec[i] + gamma * values[self.succ[i]]

    def extract_policies(self, values: np.ndarray, gamma: float):
        blue_probs, red_probs = [], []
        blue_supports, red_supports = [], []
        for i in range(len(self.space)):
            _, red, blue = matrixgame._solve_array(self.q_matrix(i, values, gamma))
            p, _, _ = self.space.decode(i)
            blue_supports.append(self.moves[p - 1])
            red_supports.append(self.reds[i])
            blue_probs.append(blue)
            red_probs.append(red)
        return blue_supports, blue_probs, red_supports, red_probs


def q_matrix(
    state: GameState, value_snapshot, inst: Instance, gamma: float
) -> np.ndarray:
    """The stage game at ``state``: rows are red switches, columns blue moves.

    ``value_snapshot`` maps (or indexes) every state to its current value
    estimate; entry (r, b) is the stage cost plus the discounted value of the
    successor under that action pair.
    """
    space = StateSpace.from_instance(inst)
    if not isinstance(value_snapshot, np.ndarray):
        values = np.empty(len(space))
        for i in range(len(space)):
            values[i] = value_snapshot[space.decode(i)]
    else:
        values = value_snapshot
    compiled = CompiledGame(inst)
    return compiled.q_matrix(space.index(state), values, gamma)


def _finish(compiled, values, gamma, iterations, residual, converged, tol, mode):
    blue_s, blue_p, red_s, red_p = compiled.extract_policies(values, gamma)
    return Solution(
        space=compiled.space,
        values=values,
        blue_supports=blue_s,
        blue_probs=blue_p,
        red_supports=red_s,
        red_probs=red_p,
        iterations=iterations,
        residual=residual,
        converged=converged,
        gamma=gamma,
        tol=tol,
        mode=mode,
    )


def shapley_solve(
    inst: Instance,
    gamma: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    v0: np.ndarray | None = None,
) -> Solution:
    """Synchronous value iteration over all states until the sup-norm change <= tol.

    Exhausting ``max_iter`` returns a solution flagged as non-converged rather
    than raising. ``v0`` optionally warm-starts the value table.
    """
    if gamma is None:
        gamma = inst.discount
    compiled = CompiledGame(inst)
    size = len(compiled.space)
    values = np.zeros(size) if v0 is None else np.asarray(v0, dtype=float).copy()
    residual = math.inf
    iterations = 0
    value_only = matrixgame._value_only
    while iterations < max_iter:
        new = np.empty(size)
        for i in range(size):
            new[i] = value_only(compiled.cost_vec[i] + gamma * values[compiled.succ[i]])
        residual = float(np.max(np.abs(new - values)))
        values = new
        iterations += 1
        if residual <= tol:
            break
    converged = residual <= tol
    return _finish(compiled, values, gamma, iterations, residual, converged, tol, "full")


def solve_by_subgames(
    inst: Instance,
    gamma: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Solution:
    """Solve K*(ammo+1) position-space sub-games in ascending ammo order.

    Within the (graph k, ammo a) layer, red's switch to k' != k is a terminal
    move paying the discounted value of the already-solved (k', a-1) layer; only
    the keep-graph row couples states inside the layer. The assembled solution
    matches ``shapley_solve`` at every state up to iteration tolerance.
    """
    if gamma is None:
        gamma = inst.discount
    compiled = CompiledGame(inst)
    n, kk, levels = inst.node_count, inst.k, inst.max_ammo + 1
    layer = np.zeros((kk, levels, n))
    red_nbrs = [inst.red_graph.out_neighbors(k) for k in range(1, kk + 1)]
    total_sweeps = 0
    worst_residual = 0.0
    converged = True
    value_only = matrixgame._value_only
    for a in range(levels):
        for k in range(1, kk + 1):
            reds = (k,) if a == 0 else red_nbrs[k - 1]
            keep_row = reds.index(k)
            # rows for k' != k are constant throughout the layer
            fixed = []
            for p in range(1, n + 1):
                cols = compiled.moves[p - 1]
                cost = compiled.costs[p - 1][k - 1]
                rows = np.empty((len(reds), len(cols)))
                for r, kp in enumerate(reds):
                    if kp == k:
                        continue
                    rows[r] = cost + gamma * layer[kp - 1, a - 1][
                        np.array(cols) - 1
                    ]
                fixed.append(rows)
            targets = [np.array(compiled.moves[p - 1]) - 1 for p in range(1, n + 1)]
            v = np.zeros(n)
            residual = math.inf
            sweeps = 0
            while sweeps < max_iter:
                new = np.empty(n)
                for p in range(n):
                    q = fixed[p]
                    q[keep_row] = compiled.costs[p][k - 1] + gamma * v[targets[p]]
                    new[p] = value_only(q)
                residual = float(np.max(np.abs(new - v)))
                v = new
                sweeps += 1
                if residual <= tol:
                    break
            layer[k - 1, a] = v
            total_sweeps += sweeps
            worst_residual = max(worst_residual, residual)
            converged = converged and residual <= tol

    values = np.empty(len(compiled.space))
    for i in range(len(compiled.space)):
        p, k, a = compiled.space.decode(i)
        values[i] = layer[k - 1, a, p - 1]
    return _finish(
        compiled, values, gamma, total_sweeps, worst_residual, converged, tol, "subgame"
    )


@dataclass(frozen=True)
class RemovedEdge:
    """A pruned blue move with its domination certificate (original labels)."""

    tail: int
    head: int
    dominated_by: int
    margin: float


@dataclass(frozen=True)
class PruneReport:
    removed: tuple[RemovedEdge, ...]
    node_map: dict[int, int]  # original node id -> final id; absent if pruned
    passes: int


def _dominated_pairs(inst: Instance, gamma: float, table) -> list[RemovedEdge]:
    base = inst.graphs.graphs[0]
    kk, levels = inst.k, inst.max_ammo + 1
    found = []
    for p0 in range(1, inst.node_count + 1):
        moves = base.out_neighbors(p0)
        for p1 in moves:
            for p2 in moves:
                if p2 == p1:
                    continue
                margin = math.inf
                for k in range(1, kk + 1):
                    w1 = inst.graphs.graph(k).weights[(p0, p1)]
                    w2 = inst.graphs.graph(k).weights[(p0, p2)]
                    for a in range(levels):
                        reds = (
                            (k,)
                            if a == 0
                            else inst.red_graph.out_neighbors(k)
                        )
                        for ar in reds:
                            ap = a - 1 if ar != k else a
                            lhs = w1 + gamma * table.lower_at(GameState(p1, ar, ap))
                            rhs = w2 + gamma * table.upper_at(GameState(p2, ar, ap))
                            margin = min(margin, lhs - rhs)
                            if margin <= 0:
                                break
                        if margin <= 0:
                            break
                    if margin <= 0:
                        break
                if margin > 0:
                    found.append(RemovedEdge(p0, p1, p2, margin))
                    break
    return found


def prune_dominated(
    inst: Instance, gamma: float | None = None, exponent: int | None = None
):
    """Remove blue moves certified never-beneficial by the security bounds.

    A move is dropped when some sibling move is strictly cheaper against every
    red reply even when the kept move is charged its upper bound and the
    dropped one credited its lower bound. Bounds are recomputed once per outer
    pass; nodes cut off from the goal are pruned and relabelled. Returns the
    reduced instance and a report in original node labels.
    """
    if gamma is None:
        gamma = inst.discount
    cur = inst
    orig_of = {p: p for p in range(1, inst.node_count + 1)}
    removed: list[RemovedEdge] = []
    passes = 0
    while True:
        passes += 1
        table = bound_table(cur, gamma, exponent)
        hits = _dominated_pairs(cur, gamma, table)
        if not hits:
            break
        drop = {(e.tail, e.head) for e in hits}
        base = cur.graphs.graphs[0]
        for p0 in {e.tail for e in hits}:
            left = [q for q in base.out_neighbors(p0) if (p0, q) not in drop]
            if not left:
                raise AssertionError(
                    f"domination pruning would strip node {orig_of[p0]} of all moves"
                )
        removed.extend(
            RemovedEdge(orig_of[e.tail], orig_of[e.head], orig_of[e.dominated_by], e.margin)
            for e in hits
        )
        graphs = GraphSet(
            tuple(
                PositionGraph(
                    g.node_count,
                    g.goal,
                    {e: w for e, w in g.weights.items() if e not in drop},
                )
                for g in cur.graphs.graphs
            )
        )
        pruned, mapping = prune_unreachable(graphs)
        cur = replace(cur, graphs=pruned)
        orig_of = {new: orig_of[old] for old, new in mapping.items()}
    node_map = {orig: new for new, orig in orig_of.items()}
    return cur, PruneReport(tuple(removed), node_map, passes)


class ShapleySolver(BaseEstimator):
    """Estimator-style front end to the equilibrium solver.

    Parameters mirror the functional API; ``fit(instance)`` validates the
    instance, reduces multi-robot games to the joint graph, optionally applies
    domination pruning, and solves. Fitted attributes: ``solution_``,
    ``instance_`` (the game actually solved), ``joint_map_`` (final node id ->
    robot position tuple) and ``prune_report_`` when pruning ran.
    """

    def __init__(
        self,
        gamma: float | None = None,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
        mode: str = "subgame",
        prune: bool = False,
        warm_start_bounds: bool = False,
    ):
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.mode = mode
        self.prune = prune
        self.warm_start_bounds = warm_start_bounds

    def fit(self, instance: Instance, y=None):
        require_valid(instance)
        if self.mode not in ("full", "subgame"):
            raise ValueError(f"mode must be 'full' or 'subgame', got {self.mode!r}")
        gamma = instance.discount if self.gamma is None else self.gamma
        inst, decode = build_joint(instance)
        self.prune_report_ = None
        if self.prune:
            inst, report = prune_dominated(inst, gamma)
            self.prune_report_ = report
            decode = {
                new: decode[orig] for orig, new in report.node_map.items()
            }
        if self.mode == "subgame":
            self.solution_ = solve_by_subgames(inst, gamma, self.tol, self.max_iter)
        else:
            v0 = None
            if self.warm_start_bounds:
                v0 = bound_table(inst, gamma).upper
            self.solution_ = shapley_solve(inst, gamma, self.tol, self.max_iter, v0=v0)
        self.instance_ = inst
        self.joint_map_ = decode
        return self

    def _require_fitted(self):
        if not hasattr(self, "solution_"):
            raise IllegalActionError("solver is not fitted; call fit(instance) first")

    def value_at(self, state: GameState) -> float:
        self._require_fitted()
        return self.solution_.value_at(state)

    def predict_proba(self, state: GameState):
        """Blue's equilibrium mixed action at ``state`` as (actions, probabilities)."""
        self._require_fitted()
        return self.solution_.blue_policy_at(state)

    def predict(self, state: GameState) -> int:
        """Blue's modal equilibrium action; ties break to the lowest node id."""
        actions, probs = self.predict_proba(state)
        return actions[int(np.argmax(probs))]
