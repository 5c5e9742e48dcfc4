"""Security strategies and value bounds for both players, plus the discount threshold.

The blue bound plays greedily against the highest-cost graph and upper-bounds
the game value from any state; the red bound assumes a single immediate switch
and lower-bounds it whenever the discount factor clears the threshold. Both are
exact for single-robot games; for joint-reduced games they are computed on the
joint graph and flagged as heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleConditionError
from .graphs import distances_to, highest_cost_graph
from .model import GameState, Instance, StateSpace, blue_actions, red_actions


def gamma_threshold(inst: Instance) -> float:
    """Smallest discount factor guaranteeing goal-reaching equilibrium play.

    Equals ``1 - C_min / d_max`` with ``C_min`` the cheapest non-goal-loop edge
    across all graphs and ``d_max`` the worst distance to goal on the
    highest-cost graph. Every such edge must cost strictly more than zero.
    """
    goal = inst.goal
    c_min = math.inf
    for g in inst.graphs.graphs:
        for (i, j), w in g.weights.items():
            if (i, j) == (goal, goal):
                continue
            c_min = min(c_min, w)
    if c_min <= 0:
        raise InfeasibleConditionError(
            "a non-goal edge has zero cost on some graph; the threshold assumes "
            "strictly positive stage costs"
        )
    dist = distances_to(highest_cost_graph(inst.graphs), goal)
    d_max = max(dist.values())
    if not math.isfinite(d_max):
        raise InfeasibleConditionError("some node cannot reach the goal")
    if d_max == 0.0 or math.isinf(c_min):
        return 0.0
    return 1.0 - min(c_min / d_max, 1.0)


def _security_exponent(inst: Instance, exponent: int | None) -> int:
    # printed bound uses gamma^(N-1); the proof sketch argues N-2, kept as a knob
    return inst.node_count - 1 if exponent is None else exponent


def blue_security(state: GameState, inst: Instance) -> tuple[int, float]:
    """Blue's secure move and cost ceiling: current edge plus highest-cost distance."""
    dbar = distances_to(highest_cost_graph(inst.graphs), inst.goal)
    w = inst.graphs.graph(state.graph_index).weights
    best_action, best = None, math.inf
    for q in blue_actions(state, inst):
        cand = w[(state.position, q)] + dbar[q]
        if cand < best:
            best_action, best = q, cand
    return best_action, best


def red_security(
    state: GameState, inst: Instance, gamma: float, exponent: int | None = None
) -> tuple[int, float]:
    """Red's secure switch and cost floor, assuming it never switches again."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0,1], got {gamma}")
    power = gamma ** _security_exponent(inst, exponent)
    w = inst.graphs.graph(state.graph_index).weights
    moves = blue_actions(state, inst)
    best_action, best = None, -math.inf
    for kp in red_actions(state, inst):
        dk = distances_to(inst.graphs.graph(kp), inst.goal)
        reply = min(w[(state.position, q)] + power * dk[q] for q in moves)
        if reply > best:
            best_action, best = kp, reply
    return best_action, best


@dataclass(frozen=True)
class BoundTable:
    """Per-state value bounds ``lower <= V <= upper`` plus the discount threshold."""

    space: StateSpace
    lower: np.ndarray
    upper: np.ndarray
    gamma: float
    threshold: float
    heuristic: bool

    def lower_at(self, state: GameState) -> float:
        return float(self.lower[self.space.index(state)])

    def upper_at(self, state: GameState) -> float:
        return float(self.upper[self.space.index(state)])


def bound_table(
    inst: Instance, gamma: float, exponent: int | None = None
) -> BoundTable:
    """Evaluate both security bounds at every enumerated state."""
    space = StateSpace.from_instance(inst)
    n, kk = inst.node_count, inst.k
    goal = inst.goal
    power = gamma ** _security_exponent(inst, exponent)
    dbar = distances_to(highest_cost_graph(inst.graphs), goal)
    dists = [distances_to(g, goal) for g in inst.graphs.graphs]
    base = inst.graphs.graphs[0]

    upper_pk = np.empty((n, kk))
    reply_pk = np.empty((n, kk, kk))  # blue's best reply given current k, next kp
    for p in range(1, n + 1):
        moves = base.out_neighbors(p)
        for k in range(1, kk + 1):
            w = inst.graphs.graph(k).weights
            upper_pk[p - 1, k - 1] = min(w[(p, q)] + dbar[q] for q in moves)
            for kp in range(1, kk + 1):
                reply_pk[p - 1, k - 1, kp - 1] = min(
                    w[(p, q)] + power * dists[kp - 1][q] for q in moves
                )

    lower = np.empty(len(space))
    upper = np.empty(len(space))
    for i in range(len(space)):
        p, k, a = space.decode(i)
        upper[i] = upper_pk[p - 1, k - 1]
        choices = (k,) if a == 0 else inst.red_graph.out_neighbors(k)
        lower[i] = max(reply_pk[p - 1, k - 1, kp - 1] for kp in choices)
    return BoundTable(
        space=space,
        lower=lower,
        upper=upper,
        gamma=gamma,
        threshold=gamma_threshold(inst),
        heuristic=inst.joint_of is not None,
    )
