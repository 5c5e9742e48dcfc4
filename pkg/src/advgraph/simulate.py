"""Play the game under arbitrary policy pairs.

Provides seeded Monte Carlo rollouts, exact evaluation of the Markov chain a
fixed policy pair induces, goal-reaching probabilities, and the baseline
policies used for comparisons (security strategies, best-case-graph following,
never-switching red, uniform play).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import blue_security, red_security
from .errors import PolicyContractError
from .graphs import best_case_graph, distances_to
from .model import (
    GameState,
    Instance,
    StateSpace,
    blue_actions,
    red_actions,
    stage_cost,
    step,
)
from .solver import Solution


def default_horizon(inst: Instance) -> int:
    """Generous rollout horizon relative to the absorbing-chain mixing scale."""
    return 10 * inst.node_count * (inst.max_ammo + 1)


class EquilibriumPolicy:
    """Plays the mixed strategies stored in a solved game."""

    def __init__(self, solution: Solution, side: str):
        if side not in ("blue", "red"):
            raise ValueError(f"side must be 'blue' or 'red', got {side!r}")
        self.side = side
        self.solution = solution

    def distribution(self, state: GameState):
        if self.side == "blue":
            return self.solution.blue_policy_at(state)
        return self.solution.red_policy_at(state)


class BlueSecurityPolicy:
    """Deterministic blue play from the highest-cost-graph bound."""

    side = "blue"

    def __init__(self, inst: Instance):
        self.inst = inst
        self._cache: dict[tuple[int, int], int] = {}

    def distribution(self, state: GameState):
        key = (state.position, state.graph_index)
        action = self._cache.get(key)
        if action is None:
            action, _ = blue_security(state, self.inst)
            self._cache[key] = action
        return (action,), np.array([1.0])


class RedSecurityPolicy:
    """Deterministic red play from the single-switch bound."""

    side = "red"

    def __init__(self, inst: Instance, gamma: float, exponent: int | None = None):
        self.inst = inst
        self.gamma = gamma
        self.exponent = exponent
        self._cache: dict[tuple[int, int, bool], int] = {}

    def distribution(self, state: GameState):
        key = (state.position, state.graph_index, state.ammo > 0)
        action = self._cache.get(key)
        if action is None:
            action, _ = red_security(state, self.inst, self.gamma, self.exponent)
            self._cache[key] = action
        return (action,), np.array([1.0])


class NaiveBestCasePolicy:
    """Blue follows, from its current node, a shortest path on the best-case graph."""

    side = "blue"

    def __init__(self, inst: Instance):
        self.inst = inst
        best = best_case_graph(inst.graphs)
        dist = distances_to(best, inst.goal)
        self._action = {}
        for p in range(1, inst.node_count + 1):
            moves = best.out_neighbors(p)
            self._action[p] = min(
                moves, key=lambda q: (best.weights[(p, q)] + dist[q], q)
            )

    def distribution(self, state: GameState):
        return (self._action[state.position],), np.array([1.0])


class RedNeverSwitchPolicy:
    side = "red"

    def distribution(self, state: GameState):
        return (state.graph_index,), np.array([1.0])


class UniformRandomPolicy:
    """Uniform over the legal action set of the given side."""

    def __init__(self, inst: Instance, side: str):
        if side not in ("blue", "red"):
            raise ValueError(f"side must be 'blue' or 'red', got {side!r}")
        self.inst = inst
        self.side = side

    def distribution(self, state: GameState):
        acts = (
            blue_actions(state, self.inst)
            if self.side == "blue"
            else red_actions(state, self.inst)
        )
        return acts, np.full(len(acts), 1.0 / len(acts))


class TablePolicy:
    """Explicit per-state action distributions."""

    def __init__(self, side: str, table: dict[GameState, dict[int, float]]):
        self.side = side
        self.table = {GameState(*k): v for k, v in table.items()}

    def distribution(self, state: GameState):
        row = self.table[state]
        actions = tuple(sorted(row))
        return actions, np.array([row[a] for a in actions])


_POLICY_KINDS = (
    "equilibrium",
    "blue_security",
    "red_security",
    "naive_best_case",
    "red_never_switch",
    "uniform_random",
    "table",
)


def make_policy(
    kind: str,
    side: str | None = None,
    *,
    inst: Instance | None = None,
    solution: Solution | None = None,
    gamma: float | None = None,
    table: dict | None = None,
):
    """Policy factory keyed by kind; supplies whatever data the kind needs."""
    if kind == "equilibrium":
        if solution is None:
            raise ValueError("equilibrium policy needs a solution")
        return EquilibriumPolicy(solution, side)
    if kind == "blue_security":
        return BlueSecurityPolicy(inst)
    if kind == "red_security":
        g = gamma if gamma is not None else inst.discount
        return RedSecurityPolicy(inst, g)
    if kind == "naive_best_case":
        return NaiveBestCasePolicy(inst)
    if kind == "red_never_switch":
        return RedNeverSwitchPolicy()
    if kind == "uniform_random":
        return UniformRandomPolicy(inst, side)
    if kind == "table":
        return TablePolicy(side, table)
    raise ValueError(f"unknown policy kind {kind!r}; known: {_POLICY_KINDS}")


@dataclass(frozen=True)
class Trajectory:
    """One sampled play: the visited states, both action streams, and the costs."""

    states: tuple[GameState, ...]
    blue_actions: tuple[int, ...]
    red_actions: tuple[int, ...]
    stage_costs: tuple[float, ...]
    discounted_total: float
    reached_goal: bool

    @property
    def length(self) -> int:
        return len(self.stage_costs)


def _legal(state: GameState, inst: Instance, side: str):
    return blue_actions(state, inst) if side == "blue" else red_actions(state, inst)


def _sample(rng, policy, state: GameState, inst: Instance, side: str) -> int:
    actions, probs = policy.distribution(state)
    probs = np.asarray(probs, dtype=float)
    legal = _legal(state, inst, side)
    if (
        len(actions) != len(probs)
        or np.any(probs < -1e-12)
        or abs(probs.sum() - 1.0) > 1e-9
        or any(a not in legal for a in actions)
    ):
        raise PolicyContractError(
            f"{side} policy emitted an invalid distribution at state {tuple(state)}"
        )
    if len(actions) == 1:
        return actions[0]
    probs = np.clip(probs, 0.0, None)
    return actions[rng.choice(len(actions), p=probs / probs.sum())]


def _rollout_rng(seed: int, rollout_index: int):
    # keyed by (seed, rollout index): reproducible regardless of scheduling
    root = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(rollout_index,))
    return np.random.default_rng(root)


def rollout(
    inst: Instance,
    blue,
    red,
    s0: GameState,
    gamma: float | None = None,
    horizon: int | None = None,
    seed: int = 0,
    rollout_index: int = 0,
) -> Trajectory:
    """Sample one play of at most ``horizon`` steps; stops on reaching the goal."""
    if gamma is None:
        gamma = inst.discount
    if horizon is None:
        horizon = default_horizon(inst)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    rng = _rollout_rng(seed, rollout_index)
    states = [s0]
    blues: list[int] = []
    reds: list[int] = []
    costs: list[float] = []
    total = 0.0
    state = s0
    for t in range(horizon):
        if state.position == inst.goal:
            break
        b = _sample(rng, blue, state, inst, "blue")
        r = _sample(rng, red, state, inst, "red")
        cost = stage_cost(state, b, inst)
        total += gamma**t * cost
        state = step(state, b, r, inst)
        blues.append(b)
        reds.append(r)
        costs.append(cost)
        states.append(state)
    return Trajectory(
        states=tuple(states),
        blue_actions=tuple(blues),
        red_actions=tuple(reds),
        stage_costs=tuple(costs),
        discounted_total=total,
        reached_goal=state.position == inst.goal,
    )


def estimate_cost(
    inst: Instance,
    blue,
    red,
    s0: GameState,
    gamma: float | None = None,
    horizon: int | None = None,
    n_rollouts: int = 1000,
    seed: int = 0,
):
    """Monte Carlo estimate: (mean cost, standard error, goal-reaching fraction)."""
    if n_rollouts < 1:
        raise ValueError(f"n_rollouts must be >= 1, got {n_rollouts}")
    totals = np.empty(n_rollouts)
    reached = 0
    for i in range(n_rollouts):
        traj = rollout(inst, blue, red, s0, gamma, horizon, seed, rollout_index=i)
        totals[i] = traj.discounted_total
        reached += traj.reached_goal
    mean = float(totals.mean())
    stderr = (
        float(totals.std(ddof=1) / math.sqrt(n_rollouts)) if n_rollouts > 1 else 0.0
    )
    return mean, stderr, reached / n_rollouts


@dataclass(frozen=True)
class ValueTable:
    """Per-state scalars indexed by the canonical state enumeration."""

    space: StateSpace
    values: np.ndarray

    def at(self, state: GameState) -> float:
        return float(self.values[self.space.index(state)])


def _induced_chain(inst: Instance, blue, red):
    """Transition matrix and expected stage cost of the fixed-policy chain.

    Goal-position states are absorbing with zero cost: the game has ended.
    """
    space = StateSpace.from_instance(inst)
    size = len(space)
    kk, levels = inst.k, inst.max_ammo + 1
    p_mat = np.zeros((size, size))
    cost = np.zeros(size)
    for i in range(size):
        state = space.decode(i)
        if state.position == inst.goal:
            p_mat[i, i] = 1.0
            continue
        b_acts, b_probs = blue.distribution(state)
        r_acts, r_probs = red.distribution(state)
        for acts, probs, side in ((b_acts, b_probs, "blue"), (r_acts, r_probs, "red")):
            probs = np.asarray(probs, dtype=float)
            if abs(probs.sum() - 1.0) > 1e-9 or probs.min() < -1e-12:
                raise PolicyContractError(
                    f"{side} policy emitted an invalid distribution at state {tuple(state)}"
                )
        for b, pb in zip(b_acts, np.asarray(b_probs, dtype=float)):
            if pb <= 0.0:
                continue
            cost[i] += pb * stage_cost(state, b, inst)
            for r, pr in zip(r_acts, np.asarray(r_probs, dtype=float)):
                if pr <= 0.0:
                    continue
                nxt = step(state, b, r, inst)
                j = ((nxt.position - 1) * kk + (nxt.graph_index - 1)) * levels + nxt.ammo
                p_mat[i, j] += pb * pr
    return space, p_mat, cost


def exact_expected_cost(
    inst: Instance, blue, red, gamma: float | None = None
) -> ValueTable:
    """Exact discounted cost of the chain induced by a fixed policy pair.

    Solves the linear evaluation system directly; requires gamma < 1 or an
    absorbing chain for the system to be nonsingular.
    """
    if gamma is None:
        gamma = inst.discount
    space, p_mat, cost = _induced_chain(inst, blue, red)
    values = np.linalg.solve(np.eye(len(space)) - gamma * p_mat, cost)
    return ValueTable(space, values)


def goal_reach_probability(
    inst: Instance, blue, red, s0: GameState, horizon: int
) -> float:
    """Exact probability that blue has reached the goal within ``horizon`` steps."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    space, p_mat, _ = _induced_chain(inst, blue, red)
    dist = np.zeros(len(space))
    dist[space.index(s0)] = 1.0
    for _ in range(horizon):
        dist = dist @ p_mat
    mask = np.array([s.position == inst.goal for s in space])
    return float(dist[mask].sum())
