"""JSON file formats for instances and solutions.

Instance schema: ``{"n", "goal", "k", "edges", "weights", "red_edges",
"robots", "max_ammo"}`` with per-graph weight lists aligned to the edge list
and ``red_edges`` either an explicit pair list or the string "complete".
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GraphError
from .graphs import GraphSet, PositionGraph
from .model import GameState, Instance, RedActionGraph, StateSpace
from .solver import Solution


def instance_to_dict(inst: Instance) -> dict:
    edges = [list(e) for e in inst.graphs.edges]
    weights = [
        [g.weights[tuple(e)] for e in edges] for g in inst.graphs.graphs
    ]
    red = (
        "complete"
        if inst.red_graph.is_complete
        else [list(e) for e in sorted(inst.red_graph.edges)]
    )
    return {
        "n": inst.node_count,
        "goal": inst.goal,
        "k": inst.k,
        "edges": edges,
        "weights": weights,
        "red_edges": red,
        "robots": inst.robot_count,
        "max_ammo": inst.max_ammo,
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        n = int(data["n"])
        goal = int(data["goal"])
        k = int(data["k"])
        edges = [tuple(int(v) for v in e) for e in data["edges"]]
        weight_rows = data["weights"]
        red_edges = data["red_edges"]
        robots = int(data["robots"])
        max_ammo = int(data["max_ammo"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed instance file: {exc}") from exc
    if len(weight_rows) != k:
        raise GraphError(f"expected {k} weight rows, got {len(weight_rows)}")
    graphs = []
    for row in weight_rows:
        if len(row) != len(edges):
            raise GraphError("weight row length does not match the edge list")
        graphs.append(
            PositionGraph(n, goal, {e: float(w) for e, w in zip(edges, row)})
        )
    if red_edges == "complete":
        red = RedActionGraph.complete(k)
    else:
        red = RedActionGraph(k, frozenset(tuple(int(v) for v in e) for e in red_edges))
    return Instance(
        graphs=GraphSet(tuple(graphs)),
        red_graph=red,
        robot_count=robots,
        max_ammo=max_ammo,
    )


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n"
    )


def load_instance(path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def _state_key(state: GameState) -> str:
    return f"{state.position}/{state.graph_index}/{state.ammo}"


def _policy_block(space, supports, probs) -> dict:
    block = {}
    for i, state in enumerate(space):
        row = {
            str(a): float(p)
            for a, p in zip(supports[i], probs[i])
            if p >= 1e-12
        }
        block[_state_key(state)] = row
    return block


def solution_to_dict(sol: Solution, joint_map: dict | None = None) -> dict:
    space = sol.space
    data = {
        "n": space.node_count,
        "k": space.k,
        "max_ammo": space.ammo_levels - 1,
        "gamma": sol.gamma,
        "tol": sol.tol,
        "mode": sol.mode,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "converged": sol.converged,
        "values": {
            _state_key(s): float(sol.values[i]) for i, s in enumerate(space)
        },
        "blue_policy": _policy_block(space, sol.blue_supports, sol.blue_probs),
        "red_policy": _policy_block(space, sol.red_supports, sol.red_probs),
    }
    if joint_map is not None and any(len(v) > 1 for v in joint_map.values()):
        data["joint_nodes"] = {str(i): list(v) for i, v in joint_map.items()}
    return data


def solution_from_dict(data: dict) -> Solution:
    space = StateSpace(int(data["n"]), int(data["k"]), int(data["max_ammo"]) + 1)
    size = len(space)
    values = np.empty(size)
    blue_supports, blue_probs = [], []
    red_supports, red_probs = [], []
    for i, state in enumerate(space):
        key = _state_key(state)
        values[i] = data["values"][key]
        for block, sups, prbs in (
            (data["blue_policy"], blue_supports, blue_probs),
            (data["red_policy"], red_supports, red_probs),
        ):
            row = block[key]
            actions = tuple(sorted(int(a) for a in row))
            sups.append(actions)
            prbs.append(np.array([row[str(a)] for a in actions]))
    return Solution(
        space=space,
        values=values,
        blue_supports=blue_supports,
        blue_probs=blue_probs,
        red_supports=red_supports,
        red_probs=red_probs,
        iterations=int(data["iterations"]),
        residual=float(data["residual"]),
        converged=bool(data["converged"]),
        gamma=float(data["gamma"]),
        tol=float(data["tol"]),
        mode=str(data["mode"]),
    )


def save_solution(sol: Solution, path, joint_map: dict | None = None) -> None:
    Path(path).write_text(
        json.dumps(solution_to_dict(sol, joint_map), indent=2, sort_keys=True) + "\n"
    )


def load_solution(path) -> Solution:
    return solution_from_dict(json.loads(Path(path).read_text()))
