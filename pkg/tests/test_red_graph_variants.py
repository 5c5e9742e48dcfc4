"""Games whose red action graph is not complete: a directed switch cycle,
and the K=1 degenerate case where red never has a real choice."""

import numpy as np
import pytest

from advgraph import (
    GameState,
    GraphSet,
    Instance,
    PositionGraph,
    RedActionGraph,
    bound_table,
    check_instance,
    exact_expected_cost,
    exploitability,
    gamma_threshold,
    goal_reach_probability,
    make_policy,
    q_matrix,
    red_actions,
    shapley_solve,
    solve_by_subgames,
)
from oracles import path_distance


def make_cycle_instance(max_ammo=2, discount=0.999):
    """K=3 graphs, red may only advance along the cycle 1->2->3->1 (or stay)."""
    w1 = {(1, 2): 1.0, (1, 3): 6.0, (2, 3): 5.0, (3, 3): 0.0}
    w2 = {(1, 2): 5.0, (1, 3): 6.0, (2, 3): 1.0, (3, 3): 0.0}
    w3 = {(1, 2): 3.0, (1, 3): 6.0, (2, 3): 3.0, (3, 3): 0.0}
    graphs = GraphSet(
        (PositionGraph(3, 3, w1), PositionGraph(3, 3, w2), PositionGraph(3, 3, w3))
    )
    red = RedActionGraph(
        3, frozenset({(1, 1), (2, 2), (3, 3), (1, 2), (2, 3), (3, 1)})
    )
    return Instance(graphs, red, max_ammo=max_ammo, discount=discount)


def test_cycle_instance_validates():
    assert check_instance(make_cycle_instance()) == []


def test_red_actions_restricted_to_cycle():
    inst = make_cycle_instance()
    assert red_actions(GameState(1, 1, 2), inst) == (1, 2)
    assert red_actions(GameState(1, 3, 2), inst) == (1, 3)
    assert red_actions(GameState(1, 3, 0), inst) == (3,)


def test_modes_agree_on_cycle_instance():
    inst = make_cycle_instance()
    full = shapley_solve(inst, 0.999)
    sub = solve_by_subgames(inst, 0.999)
    assert full.converged and sub.converged
    assert np.max(np.abs(full.values - sub.values)) <= 2e-8


def test_cycle_bounds_sandwich_and_certificate():
    inst = make_cycle_instance()
    gamma = max(gamma_threshold(inst), 0.99)
    sol = solve_by_subgames(inst, gamma)
    table = bound_table(inst, gamma)
    assert (table.lower - 1e-6 <= sol.values).all()
    assert (sol.values <= table.upper + 1e-6).all()
    for state in sol.space:
        q = q_matrix(state, sol.values, inst, gamma)
        gains = exploitability(
            q, sol.red_policy_at(state)[1], sol.blue_policy_at(state)[1]
        )
        assert max(gains) <= 1e-7


def test_cycle_equilibrium_reaches_goal():
    inst = make_cycle_instance()
    gamma = max(gamma_threshold(inst), 0.99)
    sol = solve_by_subgames(inst, gamma)
    blue = make_policy("equilibrium", "blue", solution=sol)
    red = make_policy("equilibrium", "red", solution=sol)
    prob = goal_reach_probability(inst, blue, red, GameState(1, 1, 2), 90)
    assert prob >= 0.999


def test_cycle_rollout_actions_stay_legal():
    inst = make_cycle_instance()
    sol = solve_by_subgames(inst, 0.999)
    blue = make_policy("equilibrium", "blue", solution=sol)
    red = make_policy("uniform_random", "red", inst=inst)
    table = exact_expected_cost(inst, blue, red, 0.999)
    assert table.at(GameState(3, 2, 1)) == 0.0


def make_single_graph_instance(max_ammo=3, discount=0.999):
    w = {(1, 2): 2.0, (1, 3): 5.0, (2, 3): 2.0, (3, 3): 0.0}
    return Instance(
        GraphSet((PositionGraph(3, 3, w),)),
        RedActionGraph.complete(1),
        max_ammo=max_ammo,
        discount=discount,
    )


def test_k1_reduces_to_shortest_path_planning():
    # with one graph red's switches are vacuous: ammo never matters
    inst = make_single_graph_instance()
    sol = solve_by_subgames(inst, 0.999)
    w = inst.graphs.graph(1).weights
    for p in (1, 2, 3):
        want = path_distance(w, p, 3, 0.999)
        for a in range(4):
            assert sol.value_at(GameState(p, 1, a)) == pytest.approx(want, abs=1e-7)


def test_k1_bounds_collapse_to_distances():
    inst = make_single_graph_instance()
    table = bound_table(inst, 1.0)
    for state in table.space:
        w = inst.graphs.graph(1).weights
        assert table.upper_at(state) == pytest.approx(
            path_distance(w, state.position, 3, 1.0)
        )
        assert table.lower_at(state) <= table.upper_at(state) + 1e-12
