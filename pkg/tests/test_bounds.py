import pytest

from advgraph import (
    GameState,
    GraphSet,
    InfeasibleConditionError,
    Instance,
    PositionGraph,
    RedActionGraph,
    blue_security,
    bound_table,
    build_joint,
    distances_to,
    gamma_threshold,
    highest_cost_graph,
    random_instance,
    red_security,
    solve_by_subgames,
)
from conftest import make_f1, make_f2


def test_threshold_f1():
    # C_min = 1 (edge (1,2) on graph 1), d_max = 5 (node 1 on the max graph)
    assert gamma_threshold(make_f1()) == pytest.approx(0.8)


def test_threshold_f2():
    assert gamma_threshold(make_f2()) == pytest.approx(1 - 1 / 11)


def test_threshold_single_edge_graph():
    w = {(1, 2): 3.0, (2, 2): 0.0}
    inst = Instance(
        GraphSet((PositionGraph(2, 2, dict(w)), PositionGraph(2, 2, dict(w)))),
        RedActionGraph.complete(2),
    )
    assert gamma_threshold(inst) == pytest.approx(0.0)


def test_threshold_rejects_zero_cost_edge():
    w1 = {(1, 2): 0.0, (2, 2): 0.0}
    w2 = {(1, 2): 1.0, (2, 2): 0.0}
    inst = Instance(
        GraphSet((PositionGraph(2, 2, w1), PositionGraph(2, 2, w2))),
        RedActionGraph.complete(2),
    )
    with pytest.raises(InfeasibleConditionError):
        gamma_threshold(inst)


def test_blue_security_fixture_actions():
    f1 = make_f1()
    # both moves cost 5 through the max graph; the tie goes to node 2
    assert blue_security(GameState(1, 1, 1), f1) == (2, 5.0)
    assert blue_security(GameState(2, 2, 0), f1) == (3, 1.0)
    assert blue_security(GameState(3, 1, 1), f1) == (3, 0.0)


def test_blue_security_f2_upper():
    # min over moves of current edge + max-graph distance: 1 + 10 on both branches
    assert blue_security(GameState(1, 1, 1), make_f2()) == (2, 11.0)


def test_red_security_fixture_values():
    f1 = make_f1()
    assert red_security(GameState(1, 1, 1), f1, 1.0) == (1, 5.0)
    action, lower = red_security(GameState(1, 1, 1), f1, 0.9)
    assert action == 1
    assert lower == pytest.approx(1 + 0.81 * 4)


def test_red_security_frozen_at_zero_ammo():
    action, lower = red_security(GameState(1, 2, 0), make_f1(), 0.9)
    assert action == 2
    assert lower == pytest.approx(4 + 0.81 * 1)


def test_red_security_exponent_knob():
    f1 = make_f1()
    _, printed = red_security(GameState(1, 1, 1), f1, 0.9)
    _, sketch = red_security(GameState(1, 1, 1), f1, 0.9, exponent=f1.node_count - 2)
    assert printed == pytest.approx(1 + 0.9**2 * 4)
    assert sketch == pytest.approx(1 + 0.9 * 4)
    assert sketch >= printed


def test_bound_table_fixture_rows():
    f1 = make_f1()
    table = bound_table(f1, 0.999)
    assert table.threshold == pytest.approx(0.8)
    assert not table.heuristic
    for k in (1, 2):
        for a in (0, 1):
            assert table.upper_at(GameState(1, k, a)) == 5.0
            assert table.lower_at(GameState(3, k, a)) == 0.0
            assert table.upper_at(GameState(3, k, a)) == 0.0
    assert table.lower_at(GameState(1, 1, 1)) == pytest.approx(1 + 0.999**2 * 4)
    assert table.lower_at(GameState(1, 2, 1)) == pytest.approx(5.0)
    assert table.lower_at(GameState(1, 2, 0)) == pytest.approx(4 + 0.999**2 * 1)


def test_bound_table_matches_per_state_functions():
    inst = random_instance(6, max_ammo=2, seed=11)
    table = bound_table(inst, 0.99)
    for state in table.space:
        assert table.upper_at(state) == pytest.approx(blue_security(state, inst)[1])
        assert table.lower_at(state) == pytest.approx(
            red_security(state, inst, 0.99)[1]
        )


def test_lower_is_below_upper_above_threshold():
    for seed in range(8):
        inst = random_instance(5, max_ammo=2, seed=seed)
        gamma = max(gamma_threshold(inst), 0.99)
        table = bound_table(inst, gamma)
        assert (table.lower <= table.upper + 1e-9).all()


def test_upper_never_exceeds_max_graph_distance():
    for seed in range(8):
        inst = random_instance(6, max_ammo=2, seed=seed)
        dist = distances_to(highest_cost_graph(inst.graphs), inst.goal)
        table = bound_table(inst, 0.99)
        for state in table.space:
            assert table.upper_at(state) <= dist[state.position] + 1e-9


def test_bounds_sandwich_solved_values_on_fixtures():
    for inst in (make_f1(), make_f2()):
        sol = solve_by_subgames(inst, 0.999)
        table = bound_table(inst, 0.999)
        for state in table.space:
            v = sol.value_at(state)
            assert table.lower_at(state) - 1e-6 <= v <= table.upper_at(state) + 1e-6


def test_joint_bounds_are_flagged_heuristic():
    joint, _ = build_joint(make_f1(robots=2))
    assert bound_table(joint, 0.999).heuristic
