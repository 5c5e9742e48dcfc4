import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from advgraph import GraphSet, Instance, PositionGraph, RedActionGraph


def make_f1(max_ammo=1, discount=0.999, robots=1):
    """3-node fixture: cheap first leg on graph 1, cheap second leg on graph 2."""
    w1 = {(1, 2): 1.0, (1, 3): 5.0, (2, 3): 4.0, (3, 3): 0.0}
    w2 = {(1, 2): 4.0, (1, 3): 5.0, (2, 3): 1.0, (3, 3): 0.0}
    graphs = GraphSet((PositionGraph(3, 3, w1), PositionGraph(3, 3, w2)))
    return Instance(
        graphs, RedActionGraph.complete(2), robot_count=robots,
        max_ammo=max_ammo, discount=discount,
    )


def make_f2(max_ammo=1, discount=0.999, robots=1):
    """4-node mixing fixture: two branches, red punishes whichever blue picks."""
    w1 = {(1, 2): 1.0, (1, 3): 1.0, (2, 4): 10.0, (3, 4): 1.0, (4, 4): 0.0}
    w2 = {(1, 2): 1.0, (1, 3): 1.0, (2, 4): 1.0, (3, 4): 10.0, (4, 4): 0.0}
    graphs = GraphSet((PositionGraph(4, 4, w1), PositionGraph(4, 4, w2)))
    return Instance(
        graphs, RedActionGraph.complete(2), robot_count=robots,
        max_ammo=max_ammo, discount=discount,
    )


def make_f3(max_ammo=1, discount=0.999):
    """Naive-trap fixture: the best-case detour via node 2 turns ruinous when
    red switches, so a policy chasing best-case paths busts the upper bound."""
    w1 = {(1, 2): 1.0, (1, 3): 10.0, (2, 3): 1.0, (3, 3): 0.0}
    w2 = {(1, 2): 1.0, (1, 3): 10.0, (2, 3): 50.0, (3, 3): 0.0}
    graphs = GraphSet((PositionGraph(3, 3, w1), PositionGraph(3, 3, w2)))
    return Instance(
        graphs, RedActionGraph.complete(2), max_ammo=max_ammo, discount=discount
    )


def make_f4(max_ammo=1, discount=0.999):
    """Domination fixture: the direct edge (1,3) costs 100 on every graph and
    is strictly dominated by the two-hop route through node 2."""
    w1 = {(1, 2): 2.0, (1, 3): 100.0, (2, 3): 3.0, (3, 3): 0.0}
    w2 = {(1, 2): 2.0, (1, 3): 100.0, (2, 3): 3.0, (3, 3): 0.0}
    graphs = GraphSet((PositionGraph(3, 3, w1), PositionGraph(3, 3, w2)))
    return Instance(
        graphs, RedActionGraph.complete(2), max_ammo=max_ammo, discount=discount
    )


def make_f5(max_ammo=1, discount=0.999):
    """Fixture with a waiting self-loop at node 1 (non-goal loops cost 1)."""
    w1 = {(1, 1): 1.0, (1, 2): 1.0, (2, 3): 4.0, (3, 3): 0.0}
    w2 = {(1, 1): 1.0, (1, 2): 4.0, (2, 3): 1.0, (3, 3): 0.0}
    graphs = GraphSet((PositionGraph(3, 3, w1), PositionGraph(3, 3, w2)))
    return Instance(
        graphs, RedActionGraph.complete(2), max_ammo=max_ammo, discount=discount
    )


@pytest.fixture
def f1():
    return make_f1()


@pytest.fixture
def f2():
    return make_f2()


@pytest.fixture
def f3():
    return make_f3()


@pytest.fixture
def f4():
    return make_f4()


@pytest.fixture
def f5():
    return make_f5()
