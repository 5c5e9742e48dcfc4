"""Equilibrium solver for adversarial traversal of time-varying weighted digraphs.

A blue team crosses a weighted digraph to a goal at minimum discounted cost
while a red adversary switches the active graph among K weight variants under
an ammo budget. The package computes Nash-equilibrium mixed policies by
Shapley value iteration, security-strategy value bounds for both players, and
the statistical experiment sweeps, with a CLI front end (``advgraph``).
"""

from .bounds import BoundTable, blue_security, bound_table, gamma_threshold, red_security
from .errors import (
    GraphError,
    IllegalActionError,
    InfeasibleConditionError,
    InvalidInstanceError,
    PolicyContractError,
)
from .generate import is_trivial, random_instance
from .graphs import (
    GraphSet,
    PositionGraph,
    best_case_graph,
    distances_to,
    highest_cost_graph,
    prune_unreachable,
    shortest_distance,
    validate,
)
from .matrixgame import best_response, exploitability, solve
from .model import (
    GameState,
    Instance,
    RedActionGraph,
    StateSpace,
    blue_actions,
    build_joint,
    check_instance,
    enumerate_states,
    red_actions,
    require_valid,
    stage_cost,
    step,
)
from .serialize import load_instance, load_solution, save_instance, save_solution
from .simulate import (
    Trajectory,
    estimate_cost,
    exact_expected_cost,
    goal_reach_probability,
    make_policy,
    rollout,
)
from .solver import (
    PruneReport,
    ShapleySolver,
    Solution,
    prune_dominated,
    q_matrix,
    shapley_solve,
    solve_by_subgames,
)

__version__ = "0.1.0"

__all__ = [
    "BoundTable",
    "GameState",
    "GraphError",
    "GraphSet",
    "IllegalActionError",
    "InfeasibleConditionError",
    "Instance",
    "InvalidInstanceError",
    "PolicyContractError",
    "PositionGraph",
    "PruneReport",
    "RedActionGraph",
    "ShapleySolver",
    "Solution",
    "StateSpace",
    "Trajectory",
    "best_case_graph",
    "best_response",
    "blue_actions",
    "blue_security",
    "bound_table",
    "build_joint",
    "check_instance",
    "distances_to",
    "enumerate_states",
    "estimate_cost",
    "exact_expected_cost",
    "exploitability",
    "gamma_threshold",
    "goal_reach_probability",
    "highest_cost_graph",
    "is_trivial",
    "load_instance",
    "load_solution",
    "make_policy",
    "prune_dominated",
    "prune_unreachable",
    "q_matrix",
    "random_instance",
    "red_actions",
    "red_security",
    "require_valid",
    "rollout",
    "save_instance",
    "save_solution",
    "shapley_solve",
    "shortest_distance",
    "solve",
    "solve_by_subgames",
    "stage_cost",
    "step",
    "validate",
]
