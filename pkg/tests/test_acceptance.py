"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The random battery (seeds, sizes, ammo, discount) is fixed so results
are reproducible.
"""

import time
from dataclasses import dataclass

import numpy as np
import pytest

from advgraph import (
    GameState,
    bound_table,
    build_joint,
    check_instance,
    exact_expected_cost,
    exploitability,
    gamma_threshold,
    goal_reach_probability,
    is_trivial,
    make_policy,
    prune_dominated,
    random_instance,
    shapley_solve,
    solve,
    solve_by_subgames,
)
from advgraph.cli import run_sweep_ammo
from advgraph.solver import CompiledGame
from conftest import make_f1, make_f2, make_f3
from oracles import kernel_value

TOL = 1e-8


def _report(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@dataclass
class Solved:
    seed: int
    inst: object
    gamma: float
    trivial: bool
    sub: object
    full: object
    table: object


@pytest.fixture(scope="module")
def battery():
    """Criterion 2's instance set: 100 seeded M=1 games, solved both ways."""
    start = time.perf_counter()
    entries = []
    for i in range(100):
        inst = random_instance(4 + i % 3, max_ammo=i % 4, seed=i)
        gamma = max(gamma_threshold(inst), 0.99)
        trivial = is_trivial(inst, gamma)
        sub = solve_by_subgames(inst, gamma, tol=TOL)
        full = shapley_solve(inst, gamma, tol=TOL)
        table = bound_table(inst, gamma)
        assert sub.converged and full.converged
        entries.append(Solved(i, inst, gamma, trivial, sub, full, table))
    elapsed = time.perf_counter() - start
    return entries, elapsed


def test_criterion_1_fixture_exactness():
    start = time.perf_counter()
    sol1 = solve_by_subgames(make_f1(), 0.999, tol=TOL)
    t1 = time.perf_counter() - start
    v1 = sol1.value_at(GameState(1, 1, 1))
    start = time.perf_counter()
    sol2 = solve_by_subgames(make_f2(), 0.999, tol=TOL)
    t2 = time.perf_counter() - start
    v2 = sol2.value_at(GameState(1, 1, 1))
    ok = abs(v1 - 5) <= 0.05 and abs(v2 - 6.5) <= 0.05 and t1 < 1 and t2 < 1
    blue, red = sol2.blue_policy_at(GameState(1, 1, 1)), sol2.red_policy_at(GameState(1, 1, 1))
    for _, probs in (blue, red):
        ok = ok and len(probs) == 2 and np.allclose(probs, 0.5, atol=0.01)
    _report(
        1, ok,
        f"F1 value {v1:.4f} (5±0.05, {t1:.2f}s), F2 value {v2:.4f} (6.5±0.05, "
        f"{t2:.2f}s), F2 strategies mix 0.5/0.5",
    )


def test_criterion_2_bound_sandwich(battery):
    entries, elapsed = battery
    nontrivial = [e for e in entries if not e.trivial]
    bad = 0
    for e in nontrivial:
        s0 = e.inst.initial_state()
        v = e.sub.value_at(s0)
        if not (e.table.lower_at(s0) - 1e-6 <= v <= e.table.upper_at(s0) + 1e-6):
            bad += 1
    ok = bad == 0 and elapsed < 300 and len(entries) >= 100
    _report(
        2, ok,
        f"bound sandwich held on {len(nontrivial) - bad}/{len(nontrivial)} "
        f"non-trivial instances (battery built in {elapsed:.1f}s < 300s)",
    )


def test_criterion_3_equilibrium_certificate(battery):
    entries, _ = battery
    worst = 0.0
    for e in entries:
        compiled = CompiledGame(e.inst)
        for i in range(len(e.sub.space)):
            q = compiled.q_matrix(i, e.sub.values, e.gamma)
            gains = exploitability(q, e.sub.red_probs[i], e.sub.blue_probs[i])
            worst = max(worst, *gains)
    ok = worst <= 10 * TOL
    _report(3, ok, f"max per-state exploitability {worst:.2e} <= {10 * TOL:.0e}")


def test_criterion_4_subgame_equivalence(battery):
    entries, _ = battery
    worst = max(
        float(np.max(np.abs(e.sub.values - e.full.values))) for e in entries
    )
    ok = worst <= 2 * TOL
    _report(4, ok, f"max |V_sub - V_full| = {worst:.2e} <= {2 * TOL:.0e}")


def test_criterion_5_goal_reaching(battery):
    entries, _ = battery
    worst = 1.0
    for e in entries:
        blue = make_policy("equilibrium", "blue", solution=e.sub)
        red = make_policy("equilibrium", "red", solution=e.sub)
        horizon = 10 * e.inst.node_count * (e.inst.max_ammo + 1)
        prob = goal_reach_probability(
            e.inst, blue, red, e.inst.initial_state(), horizon
        )
        worst = min(worst, prob)
    ok = worst >= 0.999
    _report(5, ok, f"min goal-reaching probability {worst:.6f} >= 0.999")


def test_criterion_6_ammo_monotonicity():
    rows = run_sweep_ammo(5, samples=110, max_ammo=6, seed=9000, gamma=0.99, tol=TOL)
    detail = [r for r in rows if r["policy"] == "ne"]
    seeds = sorted({r["seed"] for r in detail})
    by_seed = {
        s: {r["ammo"]: r["normalized"] for r in detail if r["seed"] == s}
        for s in seeds
    }
    ok = len(seeds) >= 100
    msgs = []
    for a in range(6):
        diffs = np.array([by_seed[s][a + 1] - by_seed[s][a] for s in seeds])
        mean = diffs.mean()
        stderr = diffs.std(ddof=1) / np.sqrt(len(diffs)) if len(diffs) > 1 else 0.0
        ok = ok and mean >= -2 * stderr
        msgs.append(f"{a}->{a + 1}: {mean:+.4f}±{stderr:.4f}")
    _report(
        6, ok,
        f"mean normalized value nondecreasing over {len(seeds)} instances "
        f"({'; '.join(msgs)})",
    )


def test_criterion_7_multi_robot_economy():
    start = time.perf_counter()
    checked = violated = 0
    per_robot = {1: [], 2: []}
    seed = 200
    while checked < 30:
        single = random_instance(6, max_ammo=2, seed=seed)
        multi = random_instance(6, max_ammo=2, m_robots=2, seed=seed)
        seed += 1
        gamma = max(gamma_threshold(single), 0.99)
        if is_trivial(single, gamma):
            continue
        joint, decode = build_joint(multi)
        if joint.node_count > 21:
            continue
        ids = {v: k for k, v in decode.items()}
        sol_j = solve_by_subgames(joint, gamma, tol=TOL)
        sol_s = solve_by_subgames(single, gamma, tol=TOL)
        vj = sol_j.value_at(GameState(ids[(1, 1)], 1, 2))
        vs = sol_s.value_at(GameState(1, 1, 2))
        if vj / 2 > vs + 1e-6:
            violated += 1
        per_robot[1].append(vs)
        per_robot[2].append(vj / 2)
        checked += 1
    elapsed = time.perf_counter() - start
    mean1, mean2 = np.mean(per_robot[1]), np.mean(per_robot[2])
    ok = violated == 0 and mean2 <= mean1 and elapsed < 600
    _report(
        7, ok,
        f"value-per-robot: {violated}/30 violations; mean M=2 {mean2:.3f} <= "
        f"mean M=1 {mean1:.3f} ({elapsed:.1f}s < 600s)",
    )


def test_criterion_8_pruning_safety():
    worst = 0.0
    for seed in range(300, 350):
        inst = random_instance(5, max_ammo=2, seed=seed)
        gamma = max(gamma_threshold(inst), 0.99)
        pruned, report = prune_dominated(inst, gamma)
        # every surviving node must still reach the goal
        assert check_instance(pruned) == []
        sol_orig = solve_by_subgames(inst, gamma, tol=TOL)
        sol_pruned = solve_by_subgames(pruned, gamma, tol=TOL)
        for p_old, p_new in report.node_map.items():
            for k in range(1, inst.k + 1):
                for a in range(inst.max_ammo + 1):
                    diff = abs(
                        sol_pruned.value_at(GameState(p_new, k, a))
                        - sol_orig.value_at(GameState(p_old, k, a))
                    )
                    worst = max(worst, diff)
    ok = worst <= 1e-6
    _report(8, ok, f"pruned/unpruned value gap {worst:.2e} <= 1e-06 on 50 instances")


def test_criterion_9_matrix_game_oracle():
    rng = np.random.default_rng(2024)
    worst_val = worst_exp = 0.0
    for _ in range(1000):
        shape = rng.integers(1, 5, size=2)
        payoff = rng.integers(-9, 10, size=shape).astype(float)
        value, red, blue = solve(payoff)
        worst_val = max(worst_val, abs(value - kernel_value(payoff)))
        worst_exp = max(worst_exp, *exploitability(payoff, red, blue))
    ok = worst_val <= 1e-6 and worst_exp <= 1e-9
    _report(
        9, ok,
        f"1000 matrices: |value - oracle| <= {worst_val:.2e} (1e-06), "
        f"exploitability <= {worst_exp:.2e} (1e-09)",
    )


def test_criterion_10_baseline_ordering(battery):
    entries, _ = battery
    ne_vs_sec_bad = sec_vs_upper_bad = 0
    naive_violations = 0
    for e in entries:
        if e.trivial:
            continue
        ne_red = make_policy("equilibrium", "red", solution=e.sub)
        security = make_policy("blue_security", "blue", inst=e.inst)
        naive = make_policy("naive_best_case", "blue", inst=e.inst)
        sec_costs = exact_expected_cost(e.inst, security, ne_red, e.gamma)
        naive_costs = exact_expected_cost(e.inst, naive, ne_red, e.gamma)
        if not (e.sub.values <= sec_costs.values + 1e-6).all():
            ne_vs_sec_bad += 1
        if not (sec_costs.values <= e.table.upper + 1e-6).all():
            sec_vs_upper_bad += 1
        if (naive_costs.values > e.table.upper + 1e-6).any():
            naive_violations += 1
    if naive_violations == 0:
        # the constructed trap fixture demonstrates the unbounded naive cost
        f3 = make_f3()
        sol = solve_by_subgames(f3, 0.999, tol=TOL)
        table = bound_table(f3, 0.999)
        ne_red = make_policy("equilibrium", "red", solution=sol)
        naive = make_policy("naive_best_case", "blue", inst=f3)
        cost = exact_expected_cost(f3, naive, ne_red, 0.999).at(GameState(1, 1, 1))
        naive_violations = int(cost > table.upper_at(GameState(1, 1, 1)) + 1e-6)
    ok = ne_vs_sec_bad == 0 and sec_vs_upper_bad == 0 and naive_violations > 0
    _report(
        10, ok,
        f"NE <= security on all instances ({ne_vs_sec_bad} bad), security <= "
        f"upper bound ({sec_vs_upper_bad} bad), naive exceeded the bound "
        f"{naive_violations} time(s)",
    )
