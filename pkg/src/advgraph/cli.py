"""Command-line harness: generate, solve, bound, simulate, and sweep instances.

Exit codes: 0 success, 1 usage error, 2 solver did not converge, 3 invalid
instance. Sweeps fan out across a process pool capped by ADVGRAPH_THREADS and
write rows in deterministic order, so re-runs with one seed differ only in the
runtime_ms column.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bounds import bound_table
from .errors import GraphError, InfeasibleConditionError, InvalidInstanceError
from .generate import is_trivial, random_instance
from .model import GameState, build_joint, require_valid
from .serialize import load_instance, load_solution, save_instance, save_solution
from .simulate import (
    EquilibriumPolicy,
    exact_expected_cost,
    estimate_cost,
    make_policy,
    rollout,
)
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, ShapleySolver

DEFAULT_GAMMA = 1 - 1e-9

SWEEP_COLUMNS = [
    "seed",
    "n_max",
    "N",
    "M",
    "ammo",
    "gamma",
    "value",
    "lower",
    "upper",
    "normalized",
    "policy",
    "runtime_ms",
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _normalized(value: float, lower: float, upper: float) -> float:
    span = upper - lower
    if span <= 1e-12:
        return 0.0
    return (value - lower) / span


def _pool_size() -> int:
    env = os.environ.get("ADVGRAPH_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _run_tasks(fn, tasks):
    workers = _pool_size()
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _exponent_arg(inst, choice: str) -> int | None:
    return None if choice == "n-1" else inst.node_count - 2


def cmd_gen(args) -> int:
    inst = random_instance(
        args.n_max,
        k=args.k,
        edge_prob=args.edge_prob,
        max_ammo=args.ammo,
        m_robots=args.robots,
        seed=args.seed,
        include_self_loops=not args.no_self_loops,
    )
    save_instance(inst, args.out)
    print(f"wrote {args.out}: N={inst.node_count} K={inst.k} ammo={inst.max_ammo}")
    return 0


def cmd_solve(args) -> int:
    inst = require_valid(load_instance(args.instance))
    gamma = args.gamma
    start = time.perf_counter()
    solver = ShapleySolver(
        gamma=gamma, tol=args.tol, max_iter=args.max_iter, mode=args.mode,
        prune=args.prune,
    ).fit(inst)
    elapsed = time.perf_counter() - start
    sol = solver.solution_
    s0 = solver.instance_.initial_state()
    if args.out:
        save_solution(sol, args.out, solver.joint_map_)
    if args.prune and solver.prune_report_ is not None:
        for e in solver.prune_report_.removed:
            print(f"pruned edge ({e.tail},{e.head}): dominated by ({e.tail},{e.dominated_by}), margin {e.margin:.6g}")
    print(
        f"value at s0={tuple(s0)}: {sol.value_at(s0):.6f}  "
        f"residual={sol.residual:.3g} iterations={sol.iterations} "
        f"time={elapsed:.3f}s converged={sol.converged}"
    )
    return 0 if sol.converged else 2


def cmd_bounds(args) -> int:
    inst = require_valid(load_instance(args.instance))
    joint, _ = build_joint(inst)
    gamma = args.gamma
    table = bound_table(joint, gamma, _exponent_arg(joint, args.red_exponent))
    rows = {
        f"{s.position}/{s.graph_index}/{s.ammo}": [
            float(table.lower[i]), float(table.upper[i]),
        ]
        for i, s in enumerate(table.space)
    }
    payload = {
        "gamma": gamma,
        "gamma_threshold": table.threshold,
        "heuristic": table.heuristic,
        "bounds": rows,
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out}: threshold={table.threshold:.6g}")
    return 0


def _simulate_policy(parser, args, side: str, inst, solution, gamma):
    name = args.blue if side == "blue" else args.red
    kinds = {
        "ne": "equilibrium",
        "security": "blue_security" if side == "blue" else "red_security",
        "naive": "naive_best_case",
        "never": "red_never_switch",
        "uniform": "uniform_random",
    }
    kind = kinds[name]
    if kind == "equilibrium" and solution is None:
        parser.error(f"--{side} ne requires --solution")
    return make_policy(kind, side, inst=inst, solution=solution, gamma=gamma)


def cmd_simulate(parser, args) -> int:
    inst = require_valid(load_instance(args.instance))
    joint, _ = build_joint(inst)
    solution = load_solution(args.solution) if args.solution else None
    gamma = args.gamma
    blue = _simulate_policy(parser, args, "blue", joint, solution, gamma)
    red = _simulate_policy(parser, args, "red", joint, solution, gamma)
    s0 = joint.initial_state()
    horizon = args.horizon or 10 * joint.node_count * (joint.max_ammo + 1)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        if args.exact:
            table = exact_expected_cost(joint, blue, red, gamma)
            writer.writerow(["state", "expected_cost"])
            for i, s in enumerate(table.space):
                writer.writerow(
                    [f"{s.position}/{s.graph_index}/{s.ammo}", _fmt(float(table.values[i]))]
                )
            print(f"wrote {args.out}: exact cost at s0 = {table.at(s0):.6f}")
        else:
            if args.rollouts < 1:
                parser.error("--rollouts must be >= 1")
            writer.writerow(["rollout", "cost", "reached", "length"])
            for i in range(args.rollouts):
                traj = rollout(
                    joint, blue, red, s0, gamma, horizon, args.seed, rollout_index=i
                )
                writer.writerow(
                    [i, _fmt(traj.discounted_total), int(traj.reached_goal), traj.length]
                )
            mean, stderr, frac = estimate_cost(
                joint, blue, red, s0, gamma, horizon, args.rollouts, args.seed
            )
            print(
                f"wrote {args.out}: mean={mean:.6f} stderr={stderr:.6f} goal_fraction={frac:.4f}"
            )
    return 0


def _solve_for_sweep(inst, gamma, tol):
    solver = ShapleySolver(gamma=gamma, tol=tol, mode="subgame").fit(inst)
    return solver


def _nodes_task(params):
    (seed, n_max, k, edge_prob, ammo, robots_list, gamma_opt, tol) = params
    inst = random_instance(n_max, k=k, edge_prob=edge_prob, max_ammo=ammo, seed=seed)
    gamma = gamma_opt if gamma_opt is not None else DEFAULT_GAMMA
    if is_trivial(inst, gamma):
        return []
    rows = []
    base_solver = None
    for m in robots_list:
        start = time.perf_counter()
        solver = _solve_for_sweep(
            inst if m == 1 else random_instance(
                n_max, k=k, edge_prob=edge_prob, max_ammo=ammo, m_robots=m, seed=seed
            ),
            gamma,
            tol,
        )
        runtime = int(1000 * (time.perf_counter() - start))
        joint = solver.instance_
        s0 = joint.initial_state()
        table = bound_table(joint, gamma)
        value = solver.solution_.value_at(s0)
        lo, up = table.lower_at(s0), table.upper_at(s0)
        rows.append(
            dict(
                seed=seed, n_max=n_max, N=inst.node_count, M=m, ammo=ammo,
                gamma=gamma, value=value, lower=lo, upper=up,
                normalized=_normalized(value, lo, up), policy="ne",
                runtime_ms=runtime,
            )
        )
        if m == 1:
            base_solver = solver
    if base_solver is None:
        base_solver = _solve_for_sweep(inst, gamma, tol)
    joint = base_solver.instance_
    s0 = joint.initial_state()
    table = bound_table(joint, gamma)
    lo, up = table.lower_at(s0), table.upper_at(s0)
    ne_red = EquilibriumPolicy(base_solver.solution_, "red")
    for policy_name, kind in (("security", "blue_security"), ("naive", "naive_best_case")):
        start = time.perf_counter()
        blue = make_policy(kind, "blue", inst=joint, gamma=gamma)
        cost = exact_expected_cost(joint, blue, ne_red, gamma).at(s0)
        runtime = int(1000 * (time.perf_counter() - start))
        rows.append(
            dict(
                seed=seed, n_max=n_max, N=inst.node_count, M=1, ammo=ammo,
                gamma=gamma, value=cost, lower=lo, upper=up,
                normalized=_normalized(cost, lo, up), policy=policy_name,
                runtime_ms=runtime,
            )
        )
    return rows


def _ammo_task(params):
    (seed, n_max, k, edge_prob, max_ammo, gamma_opt, tol) = params
    inst = random_instance(n_max, k=k, edge_prob=edge_prob, max_ammo=max_ammo, seed=seed)
    gamma = gamma_opt if gamma_opt is not None else DEFAULT_GAMMA
    if is_trivial(inst, gamma):
        return []
    start = time.perf_counter()
    solver = _solve_for_sweep(inst, gamma, tol)
    runtime = int(1000 * (time.perf_counter() - start))
    table = bound_table(inst, gamma)
    rows = []
    for a in range(max_ammo + 1):
        s = GameState(1, 1, a)
        value = solver.solution_.value_at(s)
        lo, up = table.lower_at(s), table.upper_at(s)
        rows.append(
            dict(
                seed=seed, n_max=n_max, N=inst.node_count, M=1, ammo=a,
                gamma=gamma, value=value, lower=lo, upper=up,
                normalized=_normalized(value, lo, up), policy="ne",
                runtime_ms=runtime if a == 0 else 0,
            )
        )
    return rows


def _robots_task(params):
    (seed, n_max, k, edge_prob, ammo, robots_list, gamma_opt, tol) = params
    inst = random_instance(n_max, k=k, edge_prob=edge_prob, max_ammo=ammo, seed=seed)
    gamma = gamma_opt if gamma_opt is not None else DEFAULT_GAMMA
    if is_trivial(inst, gamma):
        return []
    rows = []
    for m in robots_list:
        multi = random_instance(
            n_max, k=k, edge_prob=edge_prob, max_ammo=ammo, m_robots=m, seed=seed
        )
        start = time.perf_counter()
        solver = _solve_for_sweep(multi, gamma, tol)
        runtime = int(1000 * (time.perf_counter() - start))
        joint = solver.instance_
        s0 = joint.initial_state()
        table = bound_table(joint, gamma)
        value = solver.solution_.value_at(s0)
        lo, up = table.lower_at(s0), table.upper_at(s0)
        rows.append(
            dict(
                seed=seed, n_max=n_max, N=inst.node_count, M=m, ammo=ammo,
                gamma=gamma, value=value, lower=lo, upper=up,
                normalized=_normalized(value, lo, up), policy="ne",
                runtime_ms=runtime,
            )
        )
    return rows


def run_sweep_nodes(
    n_min, n_max, samples, ammo, robots_list, seed, k=3, edge_prob=0.5,
    gamma=None, tol=DEFAULT_TOL,
):
    tasks = []
    for n in range(n_min, n_max + 1):
        for i in range(samples):
            tasks.append((seed + 1000 * n + i, n, k, edge_prob, ammo, tuple(robots_list), gamma, tol))
    results = _run_tasks(_nodes_task, tasks)
    return [row for rows in results for row in rows]


def run_sweep_ammo(
    n_max, samples, max_ammo, seed, k=3, edge_prob=0.5, gamma=None, tol=DEFAULT_TOL,
):
    tasks = [
        (seed + i, n_max, k, edge_prob, max_ammo, gamma, tol) for i in range(samples)
    ]
    results = _run_tasks(_ammo_task, tasks)
    rows = [row for r in results for row in r]
    means = []
    for a in range(max_ammo + 1):
        level = [r for r in rows if r["ammo"] == a]
        if not level:
            continue
        means.append(
            dict(
                seed=seed, n_max=n_max, N=0, M=1, ammo=a,
                gamma=level[0]["gamma"],
                value=float(np.mean([r["value"] for r in level])),
                lower=float(np.mean([r["lower"] for r in level])),
                upper=float(np.mean([r["upper"] for r in level])),
                normalized=float(np.mean([r["normalized"] for r in level])),
                policy="ne_mean",
                runtime_ms=0,
            )
        )
    return rows + means


def run_sweep_robots(
    n_max, samples, ammo, robots_list, seed, k=3, edge_prob=0.5, gamma=None,
    tol=DEFAULT_TOL,
):
    tasks = [
        (seed + i, n_max, k, edge_prob, ammo, tuple(robots_list), gamma, tol)
        for i in range(samples)
    ]
    results = _run_tasks(_robots_task, tasks)
    return [row for r in results for row in r]


def _write_rows(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])


def cmd_sweep(args) -> int:
    robots = [int(m) for m in args.robots.split(",")] if args.robots else [1]
    if args.kind == "nodes":
        rows = run_sweep_nodes(
            args.n_min, args.n_max, args.samples, args.ammo, robots, args.seed,
            k=args.k, edge_prob=args.edge_prob, gamma=args.gamma, tol=args.tol,
        )
    elif args.kind == "ammo":
        rows = run_sweep_ammo(
            args.n_max, args.samples, args.max_ammo, args.seed,
            k=args.k, edge_prob=args.edge_prob, gamma=args.gamma, tol=args.tol,
        )
    else:
        rows = run_sweep_robots(
            args.n_max, args.samples, args.ammo, robots, args.seed,
            k=args.k, edge_prob=args.edge_prob, gamma=args.gamma, tol=args.tol,
        )
    _write_rows(args.out, rows)
    if not rows:
        print("warning: all sampled instances were trivial; empty dataset")
    else:
        print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="advgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--n-max", type=int, required=True, help="node count before pruning")
    gen.add_argument("--k", type=int, default=3, help="number of graph variants")
    gen.add_argument("--edge-prob", type=float, default=0.5, help="directed edge probability")
    gen.add_argument("--ammo", type=int, default=6, help="red's switch budget")
    gen.add_argument("--robots", type=int, default=1, help="blue robot count")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True, help="instance JSON path")
    gen.add_argument("--no-self-loops", action="store_true", help="skip i=j pairs when sampling")

    solve = sub.add_parser("solve", help="compute the equilibrium solution")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    solve.add_argument("--tol", type=float, default=DEFAULT_TOL, help="sup-norm stopping tolerance")
    solve.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    solve.add_argument("--mode", choices=["full", "subgame"], default="subgame",
                       help="full state-space sweeps or ammo-layered sub-games")
    solve.add_argument("--prune", action="store_true", help="drop bound-dominated moves first")
    solve.add_argument("--out", default="", help="solution JSON path")

    bounds = sub.add_parser("bounds", help="security-strategy value bounds")
    bounds.add_argument("--instance", required=True)
    bounds.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    bounds.add_argument("--red-exponent", choices=["n-1", "n-2"], default="n-1",
                        help="discount exponent in red's bound")
    bounds.add_argument("--out", required=True)

    sim = sub.add_parser("simulate", help="roll out or exactly evaluate policies")
    sim.add_argument("--instance", required=True)
    sim.add_argument("--solution", default="", help="solution JSON (required for ne policies)")
    sim.add_argument("--blue", choices=["ne", "security", "naive", "uniform"], default="ne")
    sim.add_argument("--red", choices=["ne", "security", "never", "uniform"], default="ne")
    sim.add_argument("--rollouts", type=int, default=1000)
    sim.add_argument("--horizon", type=int, default=0, help="0 means 10*N*(ammo+1)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    sim.add_argument("--exact", action="store_true",
                     help="exact per-state expected cost instead of rollouts")
    sim.add_argument("--out", required=True, help="CSV path")

    sweep = sub.add_parser("sweep", help="statistical experiment sweeps")
    sweep.add_argument("kind", choices=["nodes", "ammo", "robots"])
    sweep.add_argument("--n-min", type=int, default=4, help="smallest size (nodes sweep)")
    sweep.add_argument("--n-max", type=int, default=6)
    sweep.add_argument("--samples", type=int, default=20, help="instances per configuration")
    sweep.add_argument("--ammo", type=int, default=6, help="budget (nodes/robots sweeps)")
    sweep.add_argument("--max-ammo", type=int, default=6, help="largest budget (ammo sweep)")
    sweep.add_argument("--robots", default="", help="comma-separated robot counts")
    sweep.add_argument("--k", type=int, default=3)
    sweep.add_argument("--edge-prob", type=float, default=0.5)
    sweep.add_argument("--gamma", type=float, default=None)
    sweep.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sweep.add_argument("--seed", type=int, required=True)
    sweep.add_argument("--out", required=True, help="CSV path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "simulate":
            return cmd_simulate(parser, args)
        if args.command == "sweep":
            return cmd_sweep(args)
    except (InvalidInstanceError, GraphError, InfeasibleConditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
