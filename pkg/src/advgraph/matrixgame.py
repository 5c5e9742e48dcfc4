"""Exact solution of finite zero-sum matrix games.

Convention: the row player (red) maximizes and the column player (blue)
minimizes; entries are the cost paid by blue. ``solve`` returns optimal mixed
strategies via the classic reciprocal-value linear program, handled by a small
dense simplex with Bland's rule. Game dimensions here are out-degrees of graph
nodes, so the LPs are tiny and an external solver is not worth the dependency.
"""

from __future__ import annotations

import itertools

import numpy as np

_PIVOT_EPS = 1e-12


def _as_payoff(payoff) -> np.ndarray:
    a = np.asarray(payoff, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"payoff must be a nonempty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("payoff entries must be finite")
    return a


def _saddle(a: np.ndarray):
    """Pure saddle point if maximin == minimax; ties break to the lowest index."""
    row_min = a.min(axis=1)
    col_max = a.max(axis=0)
    i = int(np.argmax(row_min))
    j = int(np.argmin(col_max))
    if row_min[i] == col_max[j]:
        red = np.zeros(a.shape[0])
        blue = np.zeros(a.shape[1])
        red[i] = 1.0
        blue[j] = 1.0
        return float(row_min[i]), red, blue
    return None


def _mixed_2x2(a: np.ndarray):
    # valid only when there is no saddle point: both players fully mix
    (p, q), (r, s) = a
    den = p + s - q - r
    value = (p * s - q * r) / den
    red = np.array([(s - r) / den, (p - q) / den])
    blue = np.array([(s - q) / den, (p - r) / den])
    return value, red, blue


def _simplex_max(a: np.ndarray):
    """Maximize 1'x subject to a x <= 1, x >= 0 (all entries of ``a`` positive).

    Returns the optimal basis column indices over [structural | slack]. Bland's
    rule (lowest eligible index enters and leaves) prevents cycling.
    """
    rows, cols = a.shape
    tab = np.hstack([a, np.eye(rows), np.ones((rows, 1))])
    obj = np.concatenate([np.ones(cols), np.zeros(rows + 1)])
    basis = list(range(cols, cols + rows))
    for _ in range(10_000):
        entering = -1
        for j in range(cols + rows):
            if obj[j] > _PIVOT_EPS:
                entering = j
                break
        if entering < 0:
            return basis
        leaving, best, best_var = -1, np.inf, None
        for i in range(rows):
            coef = tab[i, entering]
            if coef > _PIVOT_EPS:
                ratio = tab[i, -1] / coef
                if ratio < best - _PIVOT_EPS or (
                    abs(ratio - best) <= _PIVOT_EPS and basis[i] < best_var
                ):
                    leaving, best, best_var = i, ratio, basis[i]
        if leaving < 0:
            raise RuntimeError("unbounded matrix-game LP; payoff shift failed")
        pivot = tab[leaving, entering]
        tab[leaving] /= pivot
        for i in range(rows):
            if i != leaving and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leaving]
        obj = obj - obj[entering] * np.concatenate([tab[leaving, :-1], [0.0]])
        basis[leaving] = entering
    raise RuntimeError("simplex pivot budget exhausted")


def _lp_solve(a: np.ndarray):
    """Value and strategies via the reciprocal LP, refined from the final basis."""
    rows, cols = a.shape
    shift = 1.0 + abs(float(a.min()))
    b = a + shift
    basis = _simplex_max(b)
    columns = np.hstack([b, np.eye(rows)])
    basis_matrix = columns[:, basis]
    xb = np.linalg.solve(basis_matrix, np.ones(rows))
    cb = np.array([1.0 if j < cols else 0.0 for j in basis])
    duals = np.linalg.solve(basis_matrix.T, cb)
    x = np.zeros(cols + rows)
    x[basis] = xb
    total = x[:cols].sum()
    inv_value = 1.0 / total
    blue = np.clip(x[:cols] * inv_value, 0.0, None)
    red = np.clip(duals * inv_value, 0.0, None)
    blue /= blue.sum()
    red /= red.sum()
    return inv_value - shift, red, blue


def _gains(a: np.ndarray, red: np.ndarray, blue: np.ndarray) -> float:
    current = red @ a @ blue
    return max((a @ blue).max() - current, current - (red @ a).min())


def _kernel_polish(a: np.ndarray):
    """Equilibrium by square-support enumeration; rescue for near-degenerate LPs.

    Every matrix game has an equilibrium on a square subkernel, so scanning
    support pairs and checking the equilibrium inequalities recovers optimal
    strategies the pivot tolerance blurred. Only reachable for games whose
    smaller side is tiny, which is all the solver ever builds.
    """
    rows, cols = a.shape
    scale = max(1.0, float(np.abs(a).max()))
    best = None
    for size in range(1, min(rows, cols, 6) + 1):
        for ridx in itertools.combinations(range(rows), size):
            for cidx in itertools.combinations(range(cols), size):
                kernel = a[np.ix_(ridx, cidx)]
                lhs = np.zeros((size + 1, size + 1))
                lhs[:size, :size] = kernel.T
                lhs[:size, size] = -1.0
                lhs[size, :size] = 1.0
                rhs = np.zeros(size + 1)
                rhs[size] = 1.0
                try:
                    x = np.linalg.solve(lhs, rhs)
                    lhs[:size, :size] = kernel
                    y = np.linalg.solve(lhs, rhs)
                except np.linalg.LinAlgError:
                    continue
                if x[:size].min() < -1e-9 or y[:size].min() < -1e-9:
                    continue
                red = np.zeros(rows)
                red[list(ridx)] = np.clip(x[:size], 0.0, None)
                blue = np.zeros(cols)
                blue[list(cidx)] = np.clip(y[:size], 0.0, None)
                red /= red.sum()
                blue /= blue.sum()
                gain = _gains(a, red, blue)
                if best is None or gain < best[0]:
                    best = (gain, float(red @ a @ blue), red, blue)
                if gain <= 1e-13 * scale:
                    return best[1:]
    return None if best is None else best[1:]


def _solve_array(a: np.ndarray):
    result = _saddle(a)
    if result is not None:
        return result
    if a.shape == (2, 2):
        return _mixed_2x2(a)
    value, red, blue = _lp_solve(a)
    # degenerate optima can leave the simplex one blurred pivot short of the
    # 1e-9 exploitability contract; polish those from exact support systems
    if _gains(a, red, blue) > 1e-10:
        polished = _kernel_polish(a)
        if polished is not None and _gains(a, *polished[1:]) < _gains(a, red, blue):
            return polished
    return value, red, blue


def _value_only(a: np.ndarray) -> float:
    # value-iteration hot path: skip strategy vectors while sweeping
    maximin = a.min(axis=1).max()
    minimax = a.max(axis=0).min()
    if maximin == minimax:
        return float(maximin)
    if a.shape == (2, 2):
        (p, q), (r, s) = a
        return float((p * s - q * r) / (p + s - q - r))
    return _lp_solve(a)[0]


def solve(payoff):
    """Value and optimal mixed strategies ``(value, red, blue)`` of a matrix game.

    ``red`` maximizes over rows, ``blue`` minimizes over columns. Degenerate
    games admit many optima; only optimality (near-zero exploitability) is
    guaranteed, not a particular strategy pair.
    """
    return _solve_array(_as_payoff(payoff))


def best_response(payoff, opponent, side: str):
    """Best pure reply ``(action index, payoff)`` against a mixed opponent.

    ``side`` names the responder; ties break to the lowest action index.
    """
    a = _as_payoff(payoff)
    opp = np.asarray(opponent, dtype=float)
    if side == "red":
        if opp.shape != (a.shape[1],):
            raise ValueError(f"blue strategy has length {opp.size}, need {a.shape[1]}")
        gains = a @ opp
        i = int(np.argmax(gains))
        return i, float(gains[i])
    if side == "blue":
        if opp.shape != (a.shape[0],):
            raise ValueError(f"red strategy has length {opp.size}, need {a.shape[0]}")
        costs = opp @ a
        j = int(np.argmin(costs))
        return j, float(costs[j])
    raise ValueError(f"side must be 'red' or 'blue', got {side!r}")


def exploitability(payoff, red, blue):
    """How much each player could gain by best-responding; (0, 0) at equilibrium."""
    a = _as_payoff(payoff)
    red = np.asarray(red, dtype=float)
    blue = np.asarray(blue, dtype=float)
    if red.shape != (a.shape[0],) or blue.shape != (a.shape[1],):
        raise ValueError("strategy dimensions do not match the payoff matrix")
    current = float(red @ a @ blue)
    red_gain = float((a @ blue).max() - current)
    blue_gain = float(current - (red @ a).min())
    return red_gain, blue_gain
