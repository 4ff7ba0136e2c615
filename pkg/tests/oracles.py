"""Independent brute-force references used to pin down library outputs."""

import itertools

import numpy as np


def min_weighted_sum_lp(bounds, l, weights, tol=1e-9):
    """Exhaustive vertex enumeration for min weights @ R over
    {R >= 0, sum_{i in S} R_i >= bounds[S] for all nonempty S}.

    Builds every choice of l active constraints, solves the linear system,
    keeps feasible vertices, and returns the best value. Only meant for
    small l.
    """
    w = np.asarray(weights, dtype=float)
    rows = []
    rhs = []
    for mask in range(1, 1 << l):
        rows.append([(mask >> i) & 1 for i in range(l)])
        rhs.append(bounds[mask])
    for i in range(l):
        unit = [0.0] * l
        unit[i] = 1.0
        rows.append(unit)
        rhs.append(0.0)
    rows = np.asarray(rows, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    best = None
    for combo in itertools.combinations(range(rows.shape[0]), l):
        a = rows[list(combo)]
        b = rhs[list(combo)]
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if np.any(rows @ x < rhs - tol):
            continue
        val = float(w @ x)
        if best is None or val < best:
            best = val
    return best
