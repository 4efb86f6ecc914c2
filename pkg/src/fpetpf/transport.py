"""Discrete Kantorovich problem for the ensemble transform.

The plan ``T`` minimises ``sum(T * D)`` subject to ``T >= 0``, column sums of
one and row sums ``n_e * w``.  It is solved with the transportation simplex
(MODI potentials on a spanning-tree basis), north-west-corner start and
Bland's smallest-index rule for both entering and leaving cells.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import FPETPFError, InvalidInput


@dataclass
class TransportPlan:
    matrix: np.ndarray
    objective: float
    row_potential: np.ndarray
    col_potential: np.ndarray
    iterations: int = 0

    def reduced_costs(self, cost):
        return cost - self.row_potential[:, None] - self.col_potential[None, :]


def check_weights(w, atol=1e-12):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or len(w) < 1:
        raise InvalidInput("weights must be a non-empty vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidInput("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > atol:
        raise InvalidInput(f"weights sum to {w.sum()!r}, expected 1")
    return w


def distance_matrix(states):
    """Pairwise Euclidean distances between flattened particle states."""
    X = np.stack([np.asarray(getattr(s, "q", s), dtype=float).ravel() for s in states])
    if len(X) < 2:
        raise InvalidInput("need at least two particles")
    return squareform(pdist(X, "euclidean"))


def _northwest_corner(supply, demand):
    n, m = len(supply), len(demand)
    a = supply.copy()
    b = demand.copy()
    X = np.zeros((n, m))
    basic = np.zeros((n, m), dtype=bool)
    i = j = 0
    for _ in range(n + m - 1):
        v = min(a[i], b[j])
        X[i, j] = v
        basic[i, j] = True
        a[i] -= v
        b[j] -= v
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return X, basic


def _potentials(cost, basic):
    n, m = cost.shape
    u = np.full(n, np.nan)
    v = np.full(m, np.nan)
    u[0] = 0.0
    rows, cols = np.nonzero(basic)
    by_row = [[] for _ in range(n)]
    by_col = [[] for _ in range(m)]
    for r, c in zip(rows, cols):
        by_row[r].append(c)
        by_col[c].append(r)
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for c in by_row[k]:
                if np.isnan(v[c]):
                    v[c] = cost[k, c] - u[k]
                    queue.append(("c", c))
        else:
            for r in by_col[k]:
                if np.isnan(u[r]):
                    u[r] = cost[r, k] - v[k]
                    queue.append(("r", r))
    if np.isnan(u).any() or np.isnan(v).any():
        raise FPETPFError("transport basis is not a spanning tree")
    return u, v


def _tree_path(basic, start_col, goal_row):
    """Cells on the basis-tree path from column node ``start_col`` to row node ``goal_row``."""
    n, m = basic.shape
    # nodes: rows 0..n-1, columns n..n+m-1
    parent = {n + start_col: None}
    queue = deque([n + start_col])
    while queue:
        node = queue.popleft()
        if node == goal_row:
            break
        if node < n:
            nbrs = [n + c for c in np.flatnonzero(basic[node])]
        else:
            nbrs = list(np.flatnonzero(basic[:, node - n]))
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    cells = []
    node = goal_row
    while parent[node] is not None:
        prev = parent[node]
        r, c = (node, prev - n) if node < n else (prev, node - n)
        cells.append((r, c))
        node = prev
    return cells[::-1]


def solve_transport(cost, w_a, max_iter=None):
    """Optimal plan with column sums 1 and row sums ``len(w_a) * w_a``."""
    D = np.asarray(cost, dtype=float)
    w = check_weights(w_a)
    n = len(w)
    if D.shape != (n, n):
        raise InvalidInput(f"cost matrix shape {D.shape} does not match {n} weights")
    if np.any(D < 0) or not np.all(np.isfinite(D)):
        raise InvalidInput("cost matrix must be finite and nonnegative")
    supply = n * w
    supply *= n / supply.sum()
    demand = np.ones(n)
    X, basic = _northwest_corner(supply, demand)

    tol = 1e-12 * max(1.0, float(D.max()))
    max_iter = max_iter or 50 * n * n + 100
    for it in range(max_iter):
        u, v = _potentials(D, basic)
        reduced = D - u[:, None] - v[None, :]
        candidates = np.flatnonzero((reduced < -tol) & ~basic)
        if len(candidates) == 0:
            break
        er, ec = divmod(int(candidates[0]), n)
        cycle = [(er, ec)] + _tree_path(basic, ec, er)
        minus = cycle[1::2]
        theta = min(X[c] for c in minus)
        leaving = min((c for c in minus if X[c] == theta), key=lambda c: c[0] * n + c[1])
        for k, c in enumerate(cycle):
            X[c] += theta if k % 2 == 0 else -theta
        X[leaving] = 0.0
        basic[leaving] = False
        basic[er, ec] = True
    else:
        raise FPETPFError(f"transport simplex did not converge in {max_iter} iterations")
    X[np.abs(X) < 1e-15] = 0.0
    return TransportPlan(X, float(np.sum(X * D)), u, v, it)
