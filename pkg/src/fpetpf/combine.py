"""Aligned convex combination of two flow states along an alignment path.

Each matched index pair contributes one interpolation knot: the abscissa is
the blended index ``alpha*i + (1-alpha)*j`` and the ordinate the blended
value ``alpha*f[i] + (1-alpha)*g[j]``.  The combined field samples the knots
at the integer grid indices, by nearest neighbour unless asked otherwise.
"""

import numpy as np

from .dtw import AlignmentPath, AlignmentPath2D, dtw_1d, dtw_2d, validate_path
from .errors import InvalidInput, InvalidPath, TimeMismatch
from .euler import FlowState
from .features import extract

INTERPOLATIONS = ("nearest", "linear")


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInput(f"mixing coefficient must lie in [0, 1], got {alpha}")
    return alpha


def _blend(alpha, f, g):
    # clipping only absorbs rounding, so f == g reproduces f exactly
    out = alpha * f + (1.0 - alpha) * g
    return np.clip(out, np.minimum(f, g), np.maximum(f, g))


def nearest_knot(abscissae, queries):
    """Index of the nearest knot for every query.

    ``abscissae`` must be non-decreasing.  Repeated abscissae resolve to the
    first knot carrying them; a query equidistant from two knots takes the
    left one.
    """
    xs, first = np.unique(abscissae, return_index=True)
    pos = np.searchsorted(xs, queries, side="left")
    right = np.clip(pos, 0, len(xs) - 1)
    left = np.clip(pos - 1, 0, len(xs) - 1)
    take_left = (queries - xs[left]) <= (xs[right] - queries)
    take_left |= pos == len(xs)
    take_left &= pos > 0
    return first[np.where(take_left, left, right)]


def _knots(path, alpha):
    return alpha * path.first + (1.0 - alpha) * path.second


def aligned_add_field_1d(f, g, alpha, path, interpolation="nearest"):
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    alpha = _check_alpha(alpha)
    if f.ndim != 1 or f.shape != g.shape:
        raise InvalidInput(f"need two equal-length 1D fields, got {f.shape} and {g.shape}")
    n = len(f)
    if not validate_path(path, n, n):
        raise InvalidPath(f"path is not a valid alignment for length {n}")
    x = _knots(path, alpha)
    y = _blend(alpha, f[path.first], g[path.second])
    queries = np.arange(n, dtype=float)
    if interpolation == "nearest":
        return y[nearest_knot(x, queries)]
    if interpolation == "linear":
        xs, first = np.unique(x, return_index=True)
        return np.interp(queries, xs, y[first])
    raise InvalidInput(f"interpolation must be one of {INTERPOLATIONS}")


def aligned_add_field_2d(F, G, alpha, path2d, interpolation="nearest"):
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    alpha = _check_alpha(alpha)
    if F.ndim != 2 or F.shape != G.shape:
        raise InvalidInput(f"need two equal-shape 2D fields, got {F.shape} and {G.shape}")
    nx, ny = F.shape
    rows, cols = path2d.rows, path2d.cols
    if not validate_path(rows, nx, nx) or not validate_path(cols, ny, ny):
        raise InvalidPath(f"row/column paths invalid for shape {F.shape}")
    if interpolation != "nearest":
        raise InvalidInput("2D aligned addition supports nearest-neighbour sampling only")
    r = nearest_knot(_knots(rows, alpha), np.arange(nx, dtype=float))
    c = nearest_knot(_knots(cols, alpha), np.arange(ny, dtype=float))
    fi, gi = rows.first[r][:, None], rows.second[r][:, None]
    fj, gj = cols.first[c][None, :], cols.second[c][None, :]
    return _blend(alpha, F[fi, fj], G[gi, gj])


def aligned_add_state(x, xh, alpha, path, interpolation="nearest"):
    """Apply one shared path and coefficient to every conserved variable."""
    if x.grid != xh.grid:
        raise InvalidInput("states live on different grids")
    if x.t != xh.t:
        raise TimeMismatch(f"cannot combine states at t={x.t} and t={xh.t}")
    if isinstance(path, AlignmentPath2D):
        add = lambda f, g: aligned_add_field_2d(f, g, alpha, path, interpolation)  # noqa: E731
    else:
        add = lambda f, g: aligned_add_field_1d(f, g, alpha, path, interpolation)  # noqa: E731
    q = np.stack([add(f, g) for f, g in zip(x.q, xh.q)])
    return FlowState(x.grid, q, x.t)


def optimal_path(x, xh, q=2.0):
    """DTW alignment of the density features of two states."""
    zx = extract(x.rho).values
    zh = extract(xh.rho).values
    if x.grid.ndim == 1:
        return dtw_1d(zx, zh, q)
    return dtw_2d(zx, zh, q)


def aligned_pair_combine(x, xh, alpha, q=2.0, interpolation="nearest"):
    """Feature-aligned convex combination ``x (+)_{alpha, pi*} xh``."""
    path = optimal_path(x, xh, q)
    return aligned_add_state(x, xh, alpha, path, interpolation)
