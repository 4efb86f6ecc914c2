"""Dynamic time warping of feature sequences.

Indices are 0-based.  The dynamic program keeps two rows of accumulated cost
and packs the backtracking move of every cell into 2 bits, so memory is
about ``n * m / 4`` bytes.

Backtracking moves: 0 diagonal, 1 advance the first sequence only, 2 advance
the second sequence only.  Equal-cost predecessors resolve in that order.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from ._accel import HAVE_NUMBA, njit
from .errors import InvalidInput, InvalidPath

DIAG, UP, LEFT = 0, 1, 2


@dataclass
class AlignmentPath:
    """Monotone matching ``pairs[k] = (i, j)`` between two sequences."""

    pairs: np.ndarray
    distance: float = np.nan
    q: float = 2.0

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)

    def __len__(self):
        return len(self.pairs)

    @property
    def first(self):
        return self.pairs[:, 0]

    @property
    def second(self):
        return self.pairs[:, 1]

    @classmethod
    def identity(cls, n, q=2.0):
        k = np.arange(n)
        return cls(np.stack([k, k], axis=1), 0.0, q)

    def is_identity(self):
        return bool(np.array_equal(self.pairs[:, 0], self.pairs[:, 1]))

    def reversed_roles(self):
        return AlignmentPath(self.pairs[:, ::-1].copy(), self.distance, self.q)


@dataclass
class AlignmentPath2D:
    """Separable 2D alignment: ``rows`` matches axis 0, ``cols`` matches axis 1."""

    rows: AlignmentPath
    cols: AlignmentPath

    def is_identity(self):
        return self.rows.is_identity() and self.cols.is_identity()


def delannoy(m, n):
    """Delannoy number ``sum_k C(m,k) C(n,k) 2^k``.

    Counts alignment paths between sequences of lengths ``m + 1`` and ``n + 1``.
    """
    return sum(comb(m, k) * comb(n, k) * 2 ** k for k in range(min(m, n) + 1))


def validate_path(path, n, m):
    """True iff ``path`` is a valid alignment between lengths ``n`` and ``m``."""
    pairs = path.pairs if isinstance(path, AlignmentPath) else np.asarray(path)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or len(pairs) == 0:
        return False
    if n < 1 or m < 1:
        return False
    if tuple(pairs[0]) != (0, 0) or tuple(pairs[-1]) != (n - 1, m - 1):
        return False
    steps = np.diff(pairs, axis=0)
    if steps.size and (steps.min() < 0 or steps.max() > 1 or np.any(steps.sum(axis=1) == 0)):
        return False
    return max(n, m) <= len(pairs) <= n + m - 1


def _as_sequence(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1:
        raise InvalidInput(f"sequence must be non-empty 1D or (length, dim) array, got shape {a.shape}")
    return np.ascontiguousarray(a)


def element_costs(a, b, pairs, q):
    """``||a_i - b_j||^q`` for each index pair."""
    diff = a[pairs[:, 0]] - b[pairs[:, 1]]
    if diff.shape[1] == 1:
        norm = np.abs(diff[:, 0])
    else:
        norm = np.sqrt(np.sum(diff * diff, axis=1))
    return norm ** q


def aligned_distance(a, b, path, q=2.0):
    """Aligned q-norm distance of two sequences along ``path``."""
    a = _as_sequence(a)
    b = _as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise InvalidInput("sequence elements differ in dimension")
    if not validate_path(path, len(a), len(b)):
        raise InvalidPath(f"path is not a valid alignment for lengths ({len(a)}, {len(b)})")
    total = 0.0
    for c in element_costs(a, b, path.pairs, q):
        total += c
    return total ** (1.0 / q)


# ---------------------------------------------------------------------------
# Dynamic programming kernels.  Both return (accumulated cost, packed moves).
# ---------------------------------------------------------------------------

@njit
def _cell_cost(a, b, i, j, q):
    k = a.shape[1]
    if k == 1:
        norm = abs(a[i, 0] - b[j, 0])
    else:
        s = 0.0
        for d in range(k):
            diff = a[i, d] - b[j, d]
            s += diff * diff
        norm = np.sqrt(s)
    return norm ** q


@njit
def dtw_table_loop(a, b, q):
    n = a.shape[0]
    m = b.shape[0]
    moves = np.zeros((n, (m + 3) // 4), dtype=np.uint8)
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            best = prev[j - 1]
            move = 0
            if prev[j] < best:
                best = prev[j]
                move = 1
            if cur[j - 1] < best:
                best = cur[j - 1]
                move = 2
            cur[j] = _cell_cost(a, b, i - 1, j - 1, q) + best
            jj = j - 1
            moves[i - 1, jj >> 2] |= np.uint8(move << ((jj & 3) * 2))
        prev, cur = cur, prev
    return prev[m], moves


def dtw_table_numpy(a, b, q):
    """Anti-diagonal wavefront form of the same recurrence."""
    n, m = len(a), len(b)
    moves = np.zeros((n, (m + 3) // 4), dtype=np.uint8)
    inf = np.inf
    # diagonal arrays indexed by first-sequence index i in 0..n (cell (i, s - i))
    d2 = np.full(n + 1, inf)
    d1 = np.full(n + 1, inf)
    d2[0] = 0.0  # s = 0; s = 1 holds only boundary cells
    for s in range(2, n + m + 1):
        lo = max(1, s - m)
        hi = min(n, s - 1)
        cur = np.full(n + 1, inf)
        if lo <= hi:
            i = np.arange(lo, hi + 1)
            j = s - i
            diag = d2[i - 1]
            up = d1[i - 1]
            left = d1[i]
            best = diag
            move = np.zeros(len(i), dtype=np.uint8)
            take = up < best
            best = np.where(take, up, best)
            move[take] = UP
            take = left < best
            best = np.where(take, left, best)
            move[take] = LEFT
            diff = a[i - 1] - b[j - 1]
            if diff.shape[1] == 1:
                norm = np.abs(diff[:, 0])
            else:
                norm = np.sqrt(np.sum(diff * diff, axis=1))
            cur[i] = norm ** q + best
            jj = j - 1
            # one cell per row on a diagonal, so the fancy index has no repeats
            moves[i - 1, jj >> 2] |= (move << ((jj & 3) * 2)).astype(np.uint8)
        d2, d1 = d1, cur
    return d1[n], moves


@njit
def backtrack(moves, n, m):
    out = np.empty((n + m - 1, 2), dtype=np.int64)
    i = n - 1
    j = m - 1
    k = 0
    while True:
        out[k, 0] = i
        out[k, 1] = j
        k += 1
        if i == 0 and j == 0:
            break
        if i == 0:
            j -= 1
            continue
        if j == 0:
            i -= 1
            continue
        move = (moves[i, j >> 2] >> ((j & 3) * 2)) & 3
        if move == 0:
            i -= 1
            j -= 1
        elif move == 1:
            i -= 1
        else:
            j -= 1
    return out[:k][::-1].copy()


def _dtw_table(a, b, q):
    if HAVE_NUMBA:
        return dtw_table_loop(a, b, float(q))
    return dtw_table_numpy(a, b, float(q))


def dtw_1d(a, b, q=2.0):
    """Optimal global alignment of two sequences (scalar or vector elements)."""
    a = _as_sequence(a)
    b = _as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise InvalidInput("sequence elements differ in dimension")
    total, moves = _dtw_table(a, b, q)
    pairs = backtrack(moves, len(a), len(b))
    return AlignmentPath(pairs, float(total) ** (1.0 / q), q)


def dtw_2d(A, B, q=2.0):
    """Separable image warping: columns as elements, then rows as elements."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape != B.shape:
        raise InvalidInput(f"need two equal-shape matrices, got {A.shape} and {B.shape}")
    cols = dtw_1d(A.T, B.T, q)
    rows = dtw_1d(A, B, q)
    return AlignmentPath2D(rows=rows, cols=cols)
