"""Scalar diagnostics: ensemble error, feature counts, shock location, blast rings."""

import numpy as np
from scipy import ndimage

from ..errors import ConfigError, InvalidInput


def relative_avg_error(particles, truth):
    """Mean particle distance to truth, relative to the truth norm."""
    t = np.asarray(getattr(truth, "q", truth), dtype=float).ravel()
    norm = np.linalg.norm(t)
    if norm == 0.0:
        raise ConfigError("relative error undefined for a zero truth state")
    dist = [np.linalg.norm(t - np.asarray(getattr(p, "q", p), dtype=float).ravel()) for p in particles]
    return float(np.sum(dist) / (len(dist) * norm))


def feature_count(field, threshold):
    """Number of maximal runs of ``|backward difference| > threshold``."""
    if not threshold > 0:
        raise InvalidInput("threshold must be positive")
    d = np.abs(np.diff(np.asarray(field, dtype=float))) > threshold
    if not d.any():
        return 0
    return int(d[0]) + int(np.count_nonzero(d[1:] & ~d[:-1]))


def max_jump(field):
    return float(np.max(np.abs(np.diff(np.asarray(field, dtype=float)))))


def shock_position(rho, threshold):
    """Index of the rightmost strong density jump (node right of the jump).

    Within the rightmost run of ``|diff| > threshold`` the steepest cell wins.
    """
    d = np.abs(np.diff(np.asarray(rho, dtype=float)))
    above = np.flatnonzero(d > threshold)
    if len(above) == 0:
        return None
    end = above[-1]
    start = end
    while start - 1 >= 0 and d[start - 1] > threshold:
        start -= 1
    return int(start + np.argmax(d[start:end + 1]) + 1)


def gradient_magnitude(field):
    """Backward-difference gradient magnitude with a zero first row/column."""
    a = np.asarray(field, dtype=float)
    g = np.zeros_like(a)
    dx = a[1:, 1:] - a[:-1, 1:]
    dy = a[1:, 1:] - a[1:, :-1]
    g[1:, 1:] = np.sqrt(dx * dx + dy * dy)
    return g


_EIGHT = np.ones((3, 3), dtype=bool)


def ring_structure(mask, min_hole=4):
    """(connected components, enclosed holes) of a boolean front mask.

    Components use 8-connectivity; holes are 4-connected background regions
    not touching the border with at least ``min_hole`` cells.
    """
    mask = np.asarray(mask, dtype=bool)
    _, n_comp = ndimage.label(mask, structure=_EIGHT)
    bg, n_bg = ndimage.label(~mask)
    border = set(np.unique(np.concatenate([bg[0], bg[-1], bg[:, 0], bg[:, -1]]))) - {0}
    sizes = ndimage.sum_labels(np.ones_like(bg), bg, index=np.arange(1, n_bg + 1))
    holes = sum(1 for lab, size in zip(range(1, n_bg + 1), sizes) if lab not in border and size >= min_hole)
    return int(n_comp), int(holes)


def is_single_ring(field, threshold, min_hole=4):
    comp, holes = ring_structure(gradient_magnitude(field) > threshold, min_hole)
    return comp == 1 and holes == 1
