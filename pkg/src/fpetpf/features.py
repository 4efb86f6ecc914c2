"""Difference-quotient feature fields used as alignment inputs."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput


@dataclass
class FeatureField:
    values: np.ndarray
    # (source name, coefficient) pairs that produced ``values``
    provenance: tuple = field(default=(("field", 1.0),))


def _as_array(f, ndim):
    a = np.asarray(f, dtype=float)
    if a.ndim != ndim:
        raise InvalidInput(f"expected a {ndim}D field, got shape {a.shape}")
    if any(n < 2 for n in a.shape):
        raise InvalidInput(f"need at least 2 nodes per axis, got shape {a.shape}")
    return a


def extract_1d(field, name="field"):
    """Backward differences with a leading zero (ghost node equal to the first value)."""
    a = _as_array(field, 1)
    z = np.zeros_like(a)
    z[1:] = a[1:] - a[:-1]
    return FeatureField(z, ((name, 1.0),))


def extract_2d(field, name="field"):
    """Mixed backward difference; first row and first column are zero."""
    a = _as_array(field, 2)
    z = np.zeros_like(a)
    z[1:, 1:] = a[1:, 1:] - a[:-1, 1:] - (a[1:, :-1] - a[:-1, :-1])
    return FeatureField(z, ((name, 1.0),))


def extract(field, name="field"):
    a = np.asarray(field)
    if a.ndim == 1:
        return extract_1d(a, name)
    if a.ndim == 2:
        return extract_2d(a, name)
    raise InvalidInput(f"features are defined for 1D and 2D fields, got {a.ndim}D")


def extract_weighted(fields):
    """Coefficient-weighted sum of per-field features.

    ``fields`` is a sequence of ``(array, coefficient)`` or
    ``(array, coefficient, name)`` tuples sharing one shape.
    """
    fields = list(fields)
    if not fields:
        raise InvalidInput("no fields given")
    shape = np.shape(fields[0][0])
    if not any(float(entry[1]) != 0.0 for entry in fields):
        raise InvalidInput("at least one coefficient must be nonzero")
    total = None
    prov = []
    for k, entry in enumerate(fields):
        arr, coef = entry[0], float(entry[1])
        name = entry[2] if len(entry) > 2 else f"field{k}"
        if np.shape(arr) != shape:
            raise InvalidInput(f"field {name} has shape {np.shape(arr)}, expected {shape}")
        term = coef * extract(arr, name).values
        total = term if total is None else total + term
        prov.append((name, coef))
    return FeatureField(total, tuple(prov))


def density_features(state):
    """Default feature source: density of a FlowState."""
    return extract(state.rho, "rho")
