"""Optional numba acceleration.

Hot kernels are written twice: a loop form compiled with ``numba.njit`` and a
vectorised numpy form.  The loop form is used when numba imports and the
environment variable ``FPETPF_DISABLE_NUMBA`` is unset (or ``0``).  Both forms
stay importable so tests and benchmarks can compare them directly.
"""

import os

_flag = os.environ.get("FPETPF_DISABLE_NUMBA", "0").strip().lower()
DISABLED_BY_ENV = _flag not in ("", "0", "false", "no")

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by FPETPF_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True, ...)`` when numba is active, identity otherwise."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    return wrap(fn) if fn is not None else wrap
