"""Numba switch.

Set ``ORLICZ_DYNAMICS_DISABLE_NUMBA=1`` to run every kernel as plain
Python/numpy (useful for debugging and for the benchmark baseline).
"""

import os
import types

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("ORLICZ_DYNAMICS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

NUMBA_ENABLED = numba is not None and not _DISABLED


def njit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def py_func(fn):
    """Return the uncompiled Python body of a kernel (itself if not jitted)."""
    return getattr(fn, "py_func", fn)


def python_twin(module):
    """Copy of ``module`` whose jitted functions are replaced by their Python bodies.

    Calls between kernels resolve inside the copy, so a twin kernel accepts plain
    Python callables as evaluators.
    """
    twin = types.ModuleType(module.__name__ + "._python")
    ns = twin.__dict__
    for name, obj in vars(module).items():
        if name.startswith("__"):
            continue
        raw = getattr(obj, "py_func", obj)
        if isinstance(raw, types.FunctionType) and raw.__module__ == module.__name__:
            raw = types.FunctionType(raw.__code__, ns, raw.__name__, raw.__defaults__, raw.__closure__)
        ns[name] = raw
    return twin
