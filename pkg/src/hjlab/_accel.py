"""Optional numba acceleration.

Set ``HJLAB_NO_NUMBA=1`` to force the pure-numpy kernels even when numba
is importable. The flag is read once at import time; ``use_numba`` can be
flipped afterwards for benchmarks and equivalence tests.
"""

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_DISABLED = os.environ.get("HJLAB_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

# mutable on purpose: benchmarks toggle it
state = {"use_numba": HAS_NUMBA and not _DISABLED}


def use_numba() -> bool:
    return state["use_numba"]


def set_numba(enabled: bool) -> None:
    state["use_numba"] = bool(enabled) and HAS_NUMBA


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba exists, identity otherwise."""
    if not HAS_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
