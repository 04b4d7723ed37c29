"""Numba switch.

Hot kernels exist in two flavours: a loop version compiled with numba and a
vectorised numpy version. ``L4SPARSIFY_NUMBA=0`` forces the numpy path; the
numpy path is also used when numba cannot be imported.
"""
import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit


def numba_enabled():
    """True when kernels should dispatch to the numba versions."""
    flag = os.environ.get("L4SPARSIFY_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")
