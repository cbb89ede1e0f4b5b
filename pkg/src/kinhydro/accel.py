"""Kernel acceleration plumbing.

The quadrature-heavy kernels (collision sums, operator assembly) exist in two
implementations: explicit loops compiled with numba, and a vectorized pure
numpy fallback.  Selection order:

* ``KINHYDRO_NO_NUMBA=1`` in the environment forces the numpy path;
* otherwise numba is used when importable, numpy when not.

``active_backend()`` reports which path won; the benchmark script in
``bench/`` compares the two.
"""

import os

FORCE_NUMPY = os.environ.get("KINHYDRO_NO_NUMBA", "") not in ("", "0")

if not FORCE_NUMPY:
    try:
        import numba

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not FORCE_NUMPY


def njit(*args, **kwargs):
    """numba.njit when active, identity decorator otherwise."""
    if USE_NUMBA:
        import numba

        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def deco(fn):
        return fn

    return deco


def active_backend():
    return "numba" if USE_NUMBA else "numpy"
