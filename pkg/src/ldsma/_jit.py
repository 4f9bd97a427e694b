"""JIT compilation switch for the hot numeric kernels.

The kernels in :mod:`ldsma.kernels` are written as plain numpy loops and
decorated with ``@njit``. Setting the environment variable ``LDSMA_NUMBA``
to ``0``/``false``/``off`` before import replaces the decorator with a
no-op, so the same code runs under the Python interpreter (useful for
debugging and as a dependency-free fallback). When numba is not importable
the fallback is selected automatically.
"""

import os

_FLAG = os.environ.get("LDSMA_NUMBA", "1").strip().lower()
JIT_ENABLED = _FLAG not in ("0", "false", "off", "no")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
