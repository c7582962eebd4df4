"""Numerical backend selection.

Hot kernels in :mod:`hawkeslob._kernels` are written once in plain
numpy/``math`` style and compiled with numba's ``@njit`` when available.
Selection happens at import time via the ``HAWKESLOB_BACKEND`` environment
variable:

* ``HAWKESLOB_BACKEND=numba`` (default when numba is importable): kernels
  are JIT-compiled with ``cache=True``.
* ``HAWKESLOB_BACKEND=numpy``: kernels run as ordinary Python functions.

Both paths execute the same source and the same libm calls, so simulation
output is bit-identical across backends (see ``tests/test_backends.py`` and
``benchmarks/backend_bench.py``).
"""

import os

_requested = os.environ.get("HAWKESLOB_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"HAWKESLOB_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

USE_NUMBA = _requested != "numpy"
if USE_NUMBA:
    try:
        from numba import njit as _numba_njit
    except ImportError:
        if _requested == "numba":
            raise
        USE_NUMBA = False

if USE_NUMBA:
    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)
else:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

BACKEND = "numba" if USE_NUMBA else "numpy"
