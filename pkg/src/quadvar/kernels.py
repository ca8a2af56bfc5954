"""Backend selection for the hot loops.

numba is used when importable unless ``QUADVAR_DISABLE_NUMBA`` is set to a
truthy value, in which case the pure numpy versions are used. The flag is
read once at import time.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("QUADVAR_DISABLE_NUMBA", "").strip().lower()

if _FLAG in ("", "0", "false", "no"):
    try:
        # try OpenMP before TBB: the system TBB can be older than numba accepts
        os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")
        from . import _numba_kernels as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is optional at runtime
        from . import _numpy_kernels as _impl

        BACKEND = "numpy"
else:
    from . import _numpy_kernels as _impl

    BACKEND = "numpy"

kloosterman_block = _impl.kloosterman_block
kloosterman_grid = _impl.kloosterman_grid
twisted_accumulate = _impl.twisted_accumulate
gauss_all_uv = _impl.gauss_all_uv
bessel_table = _impl.bessel_table
trace_block = _impl.trace_block


def set_threads(n: int | None) -> int:
    """Cap worker threads for parallel kernels; returns the count in effect.

    Results never depend on this value: parallel loops write per-index slots
    that are reduced in index order afterwards.
    """
    if BACKEND != "numba":
        return 1
    import numba

    limit = numba.config.NUMBA_NUM_THREADS
    count = limit if n is None else max(1, min(int(n), limit))
    numba.set_num_threads(count)
    return count
