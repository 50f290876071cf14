"""Kernel backend selection.

Hot loops are compiled with numba when it is importable and not disabled.
Set ``PHASEFORGE_NUMBA=0`` to force the pure-numpy path.  ``PHASEFORGE_THREADS``
caps the numba thread pool.
"""

import os

_FALSE = {"0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("PHASEFORGE_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _numba_requested()


def thread_cap():
    raw = os.environ.get("PHASEFORGE_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    return n if n >= 1 else None


if USE_NUMBA:
    _cap = thread_cap()
    if _cap is not None:
        numba.set_num_threads(min(_cap, numba.config.NUMBA_NUM_THREADS))

BACKEND = "numba" if USE_NUMBA else "numpy"
