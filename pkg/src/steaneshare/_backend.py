"""Kernel backend selection.

``STEANESHARE_BACKEND`` picks the implementation of the hot kernels:

* ``auto`` (default) - numba when importable, else pure numpy
* ``numba``          - require the numba kernels
* ``numpy``          - force the pure-numpy fallback
"""

import os


def _load():
    choice = os.environ.get("STEANESHARE_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"STEANESHARE_BACKEND={choice!r}; expected auto, numba, or numpy"
        )
    if choice in ("auto", "numba"):
        try:
            from . import _kernels_numba as mod

            return mod, "numba"
        except ImportError:
            if choice == "numba":
                raise
    from . import _kernels_numpy as mod

    return mod, "numpy"


kernels, BACKEND_NAME = _load()


def active_backend() -> str:
    """Name of the kernel backend actually in use."""
    return BACKEND_NAME
