"""Element-kernel backend selection.

GREENDEC_BACKEND=numba  -> require the jitted kernels (error if unavailable)
GREENDEC_BACKEND=numpy  -> force the pure-numpy reference path
unset                   -> numba when importable, numpy otherwise
"""

from __future__ import annotations

import os

from .tables import mass_moments, point_moments, whitney_tables

_requested = os.environ.get("GREENDEC_BACKEND", "").strip().lower()

if _requested == "numpy":
    from . import numpy_impl as _impl
elif _requested == "numba":
    from . import numba_impl as _impl
elif _requested == "":
    try:
        from . import numba_impl as _impl
    except ImportError:  # pragma: no cover - depends on environment
        from . import numpy_impl as _impl
else:
    raise RuntimeError(
        f"GREENDEC_BACKEND={_requested!r} not recognised (use 'numba' or 'numpy')"
    )

BACKEND = _impl.BACKEND_NAME
simplex_geometry = _impl.simplex_geometry
whitney_blocks = _impl.whitney_blocks
warmup = _impl.warmup

__all__ = [
    "BACKEND",
    "simplex_geometry",
    "whitney_blocks",
    "warmup",
    "whitney_tables",
    "mass_moments",
    "point_moments",
]
