"""Backend selection for the exit-time walkers.

The compiled extension is used when it was built; otherwise the numpy
fallback is. Setting ``COTLAR_BACKEND=numpy`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "numpy"
strip_walk = _fallback.strip_walk
halfplane_walk = _fallback.halfplane_walk

if os.environ.get("COTLAR_BACKEND", "").lower() != "numpy":
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        strip_walk = _kernels.strip_walk
        halfplane_walk = _kernels.halfplane_walk

BACKENDS = {"numpy": _fallback}
try:
    from . import _kernels as _compiled

    BACKENDS["cython"] = _compiled
except ImportError:
    pass

__all__ = ["BACKEND", "BACKENDS", "strip_walk", "halfplane_walk"]
