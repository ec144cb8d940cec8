"""Ray-casting kernel selection.

The compiled extension is preferred when it built; set ARTMANIP_RAYCAST to
"numpy" or "cython" to force a backend (useful for the benchmark and for
debugging fallback behavior).
"""

from __future__ import annotations

import os

from . import raycast_numpy

_requested = os.environ.get("ARTMANIP_RAYCAST", "auto").lower()

_compiled = None
if _requested in ("auto", "cython"):
    try:
        from . import _raycast as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
        if _requested == "cython":
            raise ImportError(
                "ARTMANIP_RAYCAST=cython but the compiled kernel is not built; "
                "run `pip install -e . --no-build-isolation` or unset the variable"
            )

if _compiled is not None:
    BACKEND = "cython"
    cast_rays = _compiled.cast_rays
else:
    BACKEND = "numpy"
    cast_rays = raycast_numpy.cast_rays


def available_backends() -> dict:
    """Name -> cast_rays callable, for parity tests and benchmarks."""
    backends = {"numpy": raycast_numpy.cast_rays}
    if _compiled is not None:
        backends["cython"] = _compiled.cast_rays
    return backends
