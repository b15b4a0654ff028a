"""Hull-query backend selection.

The compiled kernel is preferred when present; the numpy fallback implements
the identical contract. Set CROSSPOLY_BACKEND=python (or =cython) to force a
backend; the default "auto" degrades silently to the fallback.
"""

import os

_choice = os.environ.get("CROSSPOLY_BACKEND", "auto").strip().lower()

if _choice in ("auto", "", "cython", "c", "compiled"):
    try:
        from . import _fwcore as _impl
        BACKEND = "cython"
    except ImportError:
        if _choice not in ("auto", ""):
            raise
        from . import fallback as _impl
        BACKEND = "python"
elif _choice in ("python", "py", "numpy"):
    from . import fallback as _impl
    BACKEND = "python"
else:
    raise ValueError(f"unknown CROSSPOLY_BACKEND value: {_choice!r}")

hull_distance_batch = _impl.hull_distance_batch
hull_member_batch = _impl.hull_member_batch

__all__ = ["BACKEND", "hull_distance_batch", "hull_member_batch"]
