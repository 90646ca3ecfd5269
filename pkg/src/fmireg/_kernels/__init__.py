"""Histogram kernel backend selection.

The compiled extension is used when present; the numpy fallback
otherwise.  Setting ``FMIREG_PURE_PYTHON=1`` in the environment forces
the fallback (used by the tests and the benchmark).
"""

import os

from . import reference

if os.environ.get("FMIREG_PURE_PYTHON"):
    _impl = reference
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "python"

accumulate = _impl.accumulate
warp_sample = reference.warp_sample

__all__ = ["BACKEND", "accumulate", "warp_sample", "reference"]
