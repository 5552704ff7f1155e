"""Backend selection for the hot tilted-Gaussian kernels.

The compiled extension is used when it is importable; otherwise the NumPy
implementation serves as a drop-in fallback.  Set QCS_PURE_PY=1 to force
the fallback (used by the backend-parity tests and the benchmark).
"""

import os

from ._pure import DegenerateIntervalError
from ._pure import tilted_interval_stats as _pure_stats

if os.environ.get("QCS_PURE_PY"):
    BACKEND = "pure"
    tilted_interval_stats = _pure_stats
else:
    try:
        from ._tilted import tilted_interval_stats  # noqa: F401

        BACKEND = "compiled"
    except ImportError:
        BACKEND = "pure"
        tilted_interval_stats = _pure_stats

__all__ = ["BACKEND", "DegenerateIntervalError", "tilted_interval_stats", "available_backends"]


def available_backends() -> dict:
    """Name -> kernel for every importable backend (used by parity tests)."""
    out = {"pure": _pure_stats}
    try:
        from . import _tilted

        out["compiled"] = _tilted.tilted_interval_stats
    except ImportError:
        pass
    return out
