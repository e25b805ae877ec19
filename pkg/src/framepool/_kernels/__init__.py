"""Hot inner loops: the SVM dual solver and simplex pivoting.

The compiled ``_fast`` extension is used when it was built; otherwise, or
when ``FRAMEPOOL_PURE_PYTHON=1`` is set, the numpy twins in ``_pure`` are
used. ``BACKEND`` names the active implementation.
"""
import os

from . import _pure

if os.environ.get("FRAMEPOOL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:  # extension not built
        _impl = _pure

BACKEND = "cython" if _impl is not _pure else "python"

smo = _impl.smo
simplex_iterate = _impl.simplex_iterate
pivot = _impl.pivot

OPTIMAL = _pure.OPTIMAL
UNBOUNDED = _pure.UNBOUNDED
ITERATION_LIMIT = _pure.ITERATION_LIMIT


def available_backends():
    """Map backend name to kernel module, for tests and benchmarks."""
    out = {"python": _pure}
    try:
        from . import _fast
    except ImportError:
        pass
    else:
        out["cython"] = _fast
    return out
