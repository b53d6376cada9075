"""Sweep kernels for the propagation fixed-point iteration.

A compiled Cython kernel is preferred when the extension built; otherwise
a vectorized numpy implementation is used.  Set PRODNET_FORCE_NUMPY=1 to
skip the extension (useful for benchmarking the fallback).
"""

import os

from . import _numpy

if os.environ.get("PRODNET_FORCE_NUMPY"):
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _sweep as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _numpy
        BACKEND = "numpy"

downstream_sweep = _impl.downstream_sweep
upstream_sweep = _impl.upstream_sweep


def backends():
    """Name -> module mapping of every importable kernel backend."""
    found = {"numpy": _numpy}
    try:
        from . import _sweep

        found["cython"] = _sweep
    except ImportError:
        pass
    return found
