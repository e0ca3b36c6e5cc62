"""Convolution kernels with a compiled fast path and a numpy fallback.

The Cython extension `_convops` is built at install time when a compiler
is available; otherwise (or when SCENESYNTH_KERNELS=numpy is set) the
pure-numpy im2col implementation is used. Both backends implement the
same three functions and are cross-checked in the test suite; see
benchmarks/bench_kernels.py for a speed comparison.
"""

from __future__ import annotations

import os

from . import numpy_backend

_requested = os.environ.get("SCENESYNTH_KERNELS", "auto").strip().lower()
if _requested not in ("auto", "numpy", "compiled"):
    raise ValueError(f"SCENESYNTH_KERNELS must be auto|numpy|compiled, got {_requested!r}")

_impl = None
backend = "numpy"
if _requested in ("auto", "compiled"):
    try:
        from . import _convops as _impl  # type: ignore[attr-defined]

        backend = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
if _impl is None:
    _impl = numpy_backend

conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_kernel = _impl.conv2d_backward_kernel


def get_backend(name: str = "auto"):
    """Return the module implementing the kernel API for `name`."""
    if name == "numpy":
        return numpy_backend
    if name == "compiled":
        from . import _convops  # type: ignore[attr-defined]

        return _convops
    return _impl
