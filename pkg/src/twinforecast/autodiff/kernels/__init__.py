"""Kernel backend selection.

Two interchangeable implementations of the hot recurrence kernels exist: a
compiled Cython extension and a NumPy fallback.  The extension is preferred
when importable; ``TWINFORECAST_KERNELS`` overrides the choice (``auto``,
``cython`` or ``numpy``).  Every other operation in the engine is
matmul-shaped and already runs on BLAS either way.
"""

import os
import warnings

from . import numpy_backend

_cython_backend = None
try:
    from . import _cykernels as _cython_backend  # type: ignore[no-redef]
except ImportError:
    _cython_backend = None


def available_backends():
    names = [numpy_backend.NAME]
    if _cython_backend is not None:
        names.insert(0, _cython_backend.NAME)
    return names


def get_backend(name):
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        if _cython_backend is None:
            raise ImportError("compiled kernels are not available in this install")
        return _cython_backend
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    requested = os.environ.get("TWINFORECAST_KERNELS", "auto").lower()
    if requested == "auto":
        return _cython_backend if _cython_backend is not None else numpy_backend
    try:
        return get_backend(requested)
    except ImportError:
        warnings.warn(
            "TWINFORECAST_KERNELS=cython requested but the extension is not "
            "built; using the NumPy kernels",
            RuntimeWarning,
            stacklevel=2,
        )
        return numpy_backend


active = _select()


def active_backend():
    return active.NAME
