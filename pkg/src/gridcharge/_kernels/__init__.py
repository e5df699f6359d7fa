"""Bitmask kernels behind one interface.

The numba implementation is used when numba imports and the environment
variable ``GRIDCHARGE_NUMBA`` is not set to ``0``; otherwise the pure-numpy
versions run.  Both produce identical results.
"""
import os

from . import numpy_impl

BACKEND = "numpy"
_impl = numpy_impl

# the bundled TBB is often too old for numba; prefer the other layers
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

if os.environ.get("GRIDCHARGE_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off"):
    try:
        from . import numba_impl as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        pass

extend_level = _impl.extend_level
gather_bits = _impl.gather_bits
first_valid_by_weight = _impl.first_valid_by_weight


def get_backend(name):
    """Return the kernel module for ``"numpy"`` or ``"numba"``."""
    if name == "numpy":
        return numpy_impl
    if name == "numba":
        from . import numba_impl

        return numba_impl
    raise ValueError(f"unknown backend {name!r}")
