"""Kernel engine selection.

Two interchangeable implementations exist for the numeric hot spots
(kernel density estimation and voxel ray traversal): a numba-compiled
one and a pure numpy one.  The active engine is chosen once at import
from the ``AVSEARCH_ENGINE`` environment variable:

* ``numba``  - require the compiled kernels, fail if numba is missing
* ``numpy``  - force the pure numpy fallbacks
* unset / ``auto`` - use numba when importable, numpy otherwise

``select()`` switches engines at runtime, which the test suite and the
kernel benchmark use to compare both paths on identical inputs.
"""

import os

try:
    import numba  # noqa: F401
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

_active = None


def _resolve(name):
    if name in (None, "", "auto"):
        return "numba" if _HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError("unknown engine %r (expected numba, numpy or auto)" % name)
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("AVSEARCH_ENGINE=numba but numba is not importable")
    return name


def select(name):
    """Set the active engine ('numba', 'numpy' or 'auto'). Returns the result."""
    global _active
    _active = _resolve(name)
    return _active


def active():
    """Name of the engine currently in use."""
    global _active
    if _active is None:
        _active = _resolve(os.environ.get("AVSEARCH_ENGINE"))
    return _active


def kernels():
    """Return the module implementing the active engine's kernels."""
    if active() == "numba":
        from . import _kernels_numba
        return _kernels_numba
    from . import _kernels_numpy
    return _kernels_numpy
