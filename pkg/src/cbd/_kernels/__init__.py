"""Hot loops: exact simplex pivoting and V-linked closure.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used.  Set ``CBD_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernel as python_kernel

compiled_kernel = None
if os.environ.get("CBD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel as compiled_kernel
    except ImportError:  # extension not built
        compiled_kernel = None

active = compiled_kernel or python_kernel
BACKEND = "cython" if compiled_kernel is not None else "python"

OPTIMAL = python_kernel.OPTIMAL
UNBOUNDED = python_kernel.UNBOUNDED
OVERFLOW = python_kernel.OVERFLOW

__all__ = ["active", "python_kernel", "compiled_kernel", "BACKEND", "OPTIMAL", "UNBOUNDED", "OVERFLOW"]
