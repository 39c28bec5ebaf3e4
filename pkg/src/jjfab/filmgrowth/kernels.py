"""Selects the compiled growth kernel when available, else the pure-Python one.

Set ``JJFAB_KERNEL=python`` to force the fallback.
"""

import os

from . import _kernel_py

python_kernel = _kernel_py

try:
    from . import _kernel as compiled_kernel
except ImportError:  # extension not built
    compiled_kernel = None

if compiled_kernel is not None and os.environ.get("JJFAB_KERNEL", "").lower() != "python":
    active = compiled_kernel
else:
    active = python_kernel

KERNEL = active.KERNEL


def grow_lattice(*args, backend=None):
    """Dispatch to ``backend`` ("python" / "cython") or the active kernel."""
    if backend is None:
        mod = active
    elif backend == "python":
        mod = python_kernel
    elif backend == "cython":
        if compiled_kernel is None:
            raise RuntimeError("compiled growth kernel is not built")
        mod = compiled_kernel
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    return mod.grow_lattice(*args)
