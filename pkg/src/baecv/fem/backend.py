"""Assembly-kernel backend selection.

The compiled extension is preferred when it imports cleanly; set
``BAECV_BACKEND=numpy`` (or ``cython``) to force a backend.  Both expose the
same kernel functions with identical element-level arithmetic.
"""

import os

from . import _kernels_np

_FORCE = os.environ.get("BAECV_BACKEND", "auto").lower()

if _FORCE == "numpy":
    kernels = _kernels_np
elif _FORCE == "cython":
    from . import _kernels_cy as kernels
else:
    try:
        from . import _kernels_cy as kernels
    except ImportError:
        kernels = _kernels_np


def backend_name():
    return kernels.BACKEND_NAME


def get_backend(name):
    """Return a kernel module by name (used by tests and the benchmark)."""
    if name == "numpy":
        return _kernels_np
    if name == "cython":
        from . import _kernels_cy
        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")
