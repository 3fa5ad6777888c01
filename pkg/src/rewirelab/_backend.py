"""Pick the kernel implementation at import time.

The compiled extension is preferred; set ``REWIRELAB_PURE_PYTHON=1`` to
force the numpy fallback (the benchmark and the parity tests use this).
"""

import os

from . import _kernels_py

if os.environ.get("REWIRELAB_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _kernels_py
        BACKEND = "python"
