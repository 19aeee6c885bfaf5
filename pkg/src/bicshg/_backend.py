"""Selects the lattice-sum kernel implementation at import time.

The compiled extension is used when it was built; otherwise the pure-Python
module is used. Setting ``BICSHG_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("BICSHG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

alpha_closed_sum = _impl.alpha_closed_sum
beta_closed_sum = _impl.beta_closed_sum
