"""Kernel selection: compiled ``_speedups`` when importable, else pure Python.

Set ``BVSPIN_PURE=1`` in the environment to force the fallback.
"""

import os

if os.environ.get("BVSPIN_PURE"):
    from ._kernels_py import (  # noqa: F401
        SHIFT, Echelon, mono_dt, mono_lderiv, mono_mul, poly_mul,
        poly_mul_mono_into)
    BACKEND = "python"
else:
    try:
        from ._speedups import (  # noqa: F401
            SHIFT, Echelon, mono_dt, mono_lderiv, mono_mul, poly_mul,
            poly_mul_mono_into)
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import (  # noqa: F401
            SHIFT, Echelon, mono_dt, mono_lderiv, mono_mul, poly_mul,
            poly_mul_mono_into)
        BACKEND = "python"
