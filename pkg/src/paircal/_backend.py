"""Select the compiled kernels when available, else the NumPy fallback.

Set ``PAIRCAL_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"

if os.environ.get("PAIRCAL_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import accumulate, coincidence_sum, triple_sum
else:
    try:
        from ._kernels import accumulate, coincidence_sum, triple_sum

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import accumulate, coincidence_sum, triple_sum

__all__ = ["BACKEND", "accumulate", "coincidence_sum", "triple_sum"]
