"""Kernel backend selection.

The hot kernels ship twice: numba-jitted loops (default) and a pure
numpy fallback. NOISYIS_BACKEND=numpy forces the fallback,
NOISYIS_BACKEND=numba requires the jitted path and fails loudly if
numba cannot be imported. Pairwise reductions are bit-identical across
backends; kernels that go through exp/log can differ in the last ulp,
so outputs are only guaranteed bit-stable within a single backend.
"""

import os
import warnings

_choice = os.environ.get("NOISYIS_BACKEND", "").strip().lower()

if _choice not in ("", "numba", "numpy"):
    raise ImportError(
        f"NOISYIS_BACKEND must be 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    from . import numpy_backend as kernels
elif _choice == "numba":
    from . import numba_backend as kernels
else:
    try:
        from . import numba_backend as kernels
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn("numba unavailable; using the pure-numpy backend")
        from . import numpy_backend as kernels

BACKEND = kernels.NAME

__all__ = ["kernels", "BACKEND"]
