"""Backend selection for the hot kernels.

The environment flag ELLG_NUMBA picks the implementation:
  "0"/"off"/"false"  -> pure numpy
  "1"/"on"/"true"    -> numba (falls back to numpy with a warning if numba
                        is not importable)
  unset              -> numba when importable, numpy otherwise
"""
from __future__ import annotations

import os
import warnings

_raw = os.environ.get("ELLG_NUMBA", "").strip().lower()
if _raw in ("0", "off", "false", "no"):
    _requested: bool | None = False
elif _raw in ("1", "on", "true", "yes"):
    _requested = True
elif _raw == "":
    _requested = None
else:
    warnings.warn(f"unrecognized ELLG_NUMBA value {_raw!r}; using auto-detect")
    _requested = None

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

if _requested is True and not HAVE_NUMBA:
    warnings.warn("ELLG_NUMBA=1 but numba is not importable; using numpy kernels")

USE_NUMBA = HAVE_NUMBA if _requested is None else (_requested and HAVE_NUMBA)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def get_kernels(name: str | None = None):
    """Return the kernel module for `name` ("numba"/"numpy", default: active)."""
    if name is None:
        name = backend_name()
    if name == "numba":
        if not HAVE_NUMBA:
            raise ImportError("numba backend requested but numba is not installed")
        from . import kernels_numba

        return kernels_numba
    if name == "numpy":
        from . import kernels_numpy

        return kernels_numpy
    raise ValueError(f"unknown kernel backend {name!r}")
