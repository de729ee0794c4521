"""Select the MLP kernel backend at import time.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. Setting ``DCANN_KERNELS=python`` forces the
fallback.
"""

from __future__ import annotations

import os
import warnings

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def get_backend(name: str | None = None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None


def _select():
    wanted = os.environ.get("DCANN_KERNELS", "").strip().lower()
    if wanted == "python":
        return _pykernels, "python"
    if wanted == "cython" and _ckernels is None:
        warnings.warn("DCANN_KERNELS=cython but the extension is not built; using numpy kernels")
    if _ckernels is not None:
        return _ckernels, "cython"
    return _pykernels, "python"


active, BACKEND = _select()
