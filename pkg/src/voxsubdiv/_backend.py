"""Kernel backend selection.

The compiled extension is used when it imports; setting
``VOXSUBDIV_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os
import types

from . import _pykernels

try:
    if os.environ.get("VOXSUBDIV_PURE_PYTHON", "").strip() not in ("", "0"):
        raise ImportError("pure python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

DEFAULT = "cython" if _ckernels is not None else "python"


def get_backend(name=None) -> types.ModuleType:
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
