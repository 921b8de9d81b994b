"""Select the kernel implementation at import time.

The compiled ``_ckernels`` extension is preferred. Setting the environment
variable ``CONFVOTE_PURE_PYTHON=1`` forces the pure-Python kernels.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _pykernels


def load(name: str) -> ModuleType:
    """Return the kernel module called ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("confvote._ckernels")
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    names = ["python"]
    try:
        load("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if os.environ.get("CONFVOTE_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
else:
    try:
        kernels = load("cython")
    except ImportError:
        kernels = _pykernels

BACKEND: str = kernels.NAME
