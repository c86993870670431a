"""Selects the stepping-kernel implementation at import time.

The compiled extension is preferred when present; the pure-Python twin is
used otherwise.  Set ``LBLAB_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LBLAB_PURE"):
    kernels = _kernels_py
    BACKEND = "pure"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "pure"


def backend_name() -> str:
    """Which kernel implementation is active: ``"compiled"`` or ``"pure"``."""
    return BACKEND
