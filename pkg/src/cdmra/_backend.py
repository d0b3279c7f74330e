"""Kernel backend selection: compiled extension when importable, pure-numpy
fallback otherwise. Set CDMRA_KERNEL=python or CDMRA_KERNEL=cython to force
a choice (forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import os

_FORCED = os.environ.get("CDMRA_KERNEL", "").strip().lower()


def _load():
    if _FORCED == "python":
        from . import _kernels_py

        return _kernels_py, "python"
    if _FORCED not in ("", "cython"):
        raise ValueError(f"CDMRA_KERNEL must be 'python' or 'cython', got {_FORCED!r}")
    try:
        from . import _kernels

        return _kernels, "cython"
    except ImportError:
        if _FORCED == "cython":
            raise
        from . import _kernels_py

        return _kernels_py, "python"


kernels, BACKEND = _load()
