"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is selected when the
extension is unavailable.  ``SUPERBM_BACKEND=python`` or ``=compiled`` forces
the choice at import time (the benchmark uses this to compare both).
"""
from __future__ import annotations

import os

_forced = os.environ.get("SUPERBM_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _fallback as _impl
elif _forced == "compiled":
    from . import _speedups as _impl  # type: ignore[no-redef]
elif _forced:
    raise ImportError(
        f"SUPERBM_BACKEND={_forced!r} not recognized; use 'python' or 'compiled'"
    )
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on build
        from . import _fallback as _impl  # type: ignore[no-redef]

advance_full = _impl.advance_full
advance_orthant = _impl.advance_orthant
BACKEND_NAME = _impl.BACKEND_NAME


def backend_name() -> str:
    return BACKEND_NAME
