"""Kernel backend selection.

Prefers the compiled extension when it imported cleanly, otherwise falls
back to the numpy implementation. Set ``PIRE_PURE_PYTHON=1`` in the
environment to force the fallback (useful for debugging and for the
kernel benchmark).
"""

import os

if os.environ.get("PIRE_PURE_PYTHON"):
    from . import _kernels_py as kernels

    USING_COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels

        USING_COMPILED = False


def backend_name() -> str:
    return "compiled" if USING_COMPILED else "python"
