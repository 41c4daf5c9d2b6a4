"""Kernel backend selection.

Prefers the compiled extension when it imported cleanly, otherwise falls back
to the NumPy kernels. ``FSRA_BACKEND=python`` or ``FSRA_BACKEND=compiled``
forces the choice (the latter raises if the extension is missing), which the
parity tests and the benchmark use to pin each side.
"""

from __future__ import annotations

import os

from . import _kernels_np

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None


def available_backends() -> list[str]:
    names = ["python"]
    if _kernels_cy is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (or the best available one)."""
    if name is None:
        name = os.environ.get("FSRA_BACKEND")
    if name is None:
        return _kernels_cy if _kernels_cy is not None else _kernels_np
    if name == "python":
        return _kernels_np
    if name == "compiled":
        if _kernels_cy is None:
            raise ImportError("compiled kernel extension is not available")
        return _kernels_cy
    raise ValueError(f"unknown backend {name!r} (use 'python' or 'compiled')")


backend = get_backend()
