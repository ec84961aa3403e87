"""Backend selection for the Monte-Carlo kernel.

The compiled extension is used when it imports; otherwise the numpy
implementation is. Set ``POISSON_OUTAGE_BACKEND`` to ``python`` or
``compiled`` to force one.
"""
from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None


def available_backends() -> list[str]:
    return ["compiled", "python"] if _kernel_c is not None else ["python"]


def get_backend(name: str | None = None):
    name = name or os.environ.get("POISSON_OUTAGE_BACKEND", "auto")
    if name == "auto":
        return _kernel_c if _kernel_c is not None else _kernel_py
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if _kernel_c is None:
            raise ImportError("compiled kernel is not built; run `pip install -e . --no-build-isolation`")
        return _kernel_c
    raise ValueError(f"unknown kernel backend {name!r}")

