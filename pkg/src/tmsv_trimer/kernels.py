"""Backend selection for the multinomial kernels.

The compiled extension is used when it imports; set
``TMSV_TRIMER_PURE_PYTHON=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

_compiled: ModuleType | None
try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("TMSV_TRIMER_PURE_PYTHON"):
    _active: ModuleType = _compiled
    BACKEND = "cython"
else:
    _active = _kernels_py
    BACKEND = "python"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def multinomial_block(l, row_a, row_c):
    return _active.multinomial_block(l, row_a, row_c)


def multinomial_slice(l, nb, row_a, row_c):
    return _active.multinomial_slice(l, nb, row_a, row_c)
