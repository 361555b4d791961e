"""Backend selection: compiled Cython kernels when available, numpy otherwise.

The env var WALKLAB_BACKEND ("compiled" | "python" | "auto", default auto)
pins a backend explicitly; "compiled" raises if the extension is missing.
"""

import os

from . import pycore

try:
    from . import _corekernels as _compiled
except ImportError:  # extension not built; pure fallback
    _compiled = None


def get(name=None):
    name = name or os.environ.get("WALKLAB_BACKEND", "auto")
    if name == "auto":
        return _compiled if _compiled is not None else pycore
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend requested but walklab.backends._corekernels is not built")
        return _compiled
    if name == "python":
        return pycore
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["python"] + (["compiled"] if _compiled is not None else [])


def active_name() -> str:
    return get().NAME
