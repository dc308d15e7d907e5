"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``MULTIWALK_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _purepy

NAME = "python"
_impl = _purepy

if os.environ.get("MULTIWALK_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        NAME = "cython"
    except ImportError:
        _impl = _purepy

apply_linear = _impl.apply_linear
permanent = _impl.permanent


def available():
    """Names of the kernel implementations importable in this environment."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def load(name):
    if name == "python":
        return _purepy
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
