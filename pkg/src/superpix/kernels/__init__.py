"""Low-level kernels with a compiled core and a pure-Python fallback.

The compiled extension (`_core`, built from Cython) is preferred. When it is
missing, or when the SUPERPIX_PURE environment variable is set to a non-empty
value other than "0", the numpy fallback in `pure` is used instead. Both
expose the same functions and produce bit-identical results; the choice only
affects speed.
"""

import os

from . import pure

if os.environ.get("SUPERPIX_PURE", "0") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

ACTIVE = pure if _compiled is None else _compiled


def active():
    """Name of the implementation selected at import: "compiled" or "pure"."""
    return ACTIVE.NAME


def has_compiled():
    return _compiled is not None


def get_impl(which="auto"):
    """Return a kernel module by name ("auto", "compiled" or "pure")."""
    if which == "auto":
        return ACTIVE
    if which == "pure":
        return pure
    if which == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel extension is not available")
        return _compiled
    raise ValueError(f"unknown kernel implementation {which!r}")
