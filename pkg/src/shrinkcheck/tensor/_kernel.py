"""Selects the compiled canonical labeling kernel when it is importable."""
import os

from . import _canon_py


def _select():
    if not os.environ.get("SHRINKCHECK_PURE_PYTHON"):
        try:
            from . import _canon
            return "cython", _canon.canon_factors
        except ImportError:
            pass
    return "python", _canon_py.canon_factors


KERNEL, canon_factors = _select()

__all__ = ["KERNEL", "canon_factors"]
