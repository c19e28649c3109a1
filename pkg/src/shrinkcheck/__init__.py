"""Symbolic and exact verification toolkit for low-dimensional self-shrinkers."""
from .tensor import KERNEL, TensorPolynomial, canonicalize

__version__ = "0.1.0"
__all__ = ["KERNEL", "TensorPolynomial", "canonicalize", "__version__"]
