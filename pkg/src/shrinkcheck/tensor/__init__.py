"""Indexed tensor polynomials with deterministic canonical forms."""
from ._kernel import KERNEL, canon_factors
from .core import (
    SYMBOLS,
    MalformedIndexing,
    NonTerminatingRuleSet,
    TensorPolynomial,
    canonicalize,
    constant,
    dim,
    dummy_alphabet,
    factor,
    fresh_labels,
)
from .rules import RewriteRule, substitute

__all__ = [
    "KERNEL",
    "SYMBOLS",
    "MalformedIndexing",
    "NonTerminatingRuleSet",
    "RewriteRule",
    "TensorPolynomial",
    "canon_factors",
    "canonicalize",
    "constant",
    "dim",
    "dummy_alphabet",
    "factor",
    "fresh_labels",
    "substitute",
]
