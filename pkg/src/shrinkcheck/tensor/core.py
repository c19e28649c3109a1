"""Value-semantic algebra of indexed tensor polynomials.

Monomials are products of indexed factors ``(name, (label, ...))`` with an
exact rational coefficient and a power of the symbolic dimension ``n``.
A label occurring once in a monomial is free; twice means summation over
``1..n``.  Canonical forms are unique, so equality is decided by comparing
normalized term tuples.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import count
from string import ascii_lowercase
from typing import Iterable

from ._kernel import canon_factors


class MalformedIndexing(ValueError):
    pass


class NonTerminatingRuleSet(RuntimeError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    rank: int
    min_arity: int
    max_arity: int | None

    def group(self, arity: int) -> int:
        """Number of leading, mutually symmetric slots."""
        if self.name in ("delta",):
            return 2
        if self.name == "h":
            return 2 if arity == 2 else 3
        if self.name == "hs":
            return arity
        return 0


# h of arity > 4 and hs (the fully symmetrized derivative of h) only arise
# inside the derivative engine; the parser never produces them directly.
# dH, df3, dS are opaque scalar fields: ``dH[k,l]`` is the ordered covariant
# derivative nabla_l nabla_k H.  R (curvature) is accepted only so the Gauss
# rule can be stated as a rewrite; no engine path ever leaves one behind.
SYMBOLS: dict[str, Symbol] = {
    s.name: s
    for s in (
        Symbol("delta", 0, 2, 2),
        Symbol("h", 1, 2, None),
        Symbol("hs", 2, 3, None),
        Symbol("T", 3, 1, 1),
        Symbol("dH", 4, 0, None),
        Symbol("df3", 5, 0, None),
        Symbol("dS", 6, 0, None),
        Symbol("R", 7, 4, 4),
    )
}
_BY_RANK = {s.rank: s.name for s in SYMBOLS.values()}

Factor = tuple  # (name, (labels...))
Key = tuple  # (dim_power, factors)


def dummy_alphabet(exclude: Iterable[str] = ()) -> Iterable[str]:
    """a, b, ..., z, a1, b1, ... skipping labels in ``exclude``."""
    exclude = set(exclude)
    for suffix in count():
        tag = "" if suffix == 0 else str(suffix)
        for ch in ascii_lowercase:
            lab = ch + tag
            if lab not in exclude:
                yield lab


def fresh_labels(avoid: Iterable[str], k: int) -> list[str]:
    gen = dummy_alphabet(avoid)
    return [next(gen) for _ in range(k)]


def label_counts(factors: Iterable[Factor]) -> Counter:
    c: Counter = Counter()
    for _, idx in factors:
        c.update(idx)
    return c


def _check_factor(name: str, idx: tuple) -> None:
    sym = SYMBOLS.get(name)
    if sym is None:
        raise MalformedIndexing(f"unknown symbol {name!r}")
    if len(idx) < sym.min_arity or (sym.max_arity is not None and len(idx) > sym.max_arity):
        raise MalformedIndexing(f"{name} cannot take {len(idx)} indices")


def _eliminate_deltas(factors: list[Factor]) -> tuple[int, list[Factor]]:
    dim = 0
    changed = True
    while changed:
        changed = False
        counts = label_counts(factors)
        for pos, (name, idx) in enumerate(factors):
            if name != "delta":
                continue
            x, y = idx
            rest = factors[:pos] + factors[pos + 1:]
            if x == y:
                factors = rest
                dim += 1
            elif counts[x] == 2 or counts[y] == 2:
                old, new = (x, y) if counts[x] == 2 else (y, x)
                factors = [(n, tuple(new if l == old else l for l in i)) for n, i in rest]
            else:
                continue
            changed = True
            break
    return dim, factors


@lru_cache(maxsize=200_000)
def canonical_monomial(factors: tuple) -> tuple[int, tuple]:
    """Return ``(extra_dim_power, canonical_factors)`` for a factor tuple."""
    for name, idx in factors:
        _check_factor(name, idx)
    counts = label_counts(factors)
    bad = [l for l, c in counts.items() if c > 2]
    if bad:
        raise MalformedIndexing(f"index {sorted(bad)[0]!r} occurs {counts[sorted(bad)[0]]} times")
    dim, facs = _eliminate_deltas(list(factors))
    counts = label_counts(facs)
    free = sorted(l for l, c in counts.items() if c == 1)
    code = {l: i for i, l in enumerate(free)}
    nfree = len(free)
    nxt = nfree
    for _, idx in facs:
        for l in idx:
            if l not in code:
                code[l] = nxt
                nxt += 1
    enc = []
    for name, idx in facs:
        sym = SYMBOLS[name]
        enc.append((sym.rank, sym.group(len(idx)), *(code[l] for l in idx)))
    canon = canon_factors(enc, nfree)
    dummies = fresh_labels(free, nxt - nfree)
    out = []
    for f in canon:
        labels = tuple(free[c] if c < nfree else dummies[c - nfree] for c in f[2:])
        out.append((_BY_RANK[f[0]], labels))
    return dim, tuple(out)


def _rename(factors: tuple, mapping: dict) -> tuple:
    return tuple((n, tuple(mapping.get(l, l) for l in idx)) for n, idx in factors)


def _sort_key(item):
    (dim, facs), _ = item
    return (len(facs), [(SYMBOLS[n].rank, len(i), i) for n, i in facs], dim)


class TensorPolynomial:
    """Immutable canonical sum of rational-coefficient monomials."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict | None = None, *, _canonical: bool = False):
        if terms is None:
            terms = {}
        if not _canonical:
            acc: dict = {}
            for (dim, facs), coeff in terms.items():
                extra, cf = canonical_monomial(tuple(facs))
                key = (dim + extra, cf)
                acc[key] = acc.get(key, 0) + Fraction(coeff)
            terms = acc
        items = sorted(((k, v) for k, v in terms.items() if v != 0), key=_sort_key)
        self._terms = tuple(items)
        self._hash = None
        frees = {self._free_of(k[1]) for k, _ in self._terms}
        if len(frees) > 1:
            raise MalformedIndexing(f"free index sets differ across terms: {sorted(map(sorted, frees))}")

    @staticmethod
    def _free_of(factors) -> frozenset:
        return frozenset(l for l, c in label_counts(factors).items() if c == 1)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple]) -> "TensorPolynomial":
        """Build from ``(coeff, dim_power, factors)`` triples."""
        acc: dict = {}
        for coeff, dim, facs in terms:
            extra, cf = canonical_monomial(tuple(facs))
            key = (dim + extra, cf)
            acc[key] = acc.get(key, 0) + Fraction(coeff)
        return cls(acc, _canonical=True)

    @property
    def terms(self) -> tuple:
        """Canonical ``((dim_power, factors), coeff)`` pairs."""
        return self._terms

    def monomials(self):
        for (dim, facs), coeff in self._terms:
            yield coeff, dim, facs

    @property
    def free_indices(self) -> frozenset:
        if not self._terms:
            return frozenset()
        return self._free_of(self._terms[0][0][1])

    def labels(self) -> set:
        out = set()
        for (_, facs), _ in self._terms:
            for _, idx in facs:
                out.update(idx)
        return out

    def is_zero(self) -> bool:
        return not self._terms

    def is_scalar(self) -> bool:
        return not self.free_indices

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = constant(other)
        if not isinstance(other, TensorPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __repr__(self):
        from ..dsl import to_source

        return f"TensorPolynomial({to_source(self)!r})"

    # ring operations -------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TensorPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for k, v in other._terms:
            acc[k] = acc.get(k, 0) + v
        return TensorPolynomial(acc, _canonical=True)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + other.scale(-1)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q) -> "TensorPolynomial":
        q = Fraction(q)
        if q == 0:
            return TensorPolynomial()
        return TensorPolynomial({k: v * q for k, v in self._terms}, _canonical=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TensorPolynomial):
            return NotImplemented
        acc: dict = {}
        for (d1, f1), c1 in self._terms:
            left = _rename_dummies(f1, "~L")
            for (d2, f2), c2 in other._terms:
                right = _rename_dummies(f2, "~R")
                extra, cf = canonical_monomial(left + right)
                key = (d1 + d2 + extra, cf)
                acc[key] = acc.get(key, 0) + c1 * c2
        return TensorPolynomial(acc, _canonical=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = constant(1)
        for _ in range(k):
            out = out * self
        return out

    def rename(self, mapping: dict) -> "TensorPolynomial":
        """Rename free labels (dummies are untouched)."""
        free = self.free_indices
        mapping = {k: v for k, v in mapping.items() if k in free}
        out = []
        for (dim, facs), coeff in self._terms:
            dummies = {l for l, c in label_counts(facs).items() if c == 2}
            clash = dummies & set(mapping.values())
            facs = _rename_dummies(facs, "~N") if clash else facs
            out.append((coeff, dim, _rename(facs, mapping)))
        return TensorPolynomial.from_terms(out)


def _rename_dummies(factors: tuple, prefix: str) -> tuple:
    counts = label_counts(factors)
    mapping = {}
    for _, idx in factors:
        for l in idx:
            if counts[l] == 2 and l not in mapping:
                mapping[l] = f"{prefix}{len(mapping)}"
    return _rename(factors, mapping)


def constant(q) -> TensorPolynomial:
    q = Fraction(q)
    return TensorPolynomial({(0, ()): q}, _canonical=True) if q else TensorPolynomial()


def factor(name: str, *idx: str, coeff=1) -> TensorPolynomial:
    return TensorPolynomial.from_terms([(coeff, 0, ((name, tuple(idx)),))])


def dim(power: int = 1) -> TensorPolynomial:
    return TensorPolynomial({(power, ()): Fraction(1)}, _canonical=True)


def canonicalize(expr: TensorPolynomial) -> TensorPolynomial:
    """Recompute the canonical form term by term (idempotent)."""
    return TensorPolynomial.from_terms(expr.monomials())
