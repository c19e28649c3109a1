"""Pattern -> replacement rewriting on canonical tensor polynomials."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .core import (
    SYMBOLS,
    NonTerminatingRuleSet,
    TensorPolynomial,
    label_counts,
)

REWRITE_CAP = 10**6


@dataclass(frozen=True)
class RewriteRule:
    """``pattern`` is a single monomial (coefficient ignored); its free labels
    are pattern variables, its dummies must match contractions that close
    inside the matched factors."""

    name: str
    pattern: TensorPolynomial
    replacement: TensorPolynomial

    def __post_init__(self):
        if len(self.pattern) != 1:
            raise ValueError("pattern must be a single monomial")
        if not self.replacement.is_zero() and self.replacement.free_indices != self.pattern.free_indices:
            raise ValueError(f"rule {self.name}: replacement free indices differ from pattern")

    @property
    def factors(self) -> tuple:
        return self.pattern.terms[0][0][1]


def _orientations(name: str, idx: tuple):
    g = SYMBOLS[name].group(len(idx))
    if g < 2:
        yield idx
        return
    seen = set()
    for p in permutations(idx[:g]):
        cand = p + idx[g:]
        if cand not in seen:
            seen.add(cand)
            yield cand


def find_match(pattern: tuple, factors: tuple):
    """First (used positions, label mapping) embedding of ``pattern``."""
    pcounts = label_counts(pattern)
    mcounts = label_counts(factors)

    def rec(i, used, mapping):
        if i == len(pattern):
            # pattern dummies must be closed contractions among matched factors
            inside = label_counts(factors[u] for u in used)
            for pl, c in pcounts.items():
                if c == 2 and inside[mapping[pl]] != mcounts[mapping[pl]]:
                    return None
            return used, mapping
        pname, pidx = pattern[i]
        for pos, (name, idx) in enumerate(factors):
            if pos in used or name != pname or len(idx) != len(pidx):
                continue
            for orient in _orientations(name, idx):
                m2 = dict(mapping)
                ok = True
                for pl, l in zip(pidx, orient):
                    if m2.setdefault(pl, l) != l:
                        ok = False
                        break
                if not ok or len(set(m2.values())) != len(m2):
                    continue
                if any(pcounts[pl] == 2 and mcounts[m2[pl]] != 2 for pl in m2):
                    continue
                res = rec(i + 1, used + (pos,), m2)
                if res is not None:
                    return res
        return None

    return rec(0, (), {})


def apply_once(expr: TensorPolynomial, rule: RewriteRule) -> tuple[TensorPolynomial, int]:
    """Rewrite the first match in every monomial; returns (result, #rewrites)."""
    from .core import TensorPolynomial as TP

    out = TP()
    hits = 0
    untouched = []
    for coeff, dim, facs in expr.monomials():
        m = find_match(rule.factors, facs)
        if m is None:
            untouched.append((coeff, dim, facs))
            continue
        used, mapping = m
        hits += 1
        rest = tuple(f for k, f in enumerate(facs) if k not in used)
        repl = rule.replacement.rename({p: mapping[p] for p in rule.pattern.free_indices})
        out = out + TP.from_terms([(coeff, dim, rest)]) * repl
    return out + TP.from_terms(untouched), hits


def substitute(expr: TensorPolynomial, rule: RewriteRule, cap: int = REWRITE_CAP) -> TensorPolynomial:
    """Apply ``rule`` until no match remains."""
    total = 0
    while True:
        expr, hits = apply_once(expr, rule)
        if not hits:
            return expr
        total += hits
        if total > cap:
            raise NonTerminatingRuleSet(f"rule {rule.name!r} exceeded {cap} rewrites")
