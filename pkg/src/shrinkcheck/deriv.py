"""Covariant differentiation and normalization for hypersurface tensors.

Conventions: ``h[i,j,k,...,q]`` is the ordered covariant derivative
nabla_q ... nabla_k h_ij, symmetric in its first three slots (Codazzi).
``T[i]`` is <X, e_i>; the normal component <X, nu> is -H throughout, so
nabla_k T_i = delta_ik - H h_ik.

Normal form.  Raw derivatives of order >= 2 (``h`` with four or more slots)
are traded for the fully symmetrized ``hs`` plus commutator terms from the
Ricci identities with the Gauss equation substituted inline.  A self-traced
``h_aak...`` is a derivative of grad H = h_ka T_a and is expanded.  What is
left are monomials in h2, trace-free h3, trace-free hs, T, delta and n, on
which canonical labeling is a complete equality test.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .tensor import (
    NonTerminatingRuleSet,
    RewriteRule,
    TensorPolynomial,
    factor,
    fresh_labels,
)
from .tensor.core import label_counts, _rename_dummies
from .tensor.rules import REWRITE_CAP, find_match


class IndexCollision(ValueError):
    pass


class NotAScalar(ValueError):
    pass


def _H() -> TensorPolynomial:
    return factor("h", "~H", "~H")


def _derive_factor(name: str, idx: tuple, k: str) -> TensorPolynomial:
    if name == "h":
        return factor("h", *idx, k)
    if name in ("dH", "df3", "dS"):
        return factor(name, *idx, k)
    if name == "T":
        (i,) = idx
        return factor("delta", i, k) - _H() * factor("h", i, k)
    if name == "delta":
        return TensorPolynomial()
    if name == "hs":
        return nabla(factor("h", *idx) - sym_correction(idx), k)
    raise ValueError(f"no derivative rule for {name}")


def _leibniz(expr: TensorPolynomial, k: str) -> TensorPolynomial:
    out = TensorPolynomial()
    for coeff, dpow, facs in expr.monomials():
        counts = label_counts(facs)
        if counts.get(k) == 2:
            facs = _rename_dummies(facs, "~D")
        for pos, (name, idx) in enumerate(facs):
            d = _derive_factor(name, idx, k)
            if d.is_zero():
                continue
            rest = TensorPolynomial.from_terms([(coeff, dpow, facs[:pos] + facs[pos + 1:])])
            out = out + rest * d
    return out


def nabla(expr: TensorPolynomial, k: str) -> TensorPolynomial:
    """Covariant derivative in direction ``k`` (Leibniz rule)."""
    if k in expr.free_indices:
        raise IndexCollision(f"index {k!r} already free in expression")
    return reduce_h3_traces(_leibniz(expr, k))


def _nabla_any(expr: TensorPolynomial, k: str) -> TensorPolynomial:
    """nabla, contracting with an existing free ``k`` when present."""
    if k not in expr.free_indices:
        return _leibniz(expr, k)
    (tmp,) = fresh_labels(expr.labels() | {k}, 1)
    return _leibniz(expr, tmp) * factor("delta", tmp, k)


def laplacian(expr: TensorPolynomial) -> TensorPolynomial:
    if not expr.is_scalar():
        raise NotAScalar(f"free indices {sorted(expr.free_indices)}")
    (k,) = fresh_labels(expr.labels(), 1)
    return reduce_h3_traces(_nabla_any(nabla(expr, k), k))


def l_op(expr: TensorPolynomial) -> TensorPolynomial:
    """Drift Laplacian L f = Delta f - <X, grad f>."""
    if not expr.is_scalar():
        raise NotAScalar(f"free indices {sorted(expr.free_indices)}")
    (k,) = fresh_labels(expr.labels(), 1)
    return laplacian(expr) - factor("T", k) * nabla(expr, k)


# Ricci commutation ----------------------------------------------------

def _gauss(m: str, s: str, a: str, b: str) -> TensorPolynomial:
    """R_{msab} = h_ma h_sb - h_mb h_sa."""
    return factor("h", m, a) * factor("h", s, b) - factor("h", m, b) * factor("h", s, a)


@lru_cache(maxsize=None)
def commutator(seq: tuple, p: int) -> TensorPolynomial:
    """h[seq] - h[seq with slots p, p+1 swapped], for p >= 2.

    The swap commutes the two covariant derivatives applied to the prefix
    h[seq[:p]]; each prefix slot picks up a curvature term, and the trailing
    derivatives seq[p+2:] are then applied by Leibniz.
    """
    assert p >= 2
    a, b = seq[p], seq[p + 1]
    if a == b:
        return TensorPolynomial()
    prefix = seq[:p]
    (m,) = fresh_labels(set(seq), 1)
    m = "~" + m
    out = TensorPolynomial()
    for q, s in enumerate(prefix):
        out = out + factor("h", *prefix[:q], m, *prefix[q + 1:]) * _gauss(m, s, a, b)
    for k in seq[p + 2:]:
        out = _nabla_any(out, k)
    return out


@lru_cache(maxsize=None)
def sym_correction(idx: tuple) -> TensorPolynomial:
    """h[idx] - hs[idx] as a polynomial in lower-order derivatives."""
    r = len(idx)
    arrangements = []
    slots = range(r)

    def pick(chosen):
        if len(chosen) == r - 3:
            arrangements.append(tuple(chosen))
            return
        for s in slots:
            if s not in chosen:
                pick(chosen + [s])

    pick([])
    total = TensorPolynomial()
    for tail in arrangements:
        head = [s for s in slots if s not in tail]
        target = [idx[s] for s in head] + [idx[s] for s in tail]
        total = total + _swap_path(tuple(idx), tuple(target))
    return total.scale(Fraction(1, len(arrangements)))


def _swap_path(src: tuple, dst: tuple) -> TensorPolynomial:
    """h[src] - h[dst] via adjacent transpositions (free inside slots 0..2)."""
    cur = list(src)
    out = TensorPolynomial()
    for p in range(len(dst) - 1, 2, -1):
        # bring dst[p] into slot p, scanning from the left of the unsettled part
        q = max(i for i in range(p + 1) if cur[i] == dst[p]) if cur[p] != dst[p] else p
        if q < 3:
            # any head slot is equivalent to slot 2
            cur[q], cur[2] = cur[2], cur[q]
            q = 2
        while q < p:
            if cur[q] != cur[q + 1]:
                out = out + commutator(tuple(cur), q)
            cur[q], cur[q + 1] = cur[q + 1], cur[q]
            q += 1
    return out


def _trace_expansion(idx: tuple) -> TensorPolynomial:
    """h[a,a,s,rest...] = nabla_rest (h_sm T_m)."""
    s, rest = idx[2], idx[3:]
    (m,) = fresh_labels(set(idx), 1)
    out = factor("h", s, m) * factor("T", m)
    for k in rest:
        out = _nabla_any(out, k)
    return out


def reduce_h3_traces(expr: TensorPolynomial) -> TensorPolynomial:
    """Apply the self-shrinker relation h_aak = h_ka T_a to third-order h."""
    while True:
        out = TensorPolynomial()
        hit = False
        for coeff, dpow, facs in expr.monomials():
            for pos, (name, idx) in enumerate(facs):
                if name == "h" and len(idx) == 3 and len(set(idx)) < 3:
                    j = idx if idx[0] == idx[1] else (idx[0], idx[2], idx[1]) if idx[0] == idx[2] else (idx[1], idx[2], idx[0])
                    rest = TensorPolynomial.from_terms([(coeff, dpow, facs[:pos] + facs[pos + 1:])])
                    out = out + rest * _trace_expansion(j)
                    hit = True
                    break
            else:
                out = out + TensorPolynomial.from_terms([(coeff, dpow, facs)])
        expr = out
        if not hit:
            return expr


def _rewrite_factor(name: str, idx: tuple) -> TensorPolynomial | None:
    """One normalization step for a single factor, or None if normal."""
    if name == "h" and len(idx) >= 3:
        head = idx[:3]
        if len(set(head)) < 3:
            a = next(l for l in head if head.count(l) == 2)
            s = next(l for l in head if l != a) if len(set(head)) == 2 else a
            return _trace_expansion((a, a, s) + idx[3:])
        if len(idx) >= 4:
            return factor("hs", *idx) + sym_correction(idx)
    if name == "hs":
        seen = set()
        for l in idx:
            if l in seen:
                rest = list(idx)
                rest.remove(l)
                rest.remove(l)
                seq = (l, l) + tuple(rest)
                return factor("h", *seq) - sym_correction(seq)
            seen.add(l)
    if name == "R":
        return _gauss(*idx)
    return None


# hypotheses -----------------------------------------------------------

@dataclass(frozen=True)
class HypothesisSet:
    name: str
    rules: tuple = field(default_factory=tuple)


def _rule(name, pattern: str, replacement) -> RewriteRule:
    from .dsl import parse

    repl = parse(replacement) if isinstance(replacement, str) else replacement
    return RewriteRule(name, parse(pattern), repl)


@lru_cache(maxsize=None)
def hypothesis(name: str) -> HypothesisSet:
    """Named rule bundles: SConstant, F4Constant, dim3."""
    from .dsl import parse

    if name == "SConstant":
        # nabla_l of sum h_ij h_ijk = 0, stated on the symmetrized normal form
        corr = factor("h", "i", "j") * sym_correction(("i", "j", "k", "l"))
        second = parse("-h[i,j,k]*h[i,j,l]") - corr
        rules = [
            _rule("S-grad", "h[i,j]*h[i,j,k]", TensorPolynomial()),
            _rule("S-hess", "h[i,j]*hs[i,j,k,l]", second),
        ]
        for r in range(1, 5):
            idx = ",".join(f"k{q}" for q in range(r))
            rules.append(_rule(f"dS-{r}", f"dS[{idx}]", TensorPolynomial()))
        return HypothesisSet(name, tuple(rules))
    if name == "F4Constant":
        return HypothesisSet(name, (
            _rule("f4-grad", "h[i,j,m]*h[j,k]*h[k,l]*h[l,i]", TensorPolynomial()),
        ))
    if name == "dim3":
        # e4 = 0 in three dimensions, solved for the 4-cycle tr(h^4)
        e4 = parse("e4")
        cycle = parse("f4")
        c = dict((k, v) for k, v in e4.terms)[cycle.terms[0][0]]
        replacement = (cycle.scale(c) - e4).scale(1 / c)
        return HypothesisSet(name, (RewriteRule("e4-vanishes", cycle, replacement),))
    raise KeyError(f"unknown hypothesis {name!r}")


# driver ---------------------------------------------------------------

class _Budget:
    def __init__(self, cap=REWRITE_CAP):
        self.count = 0
        self.cap = cap

    def tick(self, k=1):
        self.count += k
        if self.count > self.cap:
            raise NonTerminatingRuleSet(f"more than {self.cap} rewrites")


def _structural_pass(expr, budget):
    out = TensorPolynomial()
    hit = False
    keep = []
    for coeff, dpow, facs in expr.monomials():
        for pos, (name, idx) in enumerate(facs):
            repl = _rewrite_factor(name, idx)
            if repl is not None:
                rest = TensorPolynomial.from_terms([(coeff, dpow, facs[:pos] + facs[pos + 1:])])
                out = out + rest * repl
                hit = True
                budget.tick()
                break
        else:
            keep.append((coeff, dpow, facs))
    return out + TensorPolynomial.from_terms(keep), hit


def _hypothesis_pass(expr, rules, budget):
    out = TensorPolynomial()
    hit = False
    keep = []
    for coeff, dpow, facs in expr.monomials():
        for rule in rules:
            m = find_match(rule.factors, facs)
            if m is None:
                continue
            used, mapping = m
            rest = tuple(f for k, f in enumerate(facs) if k not in used)
            repl = rule.replacement.rename({p: mapping[p] for p in rule.pattern.free_indices})
            out = out + TensorPolynomial.from_terms([(coeff, dpow, rest)]) * repl
            hit = True
            budget.tick()
            break
        else:
            keep.append((coeff, dpow, facs))
    return out + TensorPolynomial.from_terms(keep), hit


def normalize(expr: TensorPolynomial, hyps: Iterable = (), budget: _Budget | None = None) -> TensorPolynomial:
    """Ricci/trace normalization, then hypothesis rules, to a fixpoint."""
    budget = budget or _Budget()
    rules = [r for h in hyps for r in (hypothesis(h) if isinstance(h, str) else h).rules]
    while True:
        hit = True
        while hit:
            expr, hit = _structural_pass(expr, budget)
        if not rules:
            return expr
        expr, hit = _hypothesis_pass(expr, rules, budget)
        if not hit:
            return expr


def ricci_normalize(expr: TensorPolynomial) -> TensorPolynomial:
    return normalize(expr)


@dataclass
class IdentityReport:
    name: str
    status: str
    residual: TensorPolynomial
    rewrite_count: int
    elapsed_ms: float

    @property
    def ok(self) -> bool:
        return self.status == "reduced_to_zero"

    def to_json(self) -> dict:
        from .dsl import to_source

        return {
            "name": self.name,
            "status": self.status,
            "residual": to_source(self.residual),
            "rewrite_count": self.rewrite_count,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


def verify_identity(name: str, lhs: TensorPolynomial, rhs: TensorPolynomial, hyps: Iterable = ()) -> IdentityReport:
    start = time.perf_counter()
    budget = _Budget()
    residual = normalize(lhs - rhs, tuple(hyps), budget)
    status = "reduced_to_zero" if residual.is_zero() else "residual_nonzero"
    return IdentityReport(name, status, residual, budget.count, (time.perf_counter() - start) * 1e3)


def hessian_H(i: str, j: str) -> TensorPolynomial:
    """nabla_j nabla_i H."""
    if i == j:
        raise ValueError("hessian_H needs two distinct labels")
    from .dsl import parse

    return nabla(nabla(parse("H"), i), j)


def hessian_H_closed_form(i: str, j: str) -> TensorPolynomial:
    """sum_k h_ijk <X,e_k> + h_ij - H sum_k h_ik h_kj."""
    from .dsl import parse

    (k,) = fresh_labels({i, j}, 1)
    return parse(f"h[{i},{j},{k}]*T[{k}] + h[{i},{j}] - H*h[{i},{k}]*h[{k},{j}]")


def default_corpus_path():
    from importlib.resources import files

    return files("shrinkcheck.corpus") / "lemmas.idt"


def verify_statement(st) -> IdentityReport:
    from .dsl import parse

    return verify_identity(st.name, parse(st.lhs), parse(st.rhs), st.hyps)


def verify_corpus(path=None) -> list[IdentityReport]:
    """Verify every statement of an identity file (the bundled corpus by default)."""
    from .dsl import load_identity_file

    return [verify_statement(st) for st in load_identity_file(str(path or default_corpus_path()))]
