"""Component data at a limit point and evaluation of tensor polynomials on it.

At the limit point the frame diagonalizes h (h_ij = lam_i delta_ij) and the
mean curvature vanishes.  Third derivatives are 10 totally symmetric
components, fourth derivatives 30 components symmetric in the first three
slots, and t_k is the limit of <X, e_k>.  Everything is a sympy expression
over Q.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, product

import sympy as sp

from ..deriv import commutator
from ..dsl import load_identity_file, parse
from ..tensor import TensorPolynomial
from ..tensor.core import label_counts

DIM = 3
IDX = (1, 2, 3)
S = sp.Symbol("S", positive=True)


def _h3_name(idx) -> str:
    return "h" + "".join(map(str, sorted(idx)))


def _h4_name(idx) -> str:
    return "h" + "".join(map(str, sorted(idx[:3]))) + "_" + str(idx[3])


@dataclass
class LimitPoint:
    """Symbolic component data; ``lam`` may be specialized per case."""

    lam: tuple
    h3: dict = field(default_factory=dict)
    h4: dict = field(default_factory=dict)
    t: tuple = ()
    extra: dict = field(default_factory=dict)

    @classmethod
    def generic(cls, lam=None) -> "LimitPoint":
        if lam is None:
            l1, l2 = sp.symbols("lam1 lam2")
            lam = (l1, l2, -l1 - l2)
        h3 = {c: sp.Symbol(_h3_name(c)) for c in combinations_with_replacement(IDX, 3)}
        h4 = {(c, d): sp.Symbol(_h4_name(c + (d,))) for c in combinations_with_replacement(IDX, 3) for d in IDX}
        t = sp.symbols("t1 t2 t3")
        return cls(tuple(lam), h3, h4, tuple(t))

    # component accessors -------------------------------------------------
    def H(self):
        return sum(self.lam)

    def h2(self, i, j):
        return self.lam[i - 1] if i == j else sp.Integer(0)

    def h3c(self, i, j, k):
        return self.h3[tuple(sorted((i, j, k)))]

    def h4c(self, i, j, k, l):
        return self.h4[(tuple(sorted((i, j, k))), l)]

    def hs4(self, i, j, k, l):
        idx = (i, j, k, l)
        return sp.Rational(1, 4) * sum(self.h4c(*[idx[p] for p in range(4) if p != q], idx[q]) for q in range(4))

    def variables(self) -> list:
        out = list(self.h3.values()) + list(self.h4.values()) + list(self.t)
        return [v for v in out if isinstance(v, sp.Symbol)]

    def substitute(self, subs: dict) -> "LimitPoint":
        def s(x):
            return sp.sympify(x).xreplace(subs) if subs else x

        return LimitPoint(tuple(s(x) for x in self.lam), {k: s(v) for k, v in self.h3.items()},
                          {k: s(v) for k, v in self.h4.items()}, tuple(s(x) for x in self.t),
                          {k: s(v) for k, v in self.extra.items()})


def _factor_value(p: LimitPoint, name: str, idx: tuple, fields: dict):
    if name == "h":
        if len(idx) == 2:
            return p.h2(*idx)
        if len(idx) == 3:
            return p.h3c(*idx)
        if len(idx) == 4:
            return p.h4c(*idx)
        raise ValueError("no component data above fourth order")
    if name == "hs":
        if len(idx) != 4:
            raise ValueError("no symmetrized data above fourth order")
        return p.hs4(*idx)
    if name == "T":
        return p.t[idx[0] - 1]
    if name == "delta":
        return sp.Integer(1 if idx[0] == idx[1] else 0)
    if name in ("dH", "df3", "dS"):
        key = (name, idx)
        if key not in fields:
            fields[key] = sp.Symbol(f"{name}_{''.join(map(str, idx))}" if idx else name)
        return fields[key]
    raise ValueError(f"cannot evaluate {name}")


def evaluate(expr: TensorPolynomial, p: LimitPoint, free: dict | None = None, fields: dict | None = None):
    """Sum a tensor polynomial over frame indices 1..3 on component data.

    ``free`` assigns values to free labels; ``fields`` supplies values for
    dH/df3/dS components keyed by ``(name, idx)`` (missing ones become fresh
    symbols, which is how unknown higher derivatives stay visible).
    """
    free = free or {}
    fields = {} if fields is None else fields
    missing = expr.free_indices - set(free)
    if missing:
        raise ValueError(f"unassigned free indices {sorted(missing)}")
    total = sp.Integer(0)
    for coeff, dpow, facs in expr.monomials():
        dummies = sorted(l for l, c in label_counts(facs).items() if c == 2)
        term = sp.Integer(0)
        for vals in product(IDX, repeat=len(dummies)):
            env = dict(free)
            env.update(zip(dummies, vals))
            v = sp.Integer(1)
            for name, idx in facs:
                v *= _factor_value(p, name, tuple(env[l] for l in idx), fields)
                if v == 0:
                    break
            term += v
        total += sp.Rational(coeff.numerator, coeff.denominator) * DIM ** dpow * term
    return sp.expand(total)


# shared symbolic ingredients ------------------------------------------

@lru_cache(maxsize=None)
def corpus() -> dict:
    from importlib.resources import files

    path = files("shrinkcheck.corpus") / "lemmas.idt"
    return {st.name: st for st in load_identity_file(str(path))}


@lru_cache(maxsize=None)
def corpus_side(name: str, side: str) -> TensorPolynomial:
    st = corpus()[name]
    return parse(st.lhs if side == "lhs" else st.rhs)


@lru_cache(maxsize=None)
def ricci_difference(i: str, j: str, k: str, l: str) -> TensorPolynomial:
    """h[i,j,k,l] - h[i,j,l,k] from the commutation rule."""
    return commutator((i, j, k, l), 2)


def _sym(src: str) -> TensorPolynomial:
    return parse(src)


FORMULAS = {
    "grad-H-trace": "h[a,a,k]",
    "grad-H-shrinker": "h[k,a]*T[a]",
    "hess-H-trace": "h[a,a,k,l]",
    "S-grad": "h[a,b]*h[a,b,k]",
    "S-hess": "h[a,b]*h[a,b,k,l] + h[a,b,k]*h[a,b,l]",
    "gradh-sq": "h[a,b,c]*h[a,b,c]",
    "gradh-grad": "h[a,b,c]*h[a,b,c,k]",
    "f3": "f3",
    "e3": "e3",
}


@lru_cache(maxsize=None)
def formula(name: str) -> TensorPolynomial:
    return _sym(FORMULAS[name])


def H_derivatives(p: LimitPoint) -> dict:
    """Values of H_{,k}, H_{,kl}, H_{,klm} for the chain identities.

    First and second derivatives come from the self-shrinker formulas, the
    third from the corpus formula for nabla^3 H.  Fourth derivatives are
    left as unknown symbols.
    """
    fields = {("dH", ()): p.H()}
    for k in IDX:
        fields[("dH", (k,))] = evaluate(formula("grad-H-shrinker"), p, {"k": k})
    hess = corpus_side("hessian-H", "rhs")
    for k, l in product(IDX, repeat=2):
        fields[("dH", (k, l))] = evaluate(hess, p, {"i": k, "j": l})
    third = corpus_side("third-H", "rhs")
    for k, l, m in product(IDX, repeat=3):
        fields[("dH", (k, l, m))] = evaluate(third, p, {"j": k, "k": l, "l": m})
    return fields


def f3_derivatives(p: LimitPoint) -> dict:
    fields = {("df3", ()): evaluate(formula("f3"), p)}
    grad = corpus_side("grad-f3", "rhs")
    hess = corpus_side("hess-f3", "rhs")
    for k in IDX:
        fields[("df3", (k,))] = evaluate(grad, p, {"l": k})
    for k, l in product(IDX, repeat=2):
        fields[("df3", (k, l))] = evaluate(hess, p, {"l": k, "p": l})
    return fields


def chain_fields(p: LimitPoint, s_value=S) -> dict:
    fields = {("dS", ()): s_value}
    fields.update(H_derivatives(p))
    fields.update(f3_derivatives(p))
    return fields


def chain_identity(order: int, p: LimitPoint, indices: tuple, s_value=S, fields=None):
    """Right side of the order-r derivative of f4 at the limit point (must vanish)."""
    rhs = corpus_side(f"chain-{order}", "rhs")
    labels = ("k", "l", "m", "p")[:order]
    fields = chain_fields(p, s_value) if fields is None else fields
    return evaluate(rhs, p, dict(zip(labels, indices)), fields)


def simons_rhs(p: LimitPoint):
    """Right side of the drift-gradh identity evaluated on component data."""
    return evaluate(corpus_side("drift-gradh", "rhs"), p)


def equation_families(p: LimitPoint) -> dict:
    """Pointwise relations at the limit, keyed by family then index tuple.

    Every entry is an expression that vanishes.  Families: ``grad-H`` (trace
    of h3 against the shrinker gradient), ``hess-H`` (trace of h4 against the
    shrinker Hessian), ``S-grad``, ``S-hess``, ``ricci`` (h4 slot swap),
    ``grad-f4`` and ``hess-f4`` (vanishing derivatives of constant f4).
    """
    hess = corpus_side("hessian-H", "rhs")
    gf4, hf4 = corpus_side("grad-f4", "rhs"), corpus_side("hess-f4", "rhs")
    fam: dict = {k: {} for k in ("grad-H", "hess-H", "S-grad", "S-hess", "ricci", "grad-f4", "hess-f4")}
    for k in IDX:
        fam["grad-H"][(k,)] = (evaluate(formula("grad-H-trace"), p, {"k": k})
                               - evaluate(formula("grad-H-shrinker"), p, {"k": k}))
        fam["S-grad"][(k,)] = evaluate(formula("S-grad"), p, {"k": k})
        fam["grad-f4"][(k,)] = evaluate(gf4, p, {"m": k})
    for k, l in product(IDX, repeat=2):
        if k > l:
            continue
        fam["hess-H"][(k, l)] = (evaluate(formula("hess-H-trace"), p, {"k": k, "l": l})
                                 - evaluate(hess, p, {"i": k, "j": l}))
        fam["S-hess"][(k, l)] = evaluate(formula("S-hess"), p, {"k": k, "l": l})
        fam["hess-f4"][(k, l)] = evaluate(hf4, p, {"m": k, "p": l})
    swap = ricci_difference("i", "j", "k", "l")
    for i, j, k, l in product(IDX, repeat=4):
        if k < l:
            fam["ricci"][(i, j, k, l)] = (p.h4c(i, j, k, l) - p.h4c(i, j, l, k)
                                          - evaluate(swap, p, {"i": i, "j": j, "k": k, "l": l}))
    return fam
