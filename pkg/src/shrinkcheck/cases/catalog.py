"""Step chains for the limit-point case analysis.

Each case fixes the principal curvatures at the limit point, generates the
pointwise relations from the verified identity corpus, and walks the
derivation step by step: every asserted intermediate equation is checked by
substitution, every pinned value by a linear solve, and every division by a
quantity records the nonzero hypothesis it relies on.  Branches at square
relations are explored for both signs.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import sympy as sp

from ..dsl import parse
from .chain import Chain, ConstraintSet, StepMismatch, StepRecord, UnknownCase, UnknownStep, component_expr
from .limit import IDX, LimitPoint, S, chain_fields, equation_families, evaluate, formula

CASES = ("scenario-1", "scenario-2", "case-1-sub-1.1", "case-1-sub-1.1-alt", "case-1-sub-1.2", "case-2")

FAMILY_TAGS = {"grad-H": "3.1-1", "hess-H": "3.1-3", "S-grad": "3.1-4", "S-hess": "3.1-5",
               "ricci": "3.1-6", "grad-f4": "3.1-9", "hess-f4": "3.1-10"}


@lru_cache(maxsize=None)
def _parsed(src: str):
    return parse(src)


class _ChainRHS:
    def __getitem__(self, order: int) -> str:
        from .limit import corpus

        return corpus()[f"chain-{order}"].rhs


CHAIN_RHS = _ChainRHS()


class Context:
    """Limit point, relation families and derivative fields for one case."""

    def __init__(self, case: str, lam: tuple, nonzero: tuple = ()):
        self.case = case
        self.p = LimitPoint.generic(lam)
        self.lam = self.p.lam
        self.fam = equation_families(self.p)
        self.s_value = sum(x ** 2 for x in self.lam)
        self.fields = chain_fields(self.p, self.s_value)
        self.root = Chain(case, self.p)
        self.names = {}
        for (name, idx), v in self.fields.items():
            key = {"dH": "H", "df3": "f3", "dS": "S"}[name]
            self.names[key + ("_" + "".join(map(str, idx)) if idx else "bar")] = v
        self.t = self.p.t
        self._cache_key = None
        self._parsed_text = {}
        self.active = self.root

    @contextmanager
    def branch(self, label: str):
        """Sub-branch that must end in a contradiction; its log is merged back."""
        parent = self.active
        sub = parent.branch(label)
        self.active = sub
        try:
            yield sub
        finally:
            self.active = parent
            parent.merge(sub)

    @property
    def chain(self) -> Chain:
        return self.active

    def P(self, text: str):
        """Equation in component notation; ``H_12``, ``f3_1`` are derivative values."""
        if text not in self._parsed_text:
            self._parsed_text[text] = component_expr(text, self.p, self.names)
        return self._parsed_text[text]

    def _current(self, chain: Chain | None):
        """Point and fields with the chain's substitutions applied (cached per state)."""
        chain = chain or self.active
        key = chain.version
        if self._cache_key != key:
            subs = chain.subs
            self._cache_p = self.p.substitute(subs)
            self._cache_fields = {k: sp.expand(sp.sympify(v).xreplace(subs)) for k, v in self.fields.items()}
            self._cache_key = key
        return self._cache_p, self._cache_fields

    def chain_rhs(self, order: int, idx: tuple, chain: Chain | None = None):
        labels = ("k", "l", "m", "p")[:order]
        return self.dsl(CHAIN_RHS[order], dict(zip(labels, idx)), chain)

    def dsl(self, src: str, free: dict, chain: Chain | None = None):
        p, fields = self._current(chain)
        return evaluate(_parsed(src), p, free, dict(fields))

    def H(self, *idx):
        return self.fields[("dH", tuple(idx))]

    def f3(self, *idx):
        return self.fields[("df3", tuple(idx))]

    def h3(self, *idx):
        return self.p.h3c(*idx)

    def h4(self, *idx):
        return self.p.h4c(*idx)


@dataclass
class CaseReport:
    case: str
    status: str
    witness: dict
    steps: list = field(default_factory=list)
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "contradiction_confirmed"

    def to_json(self) -> dict:
        out = {"case": self.case, "status": self.status, "witness": self.witness,
               "steps": [s.to_json() for s in self.steps]}
        if self.error:
            out["error"] = self.error
        return out


# scenarios ---------------------------------------------------------------

def _scenario_1(ctx: Context) -> dict:
    c = ctx.chain
    mu = ctx.lam[0]
    c.pin("mean-curvature-zero", "Scenario 1", [sum(ctx.lam)], {mu: 0},
          note="equal principal curvatures with H = 0")
    c.check_equal("S-vanishes", "Scenario 1", ctx.s_value, 0)
    return c.contradiction("S-excluded", "Scenario 1",
                           {"relations": ["S = 0"], "polynomial": "S",
                            "conflict": "S = 0 contradicts S != 0 (admissible S >= 1)"})


def _forced_flat(ctx: Context, tag_grad: str, tag_hess: str, tag_trace: str) -> dict:
    """f3 != 0 at the limit forces H_k = 0, t = 0 and H_kk = lam_k = 0."""
    c = ctx.chain
    c.check_equal("f3-closed-form", "2.1-17", ctx.f3(), sp.Rational(3) * sp.prod(ctx.lam),
                  note="f3 = 3 lam1 lam2 lam3 when H = 0")
    c.assume_nonzero("f3-nonzero", "2.1-17", ctx.f3())
    for k in IDX:
        c.forces(f"grad-f4-forces-H{k}", tag_grad, ctx.chain_rhs(1, (k,)), ctx.H(k),
                 note="4/3 f3 H_k = 0")
    for k in IDX:
        c.forces(f"H{k}-forces-t{k}", tag_grad, ctx.H(k), ctx.t[k - 1], {ctx.t[k - 1]: 0},
                 note=f"H_k = lam_k t_k with lam_{k} != 0")
    for k in IDX:
        c.check_proportional(f"hessian-trace-{k}{k}", tag_trace,
                             ctx.P(f"h11{k}{k} + h22{k}{k} + h33{k}{k} - lam{k}"), ctx.fam["hess-H"][(k, k)])
    for k, l in product(IDX, repeat=2):
        if k <= l:
            c.check_equal(f"hess-f4-reduces-{k}{l}", tag_hess, ctx.chain_rhs(2, (k, l)),
                          sp.Rational(4, 3) * ctx.f3() * ctx.H(k, l), note="4/3 f3 H_kl = 0")
    for k in IDX:
        c.forces(f"H{k}{k}-equals-lam{k}", tag_trace, ctx.chain_rhs(2, (k, k)), ctx.lam[k - 1],
                 note=f"H_{k}{k} = lam_{k} must vanish")
    return c.contradiction("all-curvatures-vanish", tag_trace,
                           {"relations": ["lam1 = 0", "lam2 = 0", "lam3 = 0"], "polynomial": "S",
                            "conflict": "lam_k = 0 for all k gives S = 0, contradicting S != 0"})


def _scenario_2(ctx: Context) -> dict:
    c = ctx.chain
    a = ctx.lam[0]
    c.assume_nonzero("lambda-nonzero", "Scenario 2", a, note="S = 6 lam1^2 != 0")
    return _forced_flat(ctx, "2.1-17", "2.1-18", "3.1-11")


def _case_2(ctx: Context) -> dict:
    c = ctx.chain
    for k in IDX:
        c.assume_nonzero(f"lam{k}-nonzero", "Case 2", ctx.lam[k - 1])
    return _forced_flat(ctx, "3.1-53", "3.1-54", "3.1-54")


# case 1: lam = (lam1, -lam1, 0) ------------------------------------------

ROWS = ((1, 1), (2, 2), (3, 3), (1, 2), (1, 3), (2, 3))

S_HESS_ROWS = (
    "lam1*(h1111 - h2211) + 2*h111^2 + h133^2 + 2*h112^2 + 2*h113^2 + 2*h123^2",
    "lam1*(h1122 - h2222) + 2*h112^2 + h233^2 + 2*h111^2 + 2*h123^2 + 2*h113^2",
    "lam1*(h1133 - h2233) + 6*h113^2 + 2*h123^2 + 2*h133^2 + 2*h233^2",
    "lam1*(h1112 - h2212) + 4*h111*h112 + h133*h233 + 4*h113*h123",
    "lam1*(h1113 - h2213) + 2*h111*h113 + 2*h112*h123 + 2*h233*h123",
    "lam1*(h1123 - h2223) + 2*h112*h113 + 2*h111*h123 + 2*h133*h123",
)

F4_HESS_ROWS = (
    "lam1^3*(h1111 - h2211) + 6*lam1^2*h111^2 + 2*lam1^2*h112^2 + 2*lam1^2*h113^2 + 2*lam1^2*h123^2",
    "lam1^3*(h1122 - h2222) + 6*lam1^2*h112^2 + 2*lam1^2*h111^2 + 2*lam1^2*h123^2 + 2*lam1^2*h113^2",
    "lam1^3*(h1133 - h2233) + 6*lam1^2*h113^2 + 2*lam1^2*h123^2 + 2*lam1^2*h133^2 + 2*lam1^2*h233^2",
    "lam1^3*(h1112 - h2212) + 8*lam1^2*h111*h112 + 4*lam1^2*h113*h123",
    "lam1^3*(h1113 - h2213) + 6*lam1^2*h111*h113 + 2*lam1^2*h112*h123 + 2*lam1^2*h113*h133"
    " + 2*lam1^2*h233*h123",
    "lam1^3*(h1123 - h2223) + 6*lam1^2*h112*h113 + 2*lam1^2*h111*h123 + 2*lam1^2*h133*h123"
    " + 2*lam1^2*h113*h233",
)

SQUARE_RELATIONS = {
    (1, 1): "4*h111^2 - h133^2",
    (2, 2): "4*h112^2 - h233^2",
    (1, 2): "4*h111*h112 - h133*h233",
    (1, 3): "h113*(2*h111 + h133)",
    (2, 3): "h113*(2*h112 + h233)",
}

TRACE_ROWS = tuple(f"h11{k}{l} + h22{k}{l} + h33{k}{l}" for k, l in ROWS)

# nabla^3 f4 and nabla^4 f4 at the limit once f3 = 0 and H_k = 0
THIRD_F4_REDUCED = "4/3*dH[k,l]*df3[m] + 4/3*dH[k,m]*df3[l] + 4/3*dH[l,m]*df3[k]"
FOURTH_F4_REDUCED = (
    "4/3*df3[p]*dH[k,l,m] + 4/3*df3[m]*dH[k,l,p] + 4/3*df3[m,p]*dH[k,l] - 2*dS*dH[m,p]*dH[k,l]"
    " + 4/3*dH[m,p]*df3[k,l] + 4/3*df3[l]*dH[k,m,p] + 4/3*df3[l,p]*dH[k,m] + 4/3*df3[l,m]*dH[k,p]"
    " + 4/3*dH[l,p]*df3[k,m] + 4/3*dH[l,m,p]*df3[k] + 4/3*dH[l,m]*df3[k,p]"
    " - 2*dS*dH[k,m]*dH[l,p] - 2*dS*dH[k,p]*dH[l,m]")
FOURTH_F4_NO_GRAD = (
    "4/3*df3[m,p]*dH[k,l] + 4/3*dH[m,p]*df3[k,l] + 4/3*df3[l,p]*dH[k,m] + 4/3*df3[l,m]*dH[k,p]"
    " + 4/3*dH[l,p]*df3[k,m] + 4/3*dH[l,m]*df3[k,p]"
    " - 2*dS*dH[m,p]*dH[k,l] - 2*dS*dH[k,m]*dH[l,p] - 2*dS*dH[k,p]*dH[l,m]")
# nabla^3 f4 once f3 = 0 (H_k kept)
THIRD_F4_F3_ZERO = (
    "4/3*df3[m]*dH[k,l] - 2*dS*dH[m]*dH[k,l] + 4/3*dH[m]*df3[k,l] + 4/3*df3[l]*dH[k,m]"
    " + 4/3*df3[l,m]*dH[k] + 4/3*dH[l]*df3[k,m] + 4/3*dH[l,m]*df3[k] - 2*dS*dH[k,m]*dH[l]"
    " - 2*dS*dH[k]*dH[l,m]")


FORMULAS_SRC = {"gradh-grad": "h[a,b,c]*h[a,b,c,k]"}


def _corpus_rhs(name: str) -> str:
    from .limit import corpus

    return corpus()[name].rhs


def _sub_1_1_h123_zero(ctx: Context, b: Chain) -> None:
    P = ctx.P
    b.assume("hypothesis", "3.1-27", {P("h123"): 0})
    for comp, v in ctx.p.h3.items():
        b.check(f"h{''.join(map(str, comp))}-zero", "3.1-27", v)
    squares = sum(ctx.h4(*idx) ** 2 for idx in product(IDX, repeat=4))
    b.check_equal("simons-sum-of-squares", "2.1-16", ctx.dsl(_corpus_rhs("drift-gradh"), {}), squares)
    b.assume("fourth-vanish", "2.1-16", {v: 0 for v in ctx.p.h4.values()},
             note="a vanishing sum of real squares")
    b.forces("lam1", "3.1-24", ctx.fam["hess-H"][(1, 1)], ctx.lam[0])
    b.contradiction("lam1-vanishes", "3.1-24", {"relations": ["lam1 = 0"], "conflict": "contradicts lam1 != 0"})


def _pin_ricci_rest(ctx: Context, tag: str) -> None:
    """Pin the fourth-derivative components not yet fixed through slot swaps."""
    c = ctx.chain
    open_vars = [v for v in ctx.p.h4.values() if c.value(v) == v]
    eqs = [e for e in ctx.fam["ricci"].values() if c.value(e).free_symbols & set(open_vars)]
    sol = sp.solve([c.value(e) for e in eqs], open_vars, dict=True)
    expected = {v: sol[0][v] for v in open_vars} if len(sol) == 1 else {v: 0 for v in open_vars}
    c.pin("ricci-remaining", tag, eqs, expected)


def _all_index_tuples(order):
    return product(IDX, repeat=order)


def _case_1_common(ctx: Context) -> None:
    """Setup, first and second derivative relations, and the h113 != 0 branch."""
    c, P, l = ctx.chain, ctx.P, ctx.lam[0]
    c.assume_nonzero("lam1-nonzero", "Case 1", l, note="S = 2 lam1^2 != 0")
    c.relate("S-normalization", "Case 1", l, S / 2)
    c.check_equal("S-equals-sum-of-squares", "Case 1", ctx.s_value, S)
    c.check("f3-vanishes", "Case 1", ctx.f3())
    eqs = [ctx.fam["S-grad"][(k,)] for k in IDX] + [ctx.fam["grad-H"][(k,)] for k in IDX]
    c.pin("first-derivatives", "3.1-12", eqs,
          {ctx.h3(1, 2, 2): P("h111"), ctx.h3(2, 2, 2): P("h112"), ctx.h3(2, 2, 3): P("h113"),
           ctx.t[0]: P("(2*h111 + h133)/lam1"), ctx.t[1]: P("-(2*h112 + h233)/lam1"),
           ctx.h3(3, 3, 3): P("-2*h113")})
    c.check("H3-vanishes", "3.1-12", ctx.H(3))
    for row, (k, m) in zip(S_HESS_ROWS, ROWS):
        c.check_proportional(f"S-hessian-{k}{m}", "3.1-13", P(row), ctx.fam["S-hess"][(k, m)])
    for row, (k, m) in zip(F4_HESS_ROWS, ROWS):
        c.check_proportional(f"f4-hessian-{k}{m}", "3.1-14", P(row), ctx.fam["hess-f4"][(k, m)])
    for i, (k, m) in enumerate(ROWS):
        if (k, m) in SQUARE_RELATIONS:
            derived = P(F4_HESS_ROWS[i]) / l ** 2 - P(S_HESS_ROWS[i])
            c.check_proportional(f"square-relation-{k}{m}", "3.1-15", P(SQUARE_RELATIONS[(k, m)]), derived)

    with ctx.branch("h113-nonzero") as b:
        _h113_nonzero(ctx, b)
    c.assume("h113-zero", "Case 1", {P("h113"): 0}, note="the h113 != 0 branch is contradictory")


def _h113_nonzero(ctx: Context, b: Chain) -> None:
    P = ctx.P
    b.assume_nonzero("hypothesis", "3.1-16", P("h113"))
    b.forces("h133", "3.1-16", P(SQUARE_RELATIONS[(1, 3)]), P("2*h111 + h133"), {P("h133"): P("-2*h111")})
    b.forces("h233", "3.1-16", P(SQUARE_RELATIONS[(2, 3)]), P("2*h112 + h233"), {P("h233"): P("-2*h112")})
    for k in IDX:
        b.check(f"t{k}-H{k}", "3.1-16", ctx.H(k)) if k == 3 else b.check(f"t{k}", "3.1-16", ctx.t[k - 1])
        b.check(f"H{k}-vanishes", "3.1-16", ctx.H(k))
    b.check_equal("grad-f3", "3.1-17", ctx.f3(3), P("3*S*h113"))
    b.check_equal("H33", "3.1-18", ctx.H(3, 3), P("-2*h113*t3"))
    b.check_proportional("H33-trace", "3.1-18", P("h1133 + h2233 + h3333 + 2*h113*t3"), ctx.fam["hess-H"][(3, 3)])
    for idx in _all_index_tuples(3):
        free = dict(zip("klm", idx))
        b.check_equal(f"third-f4-{''.join(map(str, idx))}", "3.1-19", ctx.chain_rhs(3, idx),
                      ctx.dsl(THIRD_F4_REDUCED, free))
    b.check_equal("third-f4-333-closed", "3.1-20", ctx.chain_rhs(3, (3, 3, 3)), P("-24*S*h113^2*t3"))
    b.forces("t3", "3.1-20", ctx.chain_rhs(3, (3, 3, 3)), ctx.t[2], {ctx.t[2]: 0})
    b.check("H33-vanishes", "3.1-20", ctx.H(3, 3))
    b.check_equal("fourth-f4-3333", "2.1-20", ctx.chain_rhs(4, (3, 3, 3, 3)),
                  sp.Rational(16, 3) * ctx.f3(3) * ctx.H(3, 3, 3))
    b.check_equal("H333", "2.1-20", ctx.H(3, 3, 3), P("2*h333"))
    b.forces("h113", "2.1-20", ctx.chain_rhs(4, (3, 3, 3, 3)), P("h113"))
    b.contradiction("h113-vanishes", "2.1-20", {"relations": ["h113 = 0"], "conflict": "contradicts h113 != 0"})


def _sub_1_1_common(ctx: Context) -> None:
    c, P = ctx.chain, ctx.P
    _case_1_common(ctx)
    c.assume("hypothesis", "Subcase 1.1", {P("h133"): P("-2*h111")}, note="2 h111 + h133 = 0")
    with ctx.branch("h111-nonzero") as b:
        _sub_1_1_h111_nonzero(ctx, b)
    c.assume("h111-zero", "Subcase 1.1", {P("h111"): 0}, note="the h111 != 0 branch is contradictory")
    c.check("h133-zero", "Subcase 1.1", P("h133"))


def _sub_1_1_h111_nonzero(ctx: Context, b: Chain) -> None:
    P, l = ctx.P, ctx.lam[0]
    b.assume_nonzero("hypothesis", "Subcase 1.1", P("h111"))
    b.forces("h233", "3.1-15", P(SQUARE_RELATIONS[(1, 2)]), P("2*h112 + h233"), {P("h233"): P("-2*h112")})
    for k in IDX:
        b.check(f"H{k}-vanishes", "3.1-1", ctx.H(k))
    b.check_equal("H11", "3.1-3", ctx.H(1, 1), l)
    b.check_equal("grad-f3", "3.1-7", ctx.f3(1), P("3*S*h111"))
    b.check_equal("third-f4-111", "3.1-19", ctx.chain_rhs(3, (1, 1, 1)), P("12*lam1*S*h111"))
    b.forces("h111", "3.1-19", ctx.chain_rhs(3, (1, 1, 1)), P("h111"))
    b.contradiction("h111-vanishes", "3.1-19", {"relations": ["h111 = 0"], "conflict": "contradicts h111 != 0"})


def _sub_1_1_pinned(ctx: Context) -> None:
    """Subcase 1.1 up to every component pinned in terms of S and lam1."""
    c, P, l = ctx.chain, ctx.P, ctx.lam[0]
    _sub_1_1_common(ctx)
    c.note("sign-branch", "3.1-15", "4 h112^2 = h233^2: sign h233 = -2 h112 here, h233 = 2 h112 in case-1-sub-1.1-alt")
    c.assume("h233", "3.1-15", {P("h233"): P("-2*h112")}, note="2 h112 + h233 = 0")
    for k in IDX:
        c.check(f"t{k}-H{k}", "3.1-1", ctx.H(k))
    c.check("t1", "3.1-1", ctx.t[0])
    c.check("t2", "3.1-1", ctx.t[1])
    c.check_equal("H22", "3.1-3", ctx.H(2, 2), -l)
    c.check_equal("grad-f3", "3.1-7", ctx.f3(2), P("3*S*h112"))
    c.check_equal("third-f4-222", "3.1-19", ctx.chain_rhs(3, (2, 2, 2)), P("-12*lam1*S*h112"))
    c.forces("h112", "3.1-19", ctx.chain_rhs(3, (2, 2, 2)), P("h112"), {P("h112"): 0})
    _sub_1_1_tail(ctx)


def _sub_1_1_tail(ctx: Context) -> None:
    """From h112 = h233 = 0 to every component pinned."""
    c, P = ctx.chain, ctx.P
    for idx in _all_index_tuples(4):
        free = dict(zip("klmp", idx))
        c.check_equal(f"fourth-f4-{''.join(map(str, idx))}", "3.1-21", ctx.chain_rhs(4, idx),
                      ctx.dsl(FOURTH_F4_REDUCED, free))
    for k in IDX:
        c.check(f"grad-f3-{k}", "3.1-22", ctx.f3(k))
    for idx in _all_index_tuples(4):
        free = dict(zip("klmp", idx))
        c.check_equal(f"fourth-f4-reduced-{''.join(map(str, idx))}", "3.1-23", ctx.chain_rhs(4, idx),
                      ctx.dsl(FOURTH_F4_NO_GRAD, free))
    hess_values = ("lam1", "-lam1", "0", "h123*t3", "0", "0")
    for (k, m), trace, val in zip(ROWS, TRACE_ROWS, hess_values):
        c.check_equal(f"H{k}{m}", "3.1-24", ctx.H(k, m), P(val))
        c.check_proportional(f"H{k}{m}-trace", "3.1-24", P(f"{trace} - ({val})"), ctx.fam["hess-H"][(k, m)])
    diffs = ("-2*h123^2", "-2*h123^2", "-2*h123^2", "0", "0", "0")
    for (k, m), row, val in zip(ROWS, S_HESS_ROWS, diffs):
        lhs = row.split(" + ")[0]
        c.check_proportional(f"S-hessian-{k}{m}", "3.1-25", P(f"{lhs} - ({val})"), ctx.fam["S-hess"][(k, m)])
    _sub_1_1_second_order(ctx)


def _sub_1_1(ctx: Context) -> dict:
    _sub_1_1_pinned(ctx)
    return _sub_1_1_terminal(ctx)


def _sub_1_1_terminal(ctx: Context) -> dict:
    c, P = ctx.chain, ctx.P
    swap = ctx.fam["ricci"][(1, 3, 1, 3)]
    c.check_proportional("swap-1133", "3.1-33", P("-S/(4*lam1) + h123^2/lam1"), swap)
    c.s_roots("ricci-pins-S", "3.1-33", P("lam1") * swap, {sp.Rational(5, 2)})
    simons = ctx.dsl(_corpus_rhs("drift-gradh"), {})
    c.check_equal("simons-expansion", "2.1-16", simons, P("S + 108/S*h123^4 + 6*h123^2 - 18*S*h123^2"))
    c.check_equal("simons-terminal", "2.1-16", simons, S * (3 - 2 * S))
    c.s_roots("simons-pins-S", "2.1-16", simons, {sp.Rational(3, 2)})
    return c.contradiction("two-values-of-S", "3.1-33", {
        "relations": ["S = 5/2", "S = 3/2"], "polynomials": ["2*S - 5", "S*(3 - 2*S)"],
        "conflict": "the slot-swap relation pins S = 5/2 while the Simons identity pins S = 3/2"})


DIAG_H4 = ("h1111", "h2211", "h3311", "h1122", "h2222", "h3322", "h1133", "h2233", "h3333")


def _sub_1_1_second_order(ctx: Context) -> None:
    c, P = ctx.chain, ctx.P
    displayed = {(1, 1, 1, 1): "H_11*f3_11 - 3/4*S*H_11^2", (2, 2, 2, 2): "H_22*f3_22 - 3/4*S*H_22^2",
                 (3, 3, 3, 3): "H_33*f3_33 - 3/4*S*H_33^2",
                 (1, 1, 2, 2): "4/3*f3_11*H_22 + 4/3*f3_22*H_11 + 16/3*f3_12*H_12 - 2*S*H_11*H_22"
                               " - 4*S*H_12^2"}
    for idx, text in displayed.items():
        c.check_proportional(f"fourth-f4-{''.join(map(str, idx))}", "3.1-26", P(text), ctx.chain_rhs(4, idx))
    for k in (1, 2):
        c.forces(f"f3-hessian-{k}{k}", "3.1-26", P(displayed[(k, k, k, k)]), P(f"f3_{k}{k} - 3/4*S*H_{k}{k}"),
                 note=f"divide by H_{k}{k} = {'' if k == 1 else '-'}lam1")
    c.forces("f3-hessian-33", "3.1-26", ctx.chain_rhs(4, (3, 3, 1, 1)), P("f3_33 - 3/4*S*H_33"),
             note="H_33 = 0, so the (3,3,3,3) instance is empty; the (3,3,1,1) instance gives 4/3 lam1 f3_33 = 0")
    sums = ("lam1*(h1111 + h2211) - S/4 - 2*h123^2", "lam1*(h1122 + h2222) + S/4 + 2*h123^2", "h1133 + h2233")
    for k, text in zip(IDX, sums):
        c.check_proportional(f"f3-hessian-sum-{k}{k}", "3.1-27", P(text), P(f"f3_{k}{k} - 3/4*S*H_{k}{k}"))

    with ctx.branch("h123-zero") as b:
        _sub_1_1_h123_zero(ctx, b)

    drift_s = ctx.dsl(_corpus_rhs("drift-S"), {})
    c.check_equal("gradh-squared", "3.1-28", evaluate(formula("gradh-sq"), ctx.p), P("6*h123^2"))
    c.relate("h123-squared", "3.1-28", P("h123"), (S - 1) * S / 6, note="from |grad h|^2 = (S-1)S")
    c.check("drift-S-consistent", "2.1-15", drift_s)
    c.assume_nonzero("h123-nonzero", "3.1-28", P("h123"))
    for m in IDX:
        grad = ctx.dsl(FORMULAS_SRC["gradh-grad"], {"k": m})
        c.check_equal(f"gradh-grad-{m}", "3.1-28", grad, P(f"6*h123*h123{m}"))
        c.forces(f"h123{m}", "3.1-28", grad, P(f"h123{m}"), {P(f"h123{m}"): 0})
    fam = ctx.fam
    c.pin("ricci-partners", "3.1-28", [fam["ricci"][(1, 2, 1, 3)], fam["ricci"][(1, 2, 2, 3)], fam["ricci"][(1, 3, 2, 3)]],
          {P("h1123"): 0, P("h2213"): 0, P("h3312"): 0})
    c.pin("off-diagonal", "3.1-29",
          [fam["S-hess"][(1, 2)], fam["S-hess"][(1, 3)], fam["S-hess"][(2, 3)], fam["hess-H"][(1, 3)],
           fam["hess-H"][(2, 3)]],
          {P("h2212"): P("h1112"), P("h1113"): 0, P("h3313"): 0, P("h2223"): 0, P("h3323"): 0})
    c.check_equal("f3-hessian-12", "3.1-30", ctx.f3(1, 2), P("3*S*h1112"))
    c.check_proportional("H12-trace", "3.1-30", P("2*h1112 - h123*t3"), fam["hess-H"][(1, 2)])
    c.pin("t3", "3.1-30", [fam["hess-H"][(1, 2)]], {ctx.t[2]: P("2*h1112/h123")})
    expected = {
        "h1111": "S/(8*lam1)", "h2211": "S/(8*lam1) + 2*h123^2/lam1", "h3311": "S/(4*lam1) - 2*h123^2/lam1",
        "h1122": "-(S/(8*lam1) + 2*h123^2/lam1)", "h2222": "-S/(8*lam1)", "h3322": "-S/(4*lam1) + 2*h123^2/lam1",
        "h1133": "-h123^2/lam1", "h2233": "h123^2/lam1", "h3333": "0"}
    eqs = ([fam["hess-H"][(k, k)] for k in IDX] + [fam["S-hess"][(k, k)] for k in IDX]
           + [P(f"f3_{k}{k} - 3/4*S*H_{k}{k}") for k in IDX])
    c.pin("diagonal-fourth", "3.1-32", eqs, {P(k): P(v) for k, v in expected.items()})
    c.check_equal("fourth-f4-1122", "3.1-27", ctx.chain_rhs(4, (1, 1, 2, 2)), P("16/3*f3_12*H_12 - 4*S*H_12^2"))
    c.forces("h1112", "3.1-31", ctx.chain_rhs(4, (1, 1, 2, 2)), P("h1112"), {P("h1112"): 0})
    c.check("t3", "3.1-31", ctx.t[2])
    _pin_ricci_rest(ctx, "3.1-6")


def _solved(c: Chain, expr, var) -> dict:
    """Pin ``var`` from the linear relation ``expr = 0``."""
    return {var: c.value(sp.solve(c.value(expr), var)[0])}


def _x(k: int, l: int) -> str:
    return f"(4*f3_{k}{l} - 3*S*H_{k}{l})"


def _sub_1_1_alt(ctx: Context) -> dict:
    c, P, l = ctx.chain, ctx.P, ctx.lam[0]
    _sub_1_1_common(ctx)
    c.assume("h233", "3.1-15", {P("h233"): P("2*h112")}, note="2 h112 - h233 = 0")
    with ctx.branch("h112-zero") as b:
        b.assume("hypothesis", "3.1-39", {P("h112"): 0})
        b.check("h233-zero", "3.1-39", P("h233"))
        b.check("other-sign", "3.1-39", P("2*h112 + h233"),
                note="both signs agree here, so case-1-sub-1.1 applies verbatim")
        _sub_1_1_tail(ctx)
        _sub_1_1_terminal(ctx)
    c.assume_nonzero("h112-nonzero", "3.1-39", P("h112"), note="h112 = 0 is the case-1-sub-1.1 chain")
    c.check_equal("grad-f3-2", "3.1-34", ctx.f3(2), P("3*S*h112"))
    c.check_equal("H2", "3.1-34", ctx.H(2), P("4*h112"))
    c.check_equal("t2", "3.1-34", ctx.t[1], P("-4*h112/lam1"))
    for k in (1, 3):
        c.check(f"H{k}", "3.1-34", ctx.H(k))
        c.check(f"grad-f3-{k}", "3.1-34", ctx.f3(k))
    hess = ("-4*h112^2/lam1 + lam1", "-4*h112^2/lam1 - lam1", "-8*h112^2/lam1")
    for k, val in zip(IDX, hess):
        c.check_equal(f"H{k}{k}", "3.1-35", ctx.H(k, k), P(val))
        c.check_proportional(f"H{k}{k}-trace", "3.1-35", P(f"{TRACE_ROWS[k - 1]} - ({val})"),
                             ctx.fam["hess-H"][(k, k)])
    f3_hess = ("lam1^2*(h1111 + h2211) - 2*lam1*h123^2", "lam1^2*(h1122 + h2222) + 2*lam1*h123^2",
               "lam1^2*(h1133 + h2233) - 8*lam1*h112^2")
    for k, val in zip(IDX, f3_hess):
        c.check_equal(f"f3-hessian-{k}{k}", "3.1-36", ctx.f3(k, k) / 3, P(val))
    diffs = ("-2*h112^2 - 2*h123^2", "-6*h112^2 - 2*h123^2", "-8*h112^2 - 2*h123^2")
    for k, val in zip(IDX, diffs):
        lhs = S_HESS_ROWS[k - 1].split(" + ")[0]
        c.check_proportional(f"S-hessian-{k}{k}", "3.1-37", P(f"{lhs} - ({val})"), ctx.fam["S-hess"][(k, k)])
    for idx in _all_index_tuples(3):
        c.check_equal(f"third-f4-{''.join(map(str, idx))}", "3.1-38", ctx.chain_rhs(3, idx),
                      ctx.dsl(THIRD_F4_F3_ZERO, dict(zip("klm", idx))))
    for k in IDX:
        idx = (k, k, 2)
        c.check_proportional(f"third-f4-{k}{k}2-display", "3.1-39", P(f"h112*{_x(k, k)}"), ctx.chain_rhs(3, idx))
        c.forces(f"f3-hessian-{k}{k}-forced", "3.1-40", ctx.chain_rhs(3, idx), P(_x(k, k)))
    sums = ("h1111 + h2211 + 2*(h112^2 - h123^2)/lam1 - lam1/2",
            "h1122 + h2222 + 2*(h112^2 + h123^2)/lam1 + lam1/2", "h1133 + h2233 - 4*h112^2/lam1")
    for k, text in zip(IDX, sums):
        c.check_proportional(f"sum-{k}{k}", "3.1-41", P(text), P(_x(k, k)))
    eqs = ([ctx.fam["hess-H"][(k, k)] for k in IDX] + [ctx.fam["S-hess"][(k, k)] for k in IDX]
           + [P(_x(k, k)) for k in IDX])
    c.pin("diagonal-fourth", "3.1-42", eqs,
          {P("h3311"): P("-2*(h112^2 + h123^2)/lam1 + lam1/2"), P("h3322"): P("-2*(h112^2 - h123^2)/lam1 - lam1/2"),
           P("h1133"): P("-(2*h112^2 + h123^2)/lam1"), P("h2233"): P("(6*h112^2 + h123^2)/lam1")},
          solve_for=[P(v) for v in ("h1111", "h2211", "h1122", "h2222", "h3333")])
    swaps = [ctx.fam["ricci"][(1, 3, 1, 3)], ctx.fam["ricci"][(2, 3, 2, 3)]]
    c.check_proportional("swap-1133", "3.1-42", P("h1133 - h3311"), swaps[0])
    c.check_proportional("swap-2233", "3.1-42", P("h2233 - h3322"), swaps[1])
    c.solve_squares("squares", "3.1-42", swaps, {P("h123"): l ** 2 / 2, P("h112"): 0})
    return c.contradiction("h112-vanishes", "3.1-42", {
        "relations": ["h123^2 = lam1^2/2", "h112^2 = 0"],
        "conflict": "h112^2 = 0 contradicts h112 != 0"})


def _sub_1_2(ctx: Context) -> dict:
    c, P = ctx.chain, ctx.P
    _case_1_common(ctx)
    c.assume_nonzero("hypothesis", "Subcase 1.2", P("2*h111 + h133"))
    with ctx.branch("h133-minus") as b:
        b.assume("sign", "3.1-15", {P("h133"): P("-2*h111")}, note="4 h111^2 = h133^2 with h133 = -2 h111")
        b.check("hypothesis-violated", "3.1-15", P("2*h111 + h133"),
                note="the excluded sign of the square relation")
        b.contradiction("sign-excluded", "3.1-15",
                        {"relations": ["2*h111 + h133 = 0"], "conflict": "contradicts 2 h111 + h133 != 0"})
    c.assume("h133", "3.1-43", {P("h133"): P("2*h111")}, note="2 h111 - h133 = 0")
    for v in ("h113", "h223", "h333", "f3_3"):
        c.check(v, "3.1-43", P(v))
    c.check_equal("H1", "3.1-43", ctx.H(1), P("4*h111"))
    c.check_equal("t1", "3.1-43", ctx.t[0], P("4*h111/lam1"))
    c.check_equal("grad-f3-1", "3.1-43", ctx.f3(1), P("3*S*h111"))
    with ctx.branch("h111-zero") as b:
        b.assume("hypothesis", "3.1-43", {P("h111"): 0})
        b.check("hypothesis-violated", "3.1-43", P("2*h111 + h133"))
        b.contradiction("h111-excluded", "3.1-43",
                        {"relations": ["h111 = 0"], "conflict": "contradicts 2 h111 + h133 != 0"})
    c.assume_nonzero("h111-nonzero", "3.1-43", P("h111"))
    c.forces("h233", "3.1-44", P(SQUARE_RELATIONS[(1, 2)]), P("2*h112 - h233"), {P("h233"): P("2*h112")})
    c.check("square-relation-22", "3.1-44", P(SQUARE_RELATIONS[(2, 2)]))
    c.check_equal("H2", "3.1-44", ctx.H(2), P("4*h112"))
    c.check_equal("t2", "3.1-44", ctx.t[1], P("-4*h112/lam1"))
    c.check_equal("grad-f3-2", "3.1-44", ctx.f3(2), P("3*S*h112"))
    hess = ("4*(h111^2 - h112^2)/lam1 + lam1", "4*(h111^2 - h112^2)/lam1 - lam1", "8*(h111^2 - h112^2)/lam1",
            "h123*t3", "-4*h112*h123/lam1 + 2*h111*t3", "4*h111*h123/lam1 + 2*h112*t3")
    for (k, m), trace, val in zip(ROWS, TRACE_ROWS, hess):
        c.check_equal(f"H{k}{m}", "3.1-45", ctx.H(k, m), P(val))
        c.check_proportional(f"H{k}{m}-trace", "3.1-45", P(f"{trace} - ({val})"), ctx.fam["hess-H"][(k, m)])
    f3_hess = ("lam1^2*(h1111 + h2211) - 2*lam1*h123^2", "lam1^2*(h1122 + h2222) + 2*lam1*h123^2",
               "lam1^2*(h1133 + h2233) + 8*lam1*(h111^2 - h112^2)", "lam1^2*(h1112 + h2212)",
               "lam1^2*(h1113 + h2213) - 4*lam1*h112*h123", "lam1^2*(h1123 + h2223) + 4*lam1*h111*h123")
    for (k, m), val in zip(ROWS, f3_hess):
        c.check_equal(f"f3-hessian-{k}{m}", "3.1-46", ctx.f3(k, m) / 3, P(val))
    diffs = ("-6*h111^2 - 2*h112^2 - 2*h123^2", "-2*h111^2 - 6*h112^2 - 2*h123^2",
             "-8*h111^2 - 8*h112^2 - 2*h123^2", "-8*h111*h112", "-6*h112*h123", "-6*h111*h123")
    for (k, m), row, val in zip(ROWS, S_HESS_ROWS, diffs):
        lhs = row.split(" + ")[0]
        c.check_proportional(f"S-hessian-{k}{m}", "3.1-47", P(f"{lhs} - ({val})"), ctx.fam["S-hess"][(k, m)])
    for idx in _all_index_tuples(3):
        c.check_equal(f"third-f4-{''.join(map(str, idx))}", "3.1-38", ctx.chain_rhs(3, idx),
                      ctx.dsl(THIRD_F4_F3_ZERO, dict(zip("klm", idx))))
    # each third-derivative instance forces one combination; its sum is then pinned.
    # (1,2,2) and (1,2,3) carry the Hessians in the slot order used by the other
    # rows; the orderings (2,2,1) and (2,3,1) agree only after the slot swaps
    forced = (((1, 1, 1), f"h111*{_x(1, 1)}", (1, 1), "h1111"),
              ((3, 3, 1), f"h111*{_x(3, 3)}", (3, 3), "h1133"),
              ((1, 1, 3), f"h111*{_x(1, 3)}", (1, 3), "h1113"),
              ((1, 1, 2), f"h112*{_x(1, 1)} + 2*h111*{_x(1, 2)}", (1, 2), "h1112"),
              ((1, 2, 2), f"h111*{_x(2, 2)} + 2*h112*{_x(1, 2)}", (2, 2), "h1122"),
              ((1, 2, 3), f"h111*{_x(2, 3)} + h112*{_x(1, 3)}", (2, 3), "h1123"))
    for idx, text, (k, m), var in forced:
        tag = "".join(map(str, idx))
        c.check_proportional(f"third-f4-{tag}-display", "3.1-48", P(text), ctx.chain_rhs(3, idx))
        c.forces(f"f3-hessian-{k}{m}-forced", "3.1-48", ctx.chain_rhs(3, idx), P(_x(k, m)),
                 _solved(c, P(_x(k, m)), P(var)))
    sums = ("h1111 + h2211 - 2*(h111^2 - h112^2 + h123^2)/lam1 - lam1/2",
            "h1122 + h2222 - 2*(h111^2 - h112^2 - h123^2)/lam1 + lam1/2",
            "h1133 + h2233 + 4*(h111^2 - h112^2)/lam1", "h1112 + h2212 - h123*t3/2",
            "h1113 + h2213 - 2*h112*h123/lam1 - h111*t3", "h1123 + h2223 + 2*h111*h123/lam1 - h112*t3")
    for (k, m), text in zip(ROWS, sums):
        c.check(f"sum-{k}{m}", "3.1-49", P(text))
    expected = {
        "h1111": "-2*(h111^2 + h112^2)/lam1 + lam1/4", "h2211": "2*(2*h111^2 + h123^2)/lam1 + lam1/4",
        "h3311": "2*(h111^2 - h112^2 - h123^2)/lam1 + lam1/2", "h1122": "-2*(2*h112^2 + h123^2)/lam1 - lam1/4",
        "h2222": "2*(h111^2 + h112^2)/lam1 - lam1/4", "h3322": "2*(h111^2 - h112^2 + h123^2)/lam1 - lam1/2",
        "h1133": "-(6*h111^2 + 2*h112^2 + h123^2)/lam1", "h2233": "(2*h111^2 + 6*h112^2 + h123^2)/lam1",
        "h1112": "-4*h111*h112/lam1 + h123*t3/4", "h2212": "4*h111*h112/lam1 + h123*t3/4",
        "h3312": "h123*t3/2", "h1113": "-2*h112*h123/lam1 + h111*t3/2",
        "h2213": "4*h112*h123/lam1 + h111*t3/2", "h3313": "-6*h112*h123/lam1 + h111*t3",
        "h1123": "-4*h111*h123/lam1 + h112*t3/2", "h2223": "2*h111*h123/lam1 + h112*t3/2",
        "h3323": "6*h111*h123/lam1 + h112*t3"}
    eqs = ([ctx.fam["hess-H"][r] for r in ROWS] + [ctx.fam["S-hess"][r] for r in ROWS]
           + [P(_x(k, m)) for k, m in ROWS])
    c.pin("second-order-pinned", "3.1-50", eqs, {P(k): P(v) for k, v in expected.items()}, solve_for=[P("h3333")])
    swaps = [ctx.fam["ricci"][r] for r in ((1, 2, 1, 2), (1, 3, 1, 3), (2, 3, 2, 3))]
    c.check_equal("swap-1122", "3.1-51", P("h1122 - h2211"), P("-4*(h111^2 + h112^2 + h123^2)/lam1 - lam1/2"))
    c.check_proportional("swap-1212", "3.1-51", P("h1122 - h2211 + 2*lam1^3"), swaps[0])
    c.check_proportional("swap-1313", "3.1-51", P("h1133 - h3311"), swaps[1])
    c.check_proportional("swap-2323", "3.1-51", P("h2233 - h3322"), swaps[2])
    c.solve_squares("h111-squared", "3.1-51", swaps,
                    {P("h111"): S ** 2 / 80 - S / 32, P("h112"): S ** 2 / 80 - S / 32, P("h123"): S ** 2 / 10})
    c.relate("h111-squared-relation", "3.1-51", P("h111"), S ** 2 / 80 - S / 32)
    c.assume_nonzero("h123-nonzero", "3.1-51", P("h123"), note="h123^2 = S^2/10 with S != 0")
    lines = ("h111*h1111 + 3*h111*h2211 + 6*h111*h3311 + 3*h112*h1112 + h112*h2212 + 6*h112*h3312 + 6*h123*h1123",
             "h111*h1112 + 3*h111*h2212 + 6*h111*h3312 + 3*h112*h1122 + h112*h2222 + 6*h112*h3322 + 6*h123*h2213",
             "h111*h1113 + 3*h111*h2213 + 6*h111*h3313 + 3*h112*h1123 + h112*h2223 + 6*h112*h3323 + 6*h123*h3312")
    _pin_ricci_rest(ctx, "3.1-6")
    grads = [ctx.dsl(FORMULAS_SRC["gradh-grad"], {"k": m}) for m in IDX]
    for m, text, grad in zip(IDX, lines, grads):
        c.check_proportional(f"gradh-grad-{m}", "3.1-52", P(text), grad)
    c.check("gradh-squared-constant", "3.1-52", grads[0] - ctx.dsl(FORMULAS_SRC["gradh-grad"], {"k": 1}),
            note="|grad h|^2 = (S-1)S is constant, so its gradient vanishes")
    for sign, label in ((1, "h112-plus"), (-1, "h112-minus")):
        with ctx.branch(label) as b:
            b.assume("sign", "3.1-52", {P("h112"): sign * P("h111")}, note=f"h112 = {'' if sign > 0 else '-'}h111")
            g = [ctx.dsl(FORMULAS_SRC["gradh-grad"], {"k": m}) for m in (1, 2)]
            first = "-30*h123^2/lam1 + 4*lam1"
            line1 = P(f"{first} + {7 * sign}*h123*t3")
            line2 = P(f"{-sign}*({first}) + 7*h123*t3")
            b.check_proportional("line-1", "3.1-52", line1, g[0])
            b.check_proportional("line-2", "3.1-52", line2, g[1])
            b.forces("t3", "3.1-52", line2 + sign * line1, P("t3"), {P("t3"): 0}, note="combination is 14 h123 t3")
            b.solve_squares("h123-squared", "3.1-52", [line1], {P("h123"): S / 15})
            b.relate("h123-squared-relation", "3.1-52", P("h123"), S / 15)
            b.s_roots("S-pinned", "3.1-52", P("h123^2") - S ** 2 / 10, {sp.Rational(2, 3)},
                      note="against h123^2 = S^2/10 from the slot swaps")
            b.contradiction("S-gap", "3.1-52", {"relations": ["S = 2/3"],
                                                "conflict": "S = 2/3 lies in the gap 0 < S < 1"})
    return c.contradiction("both-signs-give-S-2/3", "3.1-52", {
        "relations": ["S = 2/3"], "polynomials": ["S^2/10 - S/15"],
        "conflict": "S = 2/3 lies in the gap 0 < S < 1 for both signs h112 = +-h111"})


def _context(case: str) -> Context:
    if case == "scenario-1":
        mu = sp.Symbol("mu")
        return Context(case, (mu, mu, mu))
    if case == "scenario-2":
        a = sp.Symbol("a")
        return Context(case, (a, a, -2 * a))
    if case == "case-2":
        l1, l2 = sp.symbols("lam1 lam2")
        return Context(case, (l1, l2, -l1 - l2))
    if case in CASES:
        l = sp.Symbol("lam1")
        return Context(case, (l, -l, sp.Integer(0)))
    raise UnknownCase(case)


_RUNNERS = {"scenario-1": _scenario_1, "scenario-2": _scenario_2, "case-2": _case_2,
            "case-1-sub-1.1": _sub_1_1, "case-1-sub-1.1-alt": _sub_1_1_alt, "case-1-sub-1.2": _sub_1_2}


def _run(case: str) -> tuple[Context, CaseReport]:
    ctx = _context(case)
    try:
        witness = _RUNNERS[case](ctx)
    except StepMismatch as e:
        return ctx, CaseReport(case, "step_mismatch", {}, ctx.root.log, str(e))
    return ctx, CaseReport(case, "contradiction_confirmed", witness, ctx.root.log)


@lru_cache(maxsize=None)
def _cached_run(case: str) -> tuple[Context, CaseReport]:
    return _run(case)


def verify_case(case: str) -> CaseReport:
    """Run the full step chain for one case."""
    return _run(case)[1]


def verify_all(cases=CASES) -> list[CaseReport]:
    return [verify_case(c) for c in cases]


@dataclass(frozen=True)
class StepCheck:
    ok: bool
    residual: str

    def __iter__(self):
        return iter((self.ok, self.residual))

    def __bool__(self):
        return self.ok


def check_step(case: str, step_id: str) -> StepCheck:
    """Outcome of one logged step, with every earlier step of the chain applied."""
    _, report = _cached_run(case)
    for rec in report.steps:
        if rec.id == step_id:
            return StepCheck(rec.ok, rec.residual)
    raise UnknownStep(f"{case}: {step_id}")


def _polynomial(expr):
    return sp.expand(sp.numer(sp.together(sp.sympify(expr))))


def build_case(case: str) -> ConstraintSet:
    """Tagged polynomial equations of one case: relation families plus every logged step."""
    ctx, report = _cached_run(case)
    out = ConstraintSet(case)
    for fam, entries in ctx.fam.items():
        for idx, expr in entries.items():
            out.add(f"{fam}-{''.join(map(str, idx))}", FAMILY_TAGS[fam], _polynomial(expr))
    for (name, idx), value in ctx.fields.items():
        if name == "df3" and len(idx) in (1, 2):
            sym = sp.Symbol("f3_" + "".join(map(str, idx)))
            out.add(f"definition-{sym}", "3.1-7" if len(idx) == 1 else "3.1-8", _polynomial(sym - value))
        if name == "dH" and len(idx) == 2:
            sym = sp.Symbol("H_" + "".join(map(str, idx)))
            out.add(f"definition-{sym}", "3.1-2", _polynomial(sym - value))
    for rec in report.steps:
        eqs = rec.equation if isinstance(rec.equation, (list, tuple)) else [rec.equation]
        eqs = [e for e in eqs if e is not None]
        for i, e in enumerate(eqs):
            suffix = f"[{i + 1}]" if len(eqs) > 1 else ""
            out.add(rec.id + suffix, rec.paper_eq, _polynomial(e))
    return out


@dataclass(frozen=True)
class GapEntry:
    S: sp.Rational
    gradh_squared: sp.Rational
    admissible: bool


@dataclass(frozen=True)
class GapReport:
    gradh_squared: sp.Expr
    admissible_set: str
    entries: tuple

    def to_json(self) -> dict:
        return {"gradh_squared": str(self.gradh_squared), "admissible": self.admissible_set,
                "entries": [{"S": str(e.S), "gradh_squared": str(e.gradh_squared), "admissible": e.admissible}
                            for e in self.entries]}


def gradh_squared_polynomial():
    """|grad h|^2 as a polynomial in S from the drift identity for S, with S constant."""
    from .limit import corpus_side

    rhs = corpus_side("drift-S", "rhs")
    # any point with |h|^2 = S will do; third derivatives are set to zero
    flat = LimitPoint.generic((sp.sqrt(S), sp.Integer(0), sp.Integer(0)))
    flat = flat.substitute({v: 0 for v in flat.h3.values()})
    # the drift of a constant vanishes, so |grad h|^2 + (rest) = 0
    return sp.factor(-evaluate(rhs, flat, {}, {("dS", ()): S}))


def s_gap_check(values=(0, sp.Rational(1, 2), 1, sp.Rational(3, 2), 2)) -> GapReport:
    """Admissibility of S values: |grad h|^2 = (S-1)S must be nonnegative and S = |h|^2 >= 0."""
    poly = gradh_squared_polynomial()
    entries = []
    for v in values:
        v = sp.Rational(v)
        g = poly.subs(S, v)
        entries.append(GapEntry(v, g, bool(v >= 0 and g >= 0)))
    return GapReport(poly, "{0} U [1, oo)", tuple(entries))


@lru_cache(maxsize=None)
def simons_terminal_polynomial():
    """Drift identity for |grad h|^2 on the fully pinned case-1-sub-1.1 data, as a polynomial in S."""
    ctx = _context("case-1-sub-1.1")
    _sub_1_1_pinned(ctx)
    value = ctx.chain.value(ctx.dsl(_corpus_rhs("drift-gradh"), {}))
    if value.free_symbols - {S}:
        raise StepMismatch(StepRecord("simons-terminal", "2.1-16", "identity", False, str(value)))
    return sp.factor(value)
