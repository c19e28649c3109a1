"""Step-chain bookkeeping for exact case analysis.

A chain carries a substitution map (pinned variables), a list of square
relations ``v**2 = value`` used as reduction rules, and the nonzero
hypotheses in force.  Each step either checks an asserted identity by
substitution, pins variables by a linear solve and compares with the
asserted values, or records a branch hypothesis.
"""
from __future__ import annotations

import re
from itertools import count
from dataclasses import dataclass, field

import sympy as sp

from .limit import LimitPoint, S


class StepMismatch(Exception):
    def __init__(self, step: "StepRecord"):
        super().__init__(f"step {step.id} ({step.paper_eq}) failed: residual {step.residual}")
        self.step = step


class UnknownStep(KeyError):
    pass


class UnknownCase(KeyError):
    pass


@dataclass
class StepRecord:
    id: str
    paper_eq: str
    kind: str
    ok: bool
    residual: str = "0"
    note: str = ""
    equation: object = None

    def to_json(self) -> dict:
        out = {"id": self.id, "paper_eq": self.paper_eq, "ok": self.ok, "residual": self.residual}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class ConstraintSet:
    """Tagged equations (expression == 0) instantiated for one case."""

    case: str
    equations: list = field(default_factory=list)

    def add(self, eq_id: str, tag: str, expr) -> None:
        if not tag:
            raise ValueError(f"equation {eq_id} has no provenance tag")
        if any(e[0] == eq_id for e in self.equations):
            raise ValueError(f"duplicate equation id {eq_id}")
        self.equations.append((eq_id, tag, expr))

    def ids(self) -> list[str]:
        return [e[0] for e in self.equations]

    def tags(self) -> set[str]:
        return {e[1] for e in self.equations}

    def get(self, eq_id: str):
        for i, _, e in self.equations:
            if i == eq_id:
                return e
        raise KeyError(eq_id)

    def __len__(self):
        return len(self.equations)


_STATE = count()

_COMPONENT = re.compile(r"\bh([123]{3,4})\b")


def component_expr(text: str, point: LimitPoint, extra: dict | None = None):
    """Parse an equation written with frame components like ``h2211``.

    Four-digit components are ordered derivatives h_{ijkl}; they are mapped
    onto the stored representative (first three slots sorted).  ``lam1`` etc.
    refer to the case's principal curvatures.
    """
    def repl(m):
        d = tuple(int(c) for c in m.group(1))
        if len(d) == 3:
            return "h" + "".join(map(str, sorted(d)))
        return "h" + "".join(map(str, sorted(d[:3]))) + "_" + str(d[3])

    text = _COMPONENT.sub(repl, text.replace("^", "**"))
    names = {str(v): v for v in point.variables()}
    names.update({"S": S, "lam1": point.lam[0], "lam2": point.lam[1], "lam3": point.lam[2],
                  "t1": point.t[0], "t2": point.t[1], "t3": point.t[2]})
    names.update(extra or {})
    expr = sp.sympify(text, locals=names)
    known = set().union(*(sp.sympify(v).free_symbols for v in names.values()))
    unknown = expr.free_symbols - known
    if unknown:
        raise ValueError(f"unknown names in {text!r}: {sorted(map(str, unknown))}")
    return expr


class _NotRationalizable(Exception):
    pass


_COEFFS = sp.QQ.frac_field(S)


def _fast_reduce(expr, relations: dict):
    """Normal form in Q(S)[gens] modulo ``v**2 = r``, as a sympy expression.

    Denominators are cleared with conjugates through the square relations;
    anything else raises ``_NotRationalizable``.
    """
    gens = sorted(expr.free_symbols - {S}, key=str)
    if not gens:
        return sp.cancel(expr) if expr.has(S) else expr
    R = sp.polys.rings.ring(gens, _COEFFS)[0]
    idx = {g: i for i, g in enumerate(gens)}
    rel = []
    for var, val in relations.items():
        if var in idx:
            if val.free_symbols - {S}:
                raise _NotRationalizable(var)
            rel.append((idx[var], _COEFFS.from_sympy(val)))

    def mod(p):
        if not rel or p.is_ground:
            return p
        out = {}
        for monom, c in p.items():
            if any(monom[i] > 1 for i, _ in rel):
                m = list(monom)
                for i, r in rel:
                    if m[i] > 1:
                        c = c * r ** (m[i] // 2)
                        m[i] %= 2
                monom = tuple(m)
            out[monom] = out.get(monom, _COEFFS.zero) + c
        q = R.zero.copy()
        for monom, c in out.items():
            if c:
                q[monom] = c
        return q

    def inverse(p):
        acc = R.one
        while not p.is_ground:
            deg = p.degrees()
            pick = next((i for i, r in rel if deg[i] == 1), None)
            if pick is None or any(d and i not in dict(rel) for i, d in enumerate(deg)):
                raise _NotRationalizable(p)
            r = dict(rel)[pick]
            g = R.gens[pick]
            b = R.zero.copy()
            a = R.zero.copy()
            for monom, c in p.items():
                if monom[pick]:
                    m = list(monom)
                    m[pick] = 0
                    b[tuple(m)] = c
                else:
                    a[monom] = c
            acc = mod(acc * (a - b * g))
            p = mod(a * a - b * b * r)
        if not p:
            raise ZeroDivisionError("denominator vanishes under the square relations")
        return acc * (1 / p.LC)

    cache = {}

    def conv(e):
        if e in cache:
            return cache[e]
        if e.is_Rational:
            out = R(sp.QQ(int(e.p), int(e.q)))
        elif e == S or not (e.free_symbols - {S}):
            out = R(_COEFFS.from_sympy(e))
        elif e.is_Symbol:
            out = R.gens[idx[e]]
        elif e.is_Add:
            out = R.zero
            for a in e.args:
                out = out + conv(a)
        elif e.is_Mul:
            out = R.one
            for a in e.args:
                out = mod(out * conv(a))
        elif e.is_Pow and e.exp.is_Integer:
            base = conv(e.base)
            k = int(e.exp)
            if k < 0:
                base, k = inverse(base), -k
            out = R.one
            for _ in range(k):
                out = mod(out * base)
        else:
            raise _NotRationalizable(e)
        cache[e] = out
        return out

    return mod(conv(expr)).as_expr()


class Chain:
    def __init__(self, case: str, point: LimitPoint, base_subs: dict | None = None):
        self.case = case
        self.point = point
        self.subs: dict = {}
        self.relations: dict = {}
        self.nonzero: list = []
        self.log: list[StepRecord] = []
        self.prefix = ""
        self.version = next(_STATE)
        if base_subs:
            self.subs.update(base_subs)

    # algebra -----------------------------------------------------------
    def value(self, expr):
        expr = sp.sympify(expr)
        for _ in range(50):
            new = expr.xreplace(self.subs)
            if new == expr:
                break
            expr = new
        return self.reduce(expr)

    def reduce(self, expr):
        expr = sp.sympify(expr)
        try:
            return _fast_reduce(expr, self.relations)
        except _NotRationalizable:
            pass
        expr = sp.together(sp.expand(expr))
        num, den = sp.fraction(expr)
        num, den = self._rem(num), self._rem(den)
        for var, val in self.relations.items():
            if den.has(var) and den.is_polynomial(var):
                # multiply by the conjugate so the denominator is free of var
                b = den.coeff(var, 1)
                a = sp.expand(den - b * var)
                num = self._rem(num * (a - b * var))
                den = self._rem(a ** 2 - b ** 2 * val)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes under the square relations")
        return sp.cancel(num / den) if den != 1 else sp.expand(num)

    def _rem(self, poly):
        poly = sp.expand(poly)
        for var, val in self.relations.items():
            if poly.has(var):
                poly = sp.expand(sp.rem(poly, var ** 2 - val, var)) if poly.is_polynomial(var) else poly
        return poly

    def is_zero(self, expr) -> bool:
        v = self.value(expr)
        return v == 0 or sp.simplify(v) == 0

    # steps -------------------------------------------------------------
    def _record(self, sid, eq, kind, ok, residual=0, note="", equation=None):
        rid = self.prefix + sid
        # later equations re-check some quantities; repeats get a running suffix
        seen = sum(1 for r in self.log if r.id == rid or r.id.startswith(rid + "#"))
        if seen:
            rid = f"{rid}#{seen + 1}"
        rec = StepRecord(rid, eq, kind, bool(ok), str(residual), note, equation)
        self.log.append(rec)
        if not ok:
            raise StepMismatch(rec)
        return rec

    def check(self, sid: str, eq: str, expr, note: str = "") -> StepRecord:
        """Asserted identity: ``expr`` vanishes under current substitutions."""
        v = self.value(expr)
        ok = v == 0 or sp.simplify(v) == 0
        return self._record(sid, eq, "identity", ok, 0 if ok else v, note, expr)

    def check_equal(self, sid: str, eq: str, lhs, rhs, note: str = "") -> StepRecord:
        return self.check(sid, eq, sp.sympify(lhs) - sp.sympify(rhs), note)

    def check_proportional(self, sid: str, eq: str, asserted, derived, note: str = "") -> StepRecord:
        """``asserted`` is ``derived`` times known nonzero factors (or both vanish)."""
        a, d = self.value(asserted), self.value(derived)
        if a == 0 and d == 0:
            return self._record(sid, eq, "equivalence", True, 0, note, asserted)
        if a == 0 or d == 0:
            return self._record(sid, eq, "equivalence", False, a - d, note)
        ratio = self.reduce(a / d)
        ok = ratio != 0 and all(self._known_nonzero(b) for b in self._factors(ratio))
        return self._record(sid, eq, "equivalence", ok, 0 if ok else sp.factor(a - d), note, asserted)

    def pin(self, sid: str, eq: str, equations, expected: dict, note: str = "", solve_for=()) -> StepRecord:
        """Solve ``equations`` for the keys of ``expected`` and compare.

        Keys already pinned are compared directly; ``solve_for`` names extra
        unknowns that are solved and pinned without an asserted value.
        """
        unknowns = [v for v in expected if self.value(v) == v] + [v for v in solve_for if self.value(v) == v]
        eqs = [self.value(e) for e in equations]
        eqs = [sp.numer(sp.together(e)) for e in eqs if e != 0]
        sol = [{}]
        if unknowns:
            sol = sp.solve(eqs, unknowns, dict=True) if eqs else []
            if len(sol) != 1 or set(sol[0]) != set(unknowns):
                return self._record(sid, eq, "solve", False, f"no unique solution: {sol}", note)
        solved = {v: self.value(x) for v, x in sol[0].items()}
        bad = []
        for var, want in expected.items():
            got = solved.get(var, self.value(sp.sympify(self.value(var)).xreplace(solved)))
            want_v = self.value(want)
            if self.value(got - want_v) != 0:
                bad.append(f"{var}: {got} != {want_v}")
        if bad:
            return self._record(sid, eq, "solve", False, "; ".join(bad), note)
        self.set_values(solved)
        leftover = [e for e in eqs if self.value(e) != 0]
        if leftover:
            return self._record(sid, eq, "solve", False, f"unsatisfied: {leftover[0]}", note)
        return self._record(sid, eq, "solve", True, 0, note, [sp.sympify(v) - expected[v] for v in expected])

    def solve_squares(self, sid: str, eq: str, equations, expected: dict, note: str = "") -> dict:
        """Solve equations that are linear in the squares of the given variables."""
        aux = {v: sp.Dummy(f"{v}_sq") for v in expected}
        eqs = []
        for e in equations:
            e = sp.expand(sp.numer(sp.together(self.value(e))))
            for v, q in aux.items():
                e = sp.expand(e.subs(v ** 2, q))
                if e.has(v):
                    return self._record(sid, eq, "squares", False, f"odd power of {v} in {e}", note)
            eqs.append(e)
        sol = sp.solve(eqs, list(aux.values()), dict=True)
        if len(sol) != 1 or set(sol[0]) != set(aux.values()):
            self._record(sid, eq, "squares", False, f"no unique solution: {sol}", note)
        got = {v: self.value(sol[0][q]) for v, q in aux.items()}
        bad = [f"{v}^2: {got[v]} != {self.value(w)}" for v, w in expected.items() if self.value(got[v] - w) != 0]
        self._record(sid, eq, "squares", not bad, "; ".join(bad) or 0, note,
                     [sp.sympify(v) ** 2 - w for v, w in expected.items()])
        return got

    def set_values(self, values: dict) -> None:
        self.version = next(_STATE)
        values = {k: sp.sympify(v) for k, v in values.items()}
        self.subs = {k: self.reduce(v.xreplace(values)) for k, v in self.subs.items()}
        self.subs.update(values)
        for k in list(self.subs):
            self.subs[k] = self.value(self.subs[k])

    def assume(self, sid: str, eq: str, values: dict, note: str = "") -> StepRecord:
        """Branch hypothesis pinning variables (e.g. one sign of a square root)."""
        self.set_values(values)
        return self._record(sid, eq, "branch", True, 0, note, [sp.sympify(k) - v for k, v in values.items()])

    def assume_nonzero(self, sid: str, eq: str, expr, note: str = "") -> StepRecord:
        v = self.value(expr)
        if v == 0:
            return self._record(sid, eq, "nonzero", False, 0, note or "hypothesis contradicts pinned data")
        self.nonzero.append(v)
        return self._record(sid, eq, "nonzero", True, 0, note or f"{v} != 0")

    def relate(self, sid: str, eq: str, var, value, note: str = "") -> StepRecord:
        """Adopt ``var**2 = value`` as a reduction rule."""
        self.version = next(_STATE)
        self.relations[var] = self.value(value)
        for k in list(self.subs):
            self.subs[k] = self.value(self.subs[k])
        return self._record(sid, eq, "relation", True, 0, note or f"{var}^2 = {self.relations[var]}",
                            var ** 2 - value)

    def note(self, sid: str, eq: str, note: str) -> StepRecord:
        return self._record(sid, eq, "remark", True, 0, note)

    def forces(self, sid: str, eq: str, expr, target, then: dict | None = None, note: str = "") -> StepRecord:
        """``expr`` vanishes and equals ``c * target**k`` with c a product of known nonzero factors.

        Hence ``target`` vanishes.  ``then`` optionally pins variables that
        encode this consequence; it must make ``target`` vanish.
        """
        v, f = self.value(expr), self.value(target)
        if f == 0:
            ok = v == 0
            return self._record(sid, eq, "factor", ok, v, note or "target already vanishes", expr)
        q = self.reduce(v / f)
        own = set(self._factors(f))
        bad = [b for b in self._factors(q) if b not in own and not self._known_nonzero(b)]
        if bad:
            return self._record(sid, eq, "factor", False, sp.factor(q), note or "cofactor not known nonzero")
        if then:
            self.set_values(then)
            rest = self.value(target)
            if rest != 0:
                return self._record(sid, eq, "factor", False, rest, note or "pinned values do not annihilate target")
        return self._record(sid, eq, "factor", True, 0, note, expr)

    def s_roots(self, sid: str, eq: str, expr, expected: set, note: str = "") -> sp.Poly:
        """``expr = 0`` reduces to a polynomial in S whose nonzero roots are ``expected``."""
        v = sp.together(self.value(expr))
        num = sp.expand(sp.numer(v))
        if num.free_symbols - {S}:
            self._record(sid, eq, "S-polynomial", False, num, note or "not univariate in S")
        poly = sp.Poly(num, S)
        roots = {r for r in sp.roots(poly, filter="Q") if r != 0}
        want = {sp.Rational(r) for r in expected}
        ok = roots == want and all(poly.eval(r) == 0 for r in want)
        self._record(sid, eq, "S-polynomial", ok, 0 if ok else f"roots {sorted(roots)} != {sorted(want)}",
                     note or f"{sp.factor(num)} = 0", expr)
        return poly

    @staticmethod
    def _factors(q) -> list:
        out = []
        for part in sp.fraction(sp.factor(q)):
            c, fl = sp.factor_list(part)
            out.extend(b for b, _ in fl)
        return out

    def _known_nonzero(self, b) -> bool:
        if b.is_number:
            return b != 0
        if b == S:
            return True
        for z in self.nonzero:
            if sp.cancel(b / z).is_number or b in self._factors(z):
                return True
            # z != 0 with z^2 = r makes every factor of r nonzero
            if z in self.relations and any(sp.cancel(b / f).is_number for f in self._factors(self.relations[z])):
                return True
        return False

    def contradiction(self, sid: str, eq: str, witness: dict, note: str = "") -> dict:
        self._record(sid, eq, "contradiction", True, 0, note or witness.get("conflict", ""))
        return witness

    def branch(self, label: str) -> "Chain":
        """Independent copy for a sub-branch; its log is merged by the caller."""
        sub = Chain(self.case, self.point)
        sub.subs, sub.relations, sub.nonzero = dict(self.subs), dict(self.relations), list(self.nonzero)
        sub.prefix = f"{self.prefix}{label}/"
        return sub

    def merge(self, sub: "Chain") -> None:
        self.log.extend(sub.log)
