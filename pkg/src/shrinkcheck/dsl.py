"""Text grammar, recursive-descent parser and printer for tensor polynomials.

Grammar (whitespace-insensitive, ``*`` mandatory between factors)::

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := INT ['/' INT]
            | sym '[' idx (',' idx)* ']'        sym in h, hs, T, delta, R
            | field ['[' idx (',' idx)* ']']    field in dH, df3, dS
            | 'H' | 'S' | 'f3' | 'f4' | 'X2' | 'e3' | 'e4' | 'n'
            | 'nabla(' idx ',' expr ')' | 'lap(' expr ')' | 'L(' expr ')'
            | '(' expr ')'

Identity files hold one ``name : lhs == rhs [given hyp, ...]`` statement per
line; ``#`` starts a comment and a trailing backslash continues a line.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from pathlib import Path

from .tensor import MalformedIndexing, TensorPolynomial, constant, dim, factor


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 1, origin: str = "<expr>"):
        super().__init__(f"{origin}:{line}:{col}: {msg}")
        self.line, self.col, self.origin = line, col, origin


class ArityError(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


@dataclass(frozen=True)
class SourceExpr:
    text: str
    origin: str = "<expr>"
    line: int = 1


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/\[\](),]))")

INDEXED = {"h": (2, 4), "hs": (3, None), "T": (1, 1), "delta": (2, 2), "R": (4, 4)}
FIELDS = ("dH", "df3", "dS")
SCALARS = ("H", "S", "f3", "f4", "X2", "e3", "e4", "n")
OPERATORS = ("nabla", "lap", "L")


def _tokenize(text: str, origin: str, line0: int):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", line0, col, origin)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start + 1))
        pos = m.end()
    toks.append(("eof", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, src: SourceExpr):
        self.src = src
        self.toks = _tokenize(src.text, src.origin, src.line)
        self.i = 0

    def err(self, msg, cls=ParseError, tok=None):
        tok = tok or self.toks[self.i]
        raise cls(msg, self.src.line, tok[2], self.src.origin)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None, kind=None):
        tok = self.toks[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            self.err(f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "eof":
            self.err(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        terms = []
        sign = 1
        if self.peek()[1] == "-":
            self.take("-")
            sign = -1
        elif self.peek()[1] == "+":
            self.take("+")
        terms.append((sign, self.term()))
        while self.peek()[1] in ("+", "-"):
            sign = 1 if self.take()[1] == "+" else -1
            terms.append((sign, self.term()))
        return ("sum", terms)

    def term(self):
        facs = [self.factor()]
        while self.peek()[1] == "*":
            self.take("*")
            facs.append(self.factor())
        return ("prod", facs)

    def indices(self):
        self.take("[")
        idx = [self.take(kind="id")[1]]
        while self.peek()[1] == ",":
            self.take(",")
            idx.append(self.take(kind="id")[1])
        self.take("]")
        return tuple(idx)

    def factor(self):
        tok = self.peek()
        kind, val, _ = tok
        if kind == "num":
            self.take()
            q = Fraction(int(val))
            if self.peek()[1] == "/":
                self.take("/")
                den = self.take(kind="num")
                if int(den[1]) == 0:
                    self.err("zero denominator", tok=den)
                q /= int(den[1])
            return ("num", q)
        if val == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if kind != "id":
            self.err(f"unexpected {val or 'end of input'!r}")
        self.take()
        if val in INDEXED:
            idx = self.indices()
            lo, hi = INDEXED[val]
            if len(idx) < lo or (hi is not None and len(idx) > hi):
                self.err(f"{val} takes {lo}..{hi or 'any'} indices, got {len(idx)}", ArityError, tok)
            return ("sym", val, idx)
        if val in FIELDS:
            idx = self.indices() if self.peek()[1] == "[" else ()
            return ("sym", val, idx)
        if val in SCALARS:
            return ("scalar", val)
        if val in OPERATORS:
            self.take("(")
            if val == "nabla":
                k = self.take(kind="id")[1]
                self.take(",")
                node = self.expr()
                self.take(")")
                return ("nabla", k, node)
            node = self.expr()
            self.take(")")
            return (val, node)
        self.err(f"unknown symbol {val!r}", UnknownSymbol, tok)


def _generalized_delta(rank: int) -> TensorPolynomial:
    """Contraction of ``rank`` copies of h with the rank-``rank`` generalized
    Kronecker delta: sum over permutations of sign * product of traces."""
    ups = [f"~u{k}" for k in range(rank)]
    downs = [f"~d{k}" for k in range(rank)]
    hs = constant(1)
    for u, d in zip(ups, downs):
        hs = hs * factor("h", u, d)
    total = TensorPolynomial()
    for perm in permutations(range(rank)):
        sign = _perm_sign(perm)
        deltas = constant(sign)
        for k, p in enumerate(perm):
            deltas = deltas * factor("delta", ups[k], downs[p])
        total = total + deltas * hs
    return total


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for start in range(len(perm)):
        if start in seen:
            continue
        length, j = 0, start
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _scalar(name: str) -> TensorPolynomial:
    h = factor
    if name == "H":
        return h("h", "a", "a")
    if name == "S":
        return h("h", "a", "b") * h("h", "a", "b")
    if name == "f3":
        return h("h", "a", "b") * h("h", "b", "c") * h("h", "c", "a")
    if name == "f4":
        return h("h", "a", "b") * h("h", "b", "c") * h("h", "c", "d") * h("h", "d", "a")
    if name == "X2":
        # |X|^2 = |X^T|^2 + <X,nu>^2 with <X,nu> = -H
        return h("T", "a") * h("T", "a") + _scalar("H") * _scalar("H")
    if name == "e3":
        return _generalized_delta(3).scale(Fraction(1, 6))
    if name == "e4":
        return _generalized_delta(4).scale(Fraction(1, 24))
    if name == "n":
        return dim(1)
    raise KeyError(name)


def _literal_labels(node) -> Counter:
    """Index labels as written; a label may appear at most twice per term."""
    kind = node[0]
    if kind == "sym":
        out = Counter(node[2])
    elif kind == "sum":
        out = Counter()
        for _, t in node[1]:
            out |= _literal_labels(t)
    elif kind == "prod":
        out = sum((_literal_labels(f) for f in node[1]), Counter())
    elif kind == "nabla":
        out = _literal_labels(node[2]) + Counter((node[1],))
    elif kind in ("lap", "L"):
        out = _literal_labels(node[1])
    else:
        return Counter()
    over = sorted(l for l, c in out.items() if c > 2)
    if over:
        raise MalformedIndexing(f"index {over[0]!r} occurs {out[over[0]]} times in one term")
    return out


def _resolve(node) -> TensorPolynomial:
    kind = node[0]
    if kind == "num":
        return constant(node[1])
    if kind == "sym":
        return factor(node[1], *node[2])
    if kind == "scalar":
        return _scalar(node[1])
    if kind == "sum":
        out = TensorPolynomial()
        for sign, t in node[1]:
            v = _resolve(t)
            out = out + (v if sign > 0 else -v)
        return out
    if kind == "prod":
        out = constant(1)
        for f in node[1]:
            out = out * _resolve(f)
        return out
    from . import deriv

    if kind == "nabla":
        return deriv.nabla(_resolve(node[2]), node[1])
    if kind == "lap":
        return deriv.laplacian(_resolve(node[1]))
    if kind == "L":
        return deriv.l_op(_resolve(node[1]))
    raise AssertionError(kind)


def parse(src) -> TensorPolynomial:
    if isinstance(src, str):
        src = SourceExpr(src)
    tree = _Parser(src).parse()
    try:
        _literal_labels(tree)
        return _resolve(tree)
    except MalformedIndexing as exc:
        raise ParseError(str(exc), src.line, 1, src.origin) from exc


# printing -------------------------------------------------------------

def _fmt_factor(name: str, idx: tuple) -> str:
    if name in FIELDS:
        return name + (f"[{','.join(idx)}]" if idx else "")
    if name == "h" and len(idx) > 4:
        return f"nabla({idx[-1]},{_fmt_factor(name, idx[:-1])})"
    return f"{name}[{','.join(idx)}]"


def to_source(expr: TensorPolynomial) -> str:
    """Deterministic text form; ``parse(to_source(e)) == e`` for canonical e."""
    if expr.is_zero():
        return "0"
    parts = []
    for coeff, dpow, facs in expr.monomials():
        body = ["n"] * dpow + [_fmt_factor(n, i) for n, i in facs]
        mag = abs(coeff)
        if mag != 1 or not body:
            body.insert(0, str(mag))
        text = "*".join(body)
        if not parts:
            parts.append(("-" if coeff < 0 else "") + text)
        else:
            parts.append(("- " if coeff < 0 else "+ ") + text)
    return " ".join(parts)


print_expr = to_source


# identity files -------------------------------------------------------

@dataclass(frozen=True)
class Statement:
    name: str
    lhs: SourceExpr
    rhs: SourceExpr
    hyps: tuple = field(default_factory=tuple)


_STMT = re.compile(r"^\s*(?P<name>[^:\s]+)\s*:\s*(?P<body>.*?)\s*(?:\[\s*given\s+(?P<hyps>[^\]]*)\])?\s*$")


def parse_identity_file(text: str, origin: str = "<corpus>") -> list[Statement]:
    out = []
    pending, start = "", 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not pending:
            start = lineno
        if line.endswith("\\"):
            pending += line[:-1] + " "
            continue
        line = pending + line
        pending = ""
        if not line.strip():
            continue
        m = _STMT.match(line)
        if not m or "==" not in m.group("body"):
            raise ParseError("expected 'name : lhs == rhs [given ...]'", start, 1, origin)
        lhs, rhs = m.group("body").split("==", 1)
        hyps = tuple(h.strip() for h in (m.group("hyps") or "").split(",") if h.strip())
        out.append(Statement(m.group("name"), SourceExpr(lhs.strip(), origin, start),
                             SourceExpr(rhs.strip(), origin, start), hyps))
    return out


def load_identity_file(path) -> list[Statement]:
    path = Path(path)
    return parse_identity_file(path.read_text(encoding="utf-8"), str(path))
