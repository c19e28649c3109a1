"""Seeded property suites over random matrices and random tensor expressions."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .deriv import nabla, normalize
from .dsl import parse, to_source
from .invariants import (ShapeOperator, check_newton_identities, diagonal_frame_gradients,
                         finite_difference_gradients, random_h4, random_symmetric_h3)
from .tensor import TensorPolynomial, canonicalize

LABELS = "abcdefg"
RANKS = {"h": (2, 3, 4), "T": (1,)}
SCALARS = ("H", "S", "f3", "X2")


def random_monomial(rng: random.Random, max_factors: int = 4, max_rank: int = 4, free: tuple = ()) -> tuple:
    """Factors whose labels pair up, leaving exactly ``free`` unpaired."""
    while True:
        slots = []
        for _ in range(rng.randint(1, max_factors)):
            name = rng.choice(("h", "h", "h", "T"))
            rank = rng.choice([r for r in RANKS[name] if r <= max_rank])
            slots.append((name, rank))
        total = sum(r for _, r in slots)
        if (total - len(free)) % 2 == 0 and total >= len(free):
            break
    pool = list(free)
    dummies = (total - len(free)) // 2
    for q in range(dummies):
        pool += [LABELS[q % len(LABELS)] + (str(q // len(LABELS)) if q >= len(LABELS) else "")] * 2
    rng.shuffle(pool)
    out, pos = [], 0
    for name, rank in slots:
        out.append((name, tuple(pool[pos:pos + rank])))
        pos += rank
    return tuple(out)


def random_expression(rng: random.Random, max_terms: int = 3, max_factors: int = 3, max_rank: int = 4,
                      free: tuple = ()) -> TensorPolynomial:
    out = TensorPolynomial()
    for _ in range(rng.randint(1, max_terms)):
        coeff = Fraction(rng.randint(-6, 6) or 1, rng.randint(1, 4))
        term = TensorPolynomial.from_terms([(coeff, 0, random_monomial(rng, max_factors, max_rank, free))])
        if rng.random() < 0.3:
            term = term * parse(rng.choice(SCALARS))
        out = out + term
    return out


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int = 0
    worst: float = 0.0
    threshold: float = 0.0
    elapsed_s: float = 0.0
    examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {"name": self.name, "trials": self.trials, "failures": self.failures, "worst": self.worst,
                "threshold": self.threshold, "ok": self.ok, "examples": self.examples[:3]}


def _timed(fn):
    def run(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.elapsed_s = round(time.perf_counter() - start, 3)
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def newton_float(trials: int, seed: int, tol: float = 1e-9) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("newton-float", trials, threshold=tol)
    for _ in range(trials):
        m = rng.uniform(-3, 3, (3, 3))
        m = (m + m.T) / 2
        r = check_newton_identities(ShapeOperator.from_matrix(m.tolist()))
        worst = max(r.relative)
        res.worst = max(res.worst, worst)
        if worst > tol:
            res.failures += 1
            res.examples.append(m.tolist())
    return res


@_timed
def newton_rational(trials: int, seed: int) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("newton-rational", trials)
    for _ in range(trials):
        e = [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(6)]
        r = check_newton_identities(ShapeOperator(*e))
        if r.f3 != 0 or r.f4 != 0:
            res.failures += 1
            res.examples.append([str(x) for x in e])
    return res


@_timed
def leibniz(trials: int, seed: int) -> SuiteResult:
    """nabla(A B) = nabla(A) B + A nabla(B) modulo normal form, on random scalar expressions."""
    rng = random.Random(seed)
    res = SuiteResult("leibniz", trials)
    for _ in range(trials):
        a = random_expression(rng, 2, 2, 3)
        b = random_expression(rng, 2, 2, 3)
        lhs = nabla(a * b, "k")
        rhs = nabla(a, "k") * b + a * nabla(b, "k")
        if not normalize(lhs - rhs).is_zero():
            res.failures += 1
            res.examples.append([to_source(a), to_source(b)])
    return res


@_timed
def hessian_symmetry(trials: int, seed: int) -> SuiteResult:
    """nabla_j nabla_i f - nabla_i nabla_j f normalizes to zero for scalar f."""
    rng = random.Random(seed)
    res = SuiteResult("hessian-symmetry", trials)
    for _ in range(trials):
        f = random_expression(rng, 2, 2, 3)
        diff = nabla(nabla(f, "i"), "j") - nabla(nabla(f, "j"), "i")
        if not normalize(diff).is_zero():
            res.failures += 1
            res.examples.append(to_source(f))
    return res


@_timed
def canonical_idempotence(trials: int, seed: int) -> SuiteResult:
    """canonicalize is idempotent and the source form round-trips."""
    rng = random.Random(seed)
    res = SuiteResult("canonicalize-idempotence", trials)
    for _ in range(trials):
        free = rng.choice(((), ("i",), ("i", "j")))
        e = random_expression(rng, 3, 4, 4, free)
        once = canonicalize(e)
        if canonicalize(once) != once or once != e or parse(to_source(e)) != e:
            res.failures += 1
            res.examples.append(to_source(e))
    return res


@_timed
def fd_gradients(trials: int, seed: int, tol: float = 1e-6) -> SuiteResult:
    """Diagonal-frame derivative formulas against finite differences (relative error)."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("fd-gradients", trials, threshold=tol)
    for _ in range(trials):
        lam = rng.uniform(-2, 2, 3)
        h3 = random_symmetric_h3(rng)
        h4 = random_h4(rng)
        exact = diagonal_frame_gradients(lam, h3, h4)
        approx = finite_difference_gradients(lam, h3, h4)
        worst = 0.0
        for name in ("grad_f3", "hess_f3", "grad_f4", "hess_f4"):
            a, b = getattr(exact, name), getattr(approx, name)
            scale = max(1.0, float(np.max(np.abs(a))))
            worst = max(worst, float(np.max(np.abs(a - b))) / scale)
        res.worst = max(res.worst, worst)
        if worst > tol:
            res.failures += 1
            res.examples.append(lam.tolist())
    return res


SUITES = {
    "newton-float": newton_float,
    "newton-rational": newton_rational,
    "leibniz": leibniz,
    "hessian-symmetry": hessian_symmetry,
    "canonicalize-idempotence": canonical_idempotence,
    "fd-gradients": fd_gradients,
}

# trial counts relative to the base count
SCALE = {"canonicalize-idempotence": 10, "fd-gradients": 0.5}


def run_all(trials: int = 1000, seed: int = 0, names=None) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        k = max(1, int(trials * SCALE.get(name, 1)))
        out.append(SUITES[name](k, seed))
    return out
