"""Generalized cylinders S^m(sqrt m) x R^(n-m) with exact curvature data."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

from .invariants import ShapeOperator, invariants


class DomainError(ValueError):
    pass


def _square_free(m: int) -> tuple[int, int]:
    """m = c^2 * r with r square-free."""
    c, r, p = 1, m, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            c *= p
        p += 1
    return c, r


@dataclass(frozen=True)
class RadicalScalar:
    """q * sqrt(radicand) ** half, with half in {0, 1} and radicand square-free."""

    q: Fraction
    radicand: int = 1
    half: int = 0

    def __post_init__(self):
        q = Fraction(self.q)
        m, half = self.radicand, self.half % 2
        if m < 0:
            raise DomainError("negative radicand")
        if half and m != 1:
            c, m = _square_free(m)
            q *= c
        if q == 0 or m in (0, 1) or not half:
            q = q if half == 0 or m != 0 else Fraction(0)
            m, half = 1, 0
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "radicand", m)
        object.__setattr__(self, "half", half)

    @classmethod
    def sqrt(cls, m: int) -> "RadicalScalar":
        return cls(Fraction(1), m, 1)

    @staticmethod
    def _lift(x) -> "RadicalScalar":
        return x if isinstance(x, RadicalScalar) else RadicalScalar(Fraction(x))

    def __add__(self, other):
        other = self._lift(other)
        if other.q == 0:
            return self
        if self.q == 0:
            return other
        if (self.radicand, self.half) != (other.radicand, other.half):
            raise DomainError(f"cannot add {self} and {other} exactly")
        return RadicalScalar(self.q + other.q, self.radicand, self.half)

    __radd__ = __add__

    def __neg__(self):
        return RadicalScalar(-self.q, self.radicand, self.half)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if self.half and other.half:
            if self.radicand == other.radicand:
                return RadicalScalar(self.q * other.q * self.radicand)
            return RadicalScalar(self.q * other.q, self.radicand * other.radicand, 1)
        if other.half:
            self, other = other, self
        return RadicalScalar(self.q * other.q, self.radicand, self.half)

    __rmul__ = __mul__

    def inverse(self) -> "RadicalScalar":
        if self.q == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.half:
            return RadicalScalar(1 / (self.q * self.radicand), self.radicand, 1)
        return RadicalScalar(1 / self.q)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __pow__(self, k: int):
        out = RadicalScalar(Fraction(1))
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RadicalScalar(Fraction(other))
        if not isinstance(other, RadicalScalar):
            return NotImplemented
        return (self.q, self.radicand, self.half) == (other.q, other.radicand, other.half)

    def __hash__(self):
        return hash((self.q, self.radicand, self.half))

    @property
    def is_rational(self) -> bool:
        return self.half == 0

    def rational(self) -> Fraction:
        if self.half:
            raise DomainError(f"{self} is irrational")
        return self.q

    def __float__(self):
        return float(self.q) * (sqrt(self.radicand) if self.half else 1.0)

    def __str__(self):
        if not self.half:
            return str(self.q)
        root = f"sqrt({self.radicand})"
        if self.q == 1:
            return root
        if self.q == -1:
            return "-" + root
        return f"{self.q}*{root}"

    def to_json(self):
        return str(self)


@dataclass(frozen=True)
class CylinderModel:
    """S^m(sqrt m) x R^(n-m); m = 0 is the flat R^n."""

    m: int
    n: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.m <= self.n:
            raise DomainError(f"need 0 <= m <= n and n >= 1, got m={self.m}, n={self.n}")

    @property
    def name(self) -> str:
        if self.m == 0:
            return f"R^{self.n}"
        radius = "1" if self.m == 1 else f"sqrt({self.m})"
        sphere = f"S^{self.m}({radius})"
        return sphere if self.m == self.n else f"{sphere} x R^{self.n - self.m}"

    def principal_curvatures(self) -> list[RadicalScalar]:
        k = RadicalScalar.sqrt(self.m).inverse() if self.m else RadicalScalar(Fraction(0))
        return [k] * self.m + [RadicalScalar(Fraction(0))] * (self.n - self.m)

    @property
    def radius(self) -> RadicalScalar:
        return RadicalScalar.sqrt(self.m)


@dataclass(frozen=True)
class ModelInvariants:
    H: RadicalScalar
    S: Fraction
    f3: RadicalScalar
    f4: Fraction


def model_invariants(c: CylinderModel) -> ModelInvariants:
    ks = c.principal_curvatures()

    def power_sum(k):
        return sum((x ** k for x in ks), RadicalScalar(Fraction(0)))

    return ModelInvariants(power_sum(1), power_sum(2).rational(), power_sum(3), power_sum(4).rational())


def shrinker_residual(c: CylinderModel) -> RadicalScalar:
    """H - |X^perp| with <X, nu> = -H; the normal part of X has length = radius."""
    if c.m == 0:
        return RadicalScalar(Fraction(0))
    return model_invariants(c).H - c.radius


def diagonal_shape_operator(c: CylinderModel) -> ShapeOperator:
    """Float 3x3 shape operator for comparison with the matrix path (n = 3)."""
    if c.n != 3:
        raise DomainError("shape operators are 3x3")
    return ShapeOperator.diag(*(float(k) for k in c.principal_curvatures()))


@dataclass(frozen=True)
class TableRow:
    m: int
    name: str
    H: RadicalScalar
    S: Fraction
    f3: RadicalScalar
    f4: Fraction
    residual: RadicalScalar

    def to_json(self) -> dict:
        return {"m": self.m, "name": self.name, "H": str(self.H), "S": str(self.S),
                "f3": str(self.f3), "f4": str(self.f4), "shrinker_residual": str(self.residual)}


def classification_table(n: int) -> list[TableRow]:
    if n < 1:
        raise DomainError("n must be positive")
    rows = []
    for m in range(n + 1):
        c = CylinderModel(m, n)
        inv = model_invariants(c)
        rows.append(TableRow(m, c.name, inv.H, inv.S, inv.f3, inv.f4, shrinker_residual(c)))
    return rows


def format_table(rows: list[TableRow]) -> str:
    header = ("m", "model", "H", "S", "f3", "f4", "residual")
    body = [(str(r.m), r.name, str(r.H), str(r.S), str(r.f3), str(r.f4), str(r.residual)) for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(line, widths)).rstrip() for line in (header, *body)]
    return "\n".join(lines)


def float_agreement(c: CylinderModel) -> float:
    """Largest gap between exact model data and the float matrix path."""
    inv = model_invariants(c)
    num = invariants(diagonal_shape_operator(c))
    return max(abs(float(inv.H) - num.H), abs(float(inv.S) - num.S),
               abs(float(inv.f3) - num.f3), abs(float(inv.f4) - num.f4))
