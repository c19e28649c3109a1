"""Pointwise invariant algebra for 3x3 symmetric shape operators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np


class SymmetryViolation(ValueError):
    pass


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class ShapeOperator:
    """Symmetric 3x3 matrix stored by its six upper-triangular entries."""

    a11: object
    a12: object
    a13: object
    a22: object
    a23: object
    a33: object

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence], tol: float = 0.0) -> "ShapeOperator":
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(m[i][j] - m[j][i]) > tol:
                    raise SymmetryViolation(f"entry ({i},{j}) differs from ({j},{i})")
        return cls(m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2])

    @classmethod
    def diag(cls, l1, l2, l3) -> "ShapeOperator":
        return cls(l1, 0, 0, l2, 0, l3)

    @property
    def exact(self) -> bool:
        return all(_is_exact(x) for x in self.entries)

    @property
    def entries(self) -> tuple:
        return (self.a11, self.a12, self.a13, self.a22, self.a23, self.a33)

    def matrix(self) -> list[list]:
        a = self
        return [[a.a11, a.a12, a.a13], [a.a12, a.a22, a.a23], [a.a13, a.a23, a.a33]]

    def det(self):
        m = self.matrix()
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _mul(x, y):
    return [[sum(x[i][k] * y[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def _trace(x):
    return x[0][0] + x[1][1] + x[2][2]


@dataclass(frozen=True)
class InvariantRecord:
    H: object
    S: object
    f3: object
    f4: object


def invariants(A: ShapeOperator) -> InvariantRecord:
    """Traces of the first four powers; exact for rational input."""
    m = A.matrix()
    if not A.exact:
        m = [[float(x) for x in row] for row in m]
    m2 = _mul(m, m)
    m3 = _mul(m2, m)
    return InvariantRecord(_trace(m), _trace(m2), _trace(m3), sum(m2[i][j] * m2[j][i] for i in range(3) for j in range(3)))


@dataclass(frozen=True)
class PrincipalCurvatures:
    l1: float
    l2: float
    l3: float

    def __iter__(self):
        return iter((self.l1, self.l2, self.l3))


def principal_curvatures(A: ShapeOperator) -> PrincipalCurvatures:
    """Closed-form eigenvalues (trigonometric Cardano), sorted descending."""
    m = [[float(x) for x in row] for row in A.matrix()]
    q = _trace(m) / 3
    p1 = m[0][1] ** 2 + m[0][2] ** 2 + m[1][2] ** 2
    p2 = sum((m[i][i] - q) ** 2 for i in range(3)) + 2 * p1
    p = math.sqrt(p2 / 6)
    if p == 0:
        return PrincipalCurvatures(q, q, q)
    b = [[(m[i][j] - (q if i == j else 0)) / p for j in range(3)] for i in range(3)]
    r = ShapeOperator.from_matrix(b, tol=math.inf).det() / 2
    phi = math.acos(min(1.0, max(-1.0, r))) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    e2 = 3 * q - e1 - e3
    return PrincipalCurvatures(*sorted((e1, e2, e3), reverse=True))


def charpoly_residual(A: ShapeOperator, lam: float) -> float:
    m = [[float(x) - (lam if i == j else 0.0) for j, x in enumerate(row)] for i, row in enumerate(A.matrix())]
    return abs(ShapeOperator.from_matrix(m, tol=math.inf).det())


@dataclass(frozen=True)
class NewtonResiduals:
    f3: object
    f4: object
    scale: float

    @property
    def relative(self) -> tuple[float, float]:
        return (float(abs(self.f3)) / self.scale, float(abs(self.f4)) / self.scale)


def check_newton_identities(A: ShapeOperator) -> NewtonResiduals:
    """Residuals of the n=3 closed forms for f3 (via det) and f4."""
    inv = invariants(A)
    H, S, f3, f4 = inv.H, inv.S, inv.f3, inv.f4
    half = Fraction(1, 2) if A.exact else 0.5
    det = A.det() if A.exact else float(A.det())
    r3 = f3 - (half * H * (3 * S - H * H) + 3 * det)
    if A.exact:
        r4 = f4 - (Fraction(4, 3) * H * f3 - H * H * S + Fraction(1, 6) * H ** 4 + half * S * S)
    else:
        r4 = f4 - (4 / 3 * H * f3 - H * H * S + H ** 4 / 6 + half * S * S)
    scale = max(1.0, float(S) ** 2)
    return NewtonResiduals(r3, r4, scale)


# diagonal-frame derivative formulas ------------------------------------

def _check_h3(h3: np.ndarray, tol=1e-12) -> None:
    if h3.shape != (3, 3, 3):
        raise SymmetryViolation(f"h3 must be 3x3x3, got {h3.shape}")
    for p in permutations(range(3)):
        if not np.allclose(h3, h3.transpose(p), atol=tol, rtol=0):
            raise SymmetryViolation("h3 is not totally symmetric")


def _check_h4(h4: np.ndarray, tol=1e-12) -> None:
    if h4.shape != (3, 3, 3, 3):
        raise SymmetryViolation(f"h4 must be 3x3x3x3, got {h4.shape}")
    for p in permutations(range(3)):
        if not np.allclose(h4, h4.transpose(*p, 3), atol=tol, rtol=0):
            raise SymmetryViolation("h4 is not symmetric in its first three slots")


@dataclass(frozen=True)
class FrameGradients:
    grad_f3: np.ndarray
    hess_f3: np.ndarray
    grad_f4: np.ndarray
    hess_f4: np.ndarray


def diagonal_frame_gradients(lam, h3, h4=None) -> FrameGradients:
    """Derivatives of f3, f4 at a point where h_ij = lam_i delta_ij."""
    lam = np.asarray(list(lam), dtype=float)
    h3 = np.asarray(h3, dtype=float)
    _check_h3(h3)
    h4 = np.zeros((3, 3, 3, 3)) if h4 is None else np.asarray(h4, dtype=float)
    _check_h4(h4)
    diag3 = np.einsum("iik->ik", h3)
    diag4 = np.einsum("iikl->ikl", h4)
    grad_f3 = 3 * np.einsum("i,ik->k", lam ** 2, diag3)
    hess_f3 = 3 * np.einsum("i,ilp->lp", lam ** 2, diag4) + 6 * np.einsum("ijl,jip,i->lp", h3, h3, lam)
    grad_f4 = 4 * np.einsum("i,ik->k", lam ** 3, diag3)
    hess_f4 = (4 * np.einsum("i,imp->mp", lam ** 3, diag4)
               + 8 * np.einsum("ijm,jip,i->mp", h3, h3, lam ** 2)
               + 4 * np.einsum("ijm,jip,i,j->mp", h3, h3, lam, lam))
    return FrameGradients(grad_f3, hess_f3, grad_f4, hess_f4)


def _power_trace(a: np.ndarray, k: int) -> float:
    return float(np.trace(np.linalg.matrix_power(a, k)))


def finite_difference_gradients(lam, h3, h4=None, step=1e-5, mixed_step=1e-3) -> FrameGradients:
    """Independent oracle: differentiate tr(A^3), tr(A^4) along matrix curves.

    First derivatives use A(t) = diag(lam) + t*h3[:,:,l] with central
    differences.  Mixed second derivatives use the two-parameter family
    A(s,t) = diag(lam) + s*h3[..,l] + t*h3[..,p] + s*t*h4[..,l,p], whose
    (s,t) mixed partial at 0 is the second covariant derivative; one
    Richardson step removes the O(step^2) error.
    """
    lam = np.asarray(list(lam), dtype=float)
    h3 = np.asarray(h3, dtype=float)
    h4 = np.zeros((3, 3, 3, 3)) if h4 is None else np.asarray(h4, dtype=float)
    base = np.diag(lam)

    def first(k, l):
        d = h3[:, :, l]
        return (_power_trace(base + step * d, k) - _power_trace(base - step * d, k)) / (2 * step)

    def mixed(k, l, p, h):
        bl, bp, c = h3[:, :, l], h3[:, :, p], h4[:, :, l, p]

        def f(s, t):
            return _power_trace(base + s * bl + t * bp + s * t * c, k)

        return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)

    def second(k, l, p):
        coarse, fine = mixed(k, l, p, mixed_step), mixed(k, l, p, mixed_step / 2)
        return (4 * fine - coarse) / 3

    g3 = np.array([first(3, l) for l in range(3)])
    g4 = np.array([first(4, l) for l in range(3)])
    hs3 = np.array([[second(3, l, p) for p in range(3)] for l in range(3)])
    hs4 = np.array([[second(4, l, p) for p in range(3)] for l in range(3)])
    return FrameGradients(g3, hs3, g4, hs4)


def random_symmetric_h3(rng: np.random.Generator, scale=1.0) -> np.ndarray:
    raw = rng.uniform(-scale, scale, (3, 3, 3))
    return sum(raw.transpose(p) for p in permutations(range(3))) / 6


def random_h4(rng: np.random.Generator, scale=1.0) -> np.ndarray:
    raw = rng.uniform(-scale, scale, (3, 3, 3, 3))
    return sum(raw.transpose(*p, 3) for p in permutations(range(3))) / 6
