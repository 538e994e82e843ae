"""Orientation-preserving isometries of hyperbolic 3-space as 2x2 matrices.

Elements are unit-determinant complex matrices acting on the upper half-space
model; the sign of the matrix is immaterial.  All values are immutable and
all operations are pure.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import InvalidPoint, NumericalOverflow

DET_TOL = 1e-12
CLASS_TOL = 1e-9

#: Base point j = (0, 1) of the upper half-space, as (boundary coord, height).
ORIGIN = (0j, 1.0)


@dataclass(frozen=True)
class Isometry:
    """A 2x2 complex matrix with determinant 1 (after normalization)."""

    a: complex
    b: complex
    c: complex
    d: complex

    @staticmethod
    def of(a, b, c, d) -> "Isometry":
        """Build an isometry from arbitrary entries, dividing by a square
        root of the determinant."""
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        if det == 0 or not _finite(det):
            raise ValueError(f"matrix is not invertible, det = {det}")
        s = cmath.sqrt(det)
        return Isometry(a / s, b / s, c / s, d / s)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def inverse(self) -> "Isometry":
        # Adjugate; already det 1.
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self, tol: float = CLASS_TOL) -> bool:
        """Entrywise within tol of +Id or -Id."""
        for sign in (1.0, -1.0):
            if (
                abs(self.a - sign) <= tol
                and abs(self.b) <= tol
                and abs(self.c) <= tol
                and abs(self.d - sign) <= tol
            ):
                return True
        return False


IDENTITY = Isometry(1.0 + 0j, 0j, 0j, 1.0 + 0j)


class IsometryType(enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class IsometryClass:
    tag: IsometryType
    translation_length: float | None = None


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def compose(first: Isometry, second: Isometry) -> Isometry:
    """Matrix product ``first @ second``, renormalized to determinant 1."""
    a = first.a * second.a + first.b * second.c
    b = first.a * second.b + first.b * second.d
    c = first.c * second.a + first.d * second.c
    d = first.c * second.b + first.d * second.d
    det = a * d - b * c
    if not (_finite(a) and _finite(b) and _finite(c) and _finite(d) and _finite(det)):
        raise NumericalOverflow(
            "matrix product left double range; use the scaled word evaluator"
        )
    if det == 0:
        raise NumericalOverflow("matrix product underflowed to a singular matrix")
    s = cmath.sqrt(det)
    return Isometry(a / s, b / s, c / s, d / s)


def translation_length(iso: Isometry) -> float:
    """Translation length along the axis: 2 |Re arccosh(tr/2)|.

    The principal arccosh branch has nonnegative real part, and the real
    part's magnitude does not depend on the sign ambiguity of the trace, so
    this is well defined on PSL(2, C).  Zero for elliptic, parabolic and
    identity elements.
    """
    half = iso.trace / 2.0
    return 2.0 * abs(cmath.acosh(half).real)


def classify(iso: Isometry, tol: float = CLASS_TOL) -> IsometryClass:
    """Trichotomy by trace, with the identity split off first.

    Loxodromic means translation length above tol; among the rest,
    |tr -+ 2| <= tol separates parabolic from elliptic.
    """
    if iso.is_identity(tol):
        return IsometryClass(IsometryType.IDENTITY)
    length = translation_length(iso)
    if length > tol:
        return IsometryClass(IsometryType.LOXODROMIC, length)
    tr = iso.trace
    if abs(tr - 2.0) <= tol or abs(tr + 2.0) <= tol:
        return IsometryClass(IsometryType.PARABOLIC)
    return IsometryClass(IsometryType.ELLIPTIC)


def apply_to_point(iso: Isometry, p: tuple[complex, float]) -> tuple[complex, float]:
    """Action on upper half-space, p = (z, t) with t > 0."""
    z, t = complex(p[0]), float(p[1])
    if t <= 0.0 or not math.isfinite(t) or not _finite(z):
        raise InvalidPoint(f"point ({z}, {t}) is not in the upper half-space")
    a, b, c, d = iso.entries()
    w = c * z + d
    denom = abs(w) ** 2 + abs(c) ** 2 * t * t
    if denom == 0.0:
        raise InvalidPoint("point maps through the pole at infinity")
    z_new = ((a * z + b) * w.conjugate() + a * c.conjugate() * t * t) / denom
    t_new = t / denom
    return (z_new, t_new)


def displacement(iso: Isometry, p: tuple[complex, float] = ORIGIN) -> float:
    """Hyperbolic distance from p to iso(p) in the upper half-space model."""
    z1, t1 = complex(p[0]), float(p[1])
    if t1 <= 0.0 or not math.isfinite(t1):
        raise InvalidPoint(f"height must be positive, got {t1}")
    z2, t2 = apply_to_point(iso, p)
    cosh_d = 1.0 + (abs(z1 - z2) ** 2 + (t1 - t2) ** 2) / (2.0 * t1 * t2)
    # Guard tiny negative rounding of cosh_d - 1.
    return math.acosh(max(cosh_d, 1.0))
