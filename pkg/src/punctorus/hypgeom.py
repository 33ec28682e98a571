"""Moebius and cross-ratio algebra on the extended plane.

Foundations used by every other module: the four-point cross ratio with
its six-element orbit under parameter substitution, the canonical
representative >= 2 for concyclic quadruples, and the elementary
conversions between canonical cross ratios and hyperbolic perpendicular
lengths.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "ComplexPoint",
    "CrossRatio",
    "MoebiusMap",
    "GeodesicLengthPair",
    "cross_ratio",
    "s4_orbit",
    "canonical_representative",
    "perpendicular_length_from_cr",
    "dual_length",
]

_DEGENERATE_VALUES = (0.0, 1.0)
_REAL_TOL = 1e-9


@dataclass(frozen=True)
class ComplexPoint:
    """A point of the extended complex plane.

    Infinity is the single canonical value ``ComplexPoint.infinity()``;
    everything else must have finite coordinates.
    """

    re: float
    im: float = 0.0

    @classmethod
    def infinity(cls) -> "ComplexPoint":
        return cls(math.inf, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexPoint":
        return cls(z.real, z.imag)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.re) or math.isinf(self.im)

    def as_complex(self) -> complex:
        if self.is_infinite:
            raise ValueError("infinity has no finite complex value")
        return complex(self.re, self.im)


@dataclass(frozen=True)
class CrossRatio:
    """A cross-ratio value together with its substitution orbit.

    ``orbit`` and ``canonical`` are ``None`` for degenerate values
    (0, 1, infinity); ``canonical`` additionally requires the value to be
    real, which for four distinct points means they are concyclic.
    """

    value: complex | float
    orbit: tuple[float, ...] | tuple[complex, ...] | None
    canonical: float | None


@dataclass(frozen=True)
class MoebiusMap:
    """A fractional linear map z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __post_init__(self) -> None:
        if self.det() == 0:
            raise ValueError("Moebius map must have nonzero determinant")

    def normalized(self) -> "MoebiusMap":
        """Rescale the entries to determinant one (up to overall sign)."""
        s = cmath.sqrt(self.det())
        return MoebiusMap(self.a / s, self.b / s, self.c / s, self.d / s)

    def __call__(self, z: complex | ComplexPoint) -> ComplexPoint:
        p = _as_point(z)
        if p.is_infinite:
            if self.c == 0:
                return ComplexPoint.infinity()
            return ComplexPoint.from_complex(self.a / self.c)
        w = p.as_complex()
        den = self.c * w + self.d
        if den == 0:
            return ComplexPoint.infinity()
        return ComplexPoint.from_complex((self.a * w + self.b) / den)


@dataclass(frozen=True)
class GeodesicLengthPair:
    """Lengths of two dual simple geodesics, both positive."""

    ell_r: float
    ell_s: float

    def __post_init__(self) -> None:
        if not (self.ell_r > 0 and self.ell_s > 0):
            raise ValueError("geodesic lengths must be positive")


def _as_point(z: complex | float | ComplexPoint) -> ComplexPoint:
    if isinstance(z, ComplexPoint):
        return z
    zz = complex(z)
    if cmath.isinf(zz):
        return ComplexPoint.infinity()
    return ComplexPoint.from_complex(zz)


def cross_ratio(
    z1: complex | float | ComplexPoint,
    z2: complex | float | ComplexPoint,
    z3: complex | float | ComplexPoint,
    z4: complex | float | ComplexPoint,
) -> CrossRatio:
    """Cross ratio (z1-z3)(z2-z4) / ((z1-z2)(z3-z4)) of four points.

    At most one point may be infinity; the two factors containing it are
    cancelled analytically rather than evaluated, so no IEEE infinities
    enter the arithmetic.  Input configurations that make the formula
    indeterminate (a vanishing factor in both numerator and denominator)
    raise ``ValueError``.

    Returns a :class:`CrossRatio`.  The orbit and canonical fields are
    populated only for nondegenerate values; the canonical representative
    (the orbit element >= 2) exists exactly when the value is real, i.e.
    when the four points are concyclic.
    """
    pts = [_as_point(z) for z in (z1, z2, z3, z4)]
    n_inf = sum(p.is_infinite for p in pts)
    if n_inf > 1:
        raise ValueError("at most one of the four points may be infinity")

    if n_inf == 1:
        idx = next(i for i, p in enumerate(pts) if p.is_infinite)
        a, b, c = (p.as_complex() for p in pts if not p.is_infinite)
        # The two factors containing the infinite point cancel to +-1 in
        # the limit; what survives depends on which argument blew up.
        if idx == 0:
            value = _safe_div(a - c, b - c)  # (z2-z4)/(z3-z4)
        elif idx == 1:
            value = -_safe_div(a - b, b - c)  # -(z1-z3)/(z3-z4)
        elif idx == 2:
            value = -_safe_div(b - c, a - b)  # -(z2-z4)/(z1-z2)
        else:
            value = _safe_div(a - c, a - b)  # (z1-z3)/(z1-z2)
    else:
        w1, w2, w3, w4 = (p.as_complex() for p in pts)
        num1, num2 = w1 - w3, w2 - w4
        den1, den2 = w1 - w2, w3 - w4
        num_zero = num1 == 0 or num2 == 0
        den_zero = den1 == 0 or den2 == 0
        if num_zero and den_zero:
            raise ValueError("degenerate input: coincident points")
        if den_zero:
            value = math.inf
        else:
            value = (num1 * num2) / (den1 * den2)

    return _build_record(value)


def _safe_div(num: complex, den: complex) -> complex | float:
    if den == 0:
        if num == 0:
            raise ValueError("degenerate input: coincident points")
        return math.inf
    return num / den


def _build_record(value: complex | float) -> CrossRatio:
    if isinstance(value, float) and math.isinf(value):
        return CrossRatio(value=math.inf, orbit=None, canonical=None)
    v = complex(value)
    if abs(v.imag) <= _REAL_TOL * (1.0 + abs(v)):
        x = v.real
        if x in _DEGENERATE_VALUES:
            return CrossRatio(value=x, orbit=None, canonical=None)
        orbit = s4_orbit(x)
        return CrossRatio(value=x, orbit=orbit, canonical=max(orbit))
    orbit = tuple(_orbit_images(v))
    return CrossRatio(value=v, orbit=orbit, canonical=None)


def _orbit_images(lam: complex | float):
    return (
        lam,
        1 - lam,
        lam / (lam - 1),
        1 / lam,
        1 / (1 - lam),
        1 - 1 / lam,
    )


def s4_orbit(lam: float) -> tuple[float, ...]:
    """The six orbit values of ``lam`` under the substitution group.

    Listed in the fixed order (L, 1-L, L/(L-1), 1/L, 1/(1-L), 1-1/L);
    repeated values are kept, so the result is a multiset of size six.
    """
    if lam in (0, 1):
        raise ValueError("degenerate orbit: 0 and 1 have no six-element orbit")
    return tuple(float(x) for x in _orbit_images(float(lam)))


def canonical_representative(lam: float) -> float:
    """The unique orbit element >= 2 of a real nondegenerate cross ratio.

    For every real ``lam`` outside {0, 1} the maximum of the six orbit
    values is at least 2 and all other elements are below 2, so the
    maximum is the canonical representative.  Boundary orbits through
    {-1, 1/2, 2} return exactly 2.
    """
    return max(s4_orbit(lam))


def perpendicular_length_from_cr(Q: float) -> float:
    """Perpendicular length of the canonical cross ratio ``Q >= 2``.

    Inverse of ``Q = coth(l/2)**2``; evaluated as log1p(2/(sqrt(Q)-1))
    which stays accurate for large Q where the length underflows toward 0.
    """
    if not Q >= 2:
        raise ValueError("canonical cross ratio must be >= 2")
    return math.log1p(2.0 / (math.sqrt(Q) - 1.0))


def dual_length(ell: float) -> float:
    """Dual geodesic length: the involution ell -> arcsinh(1/sinh(ell))."""
    if not ell > 0:
        raise ValueError("length must be positive")
    return math.asinh(1.0 / math.sinh(ell))
