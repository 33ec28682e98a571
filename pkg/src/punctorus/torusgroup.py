"""Discrete groups of once-punctured tori.

Builds the two-generator Moebius groups whose quotient is a punctured
torus: the rectangular pair with tangent isometric circles, the twisted
pair at general twist parameters, commutator traces, the length/angle
closure relation, and a sampler for random tori driven by the geodesic
length law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .closedform import QuadCrInverseCdf, _get_default_inverse, sample_length_values
from .hypgeom import ComplexPoint, MoebiusMap

__all__ = [
    "GeneratorPair",
    "IsometricCircle",
    "TorusSample",
    "AngleRelation",
    "compose",
    "inverse",
    "commutator",
    "isometric_circle",
    "rectangular_generators",
    "tangency_vertices",
    "quad_cross_ratio_from_group",
    "nonrectangular_pair",
    "commutator_trace_general",
    "angle_relation",
    "sample_torus",
]

_TANGENT_TOL = 1e-9


@dataclass(frozen=True)
class IsometricCircle:
    """The circle on which a Moebius map acts as a Euclidean isometry.

    For a determinant-one map this is |cz + d| = 1; all circles produced
    here are orthogonal to the unit circle.
    """

    center: ComplexPoint
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("isometric circle needs a positive radius")


@dataclass(frozen=True)
class GeneratorPair:
    """Two Moebius generators of a punctured-torus group.

    r and s are the isometric-circle radii of A and B; the twist
    parameters are zero for the rectangular configuration and positive
    for the sheared pairs of :func:`nonrectangular_pair`.
    """

    A: MoebiusMap
    B: MoebiusMap
    r: float
    s: float
    lambda_param: float = 0.0
    mu_param: float = 0.0

    def __post_init__(self) -> None:
        if not (self.r > 0 and self.s > 0):
            raise ValueError("radii must be positive")
        if self.lambda_param < 0 or self.mu_param < 0:
            raise ValueError("twist parameters must be nonnegative")

    def circles(self) -> tuple[IsometricCircle, IsometricCircle,
                               IsometricCircle, IsometricCircle]:
        """Isometric circles of (A, A^-1, B, B^-1), in that order."""
        return (isometric_circle(self.A), isometric_circle(inverse(self.A)),
                isometric_circle(self.B), isometric_circle(inverse(self.B)))


@dataclass(frozen=True)
class TorusSample:
    """One random punctured torus: two geodesic lengths and their angle."""

    x_sigma: float
    y_sigma: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.x_sigma > 0 and self.y_sigma > 0):
            raise ValueError("lengths must be positive")
        if not 0.0 < self.theta <= 0.5 * math.pi + 1e-12:
            raise ValueError("angle must lie in (0, pi/2]")


class AngleRelation(NamedTuple):
    theta: float
    quad_cr: float


def compose(f: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """The map z -> f(g(z)), as a matrix product."""
    return MoebiusMap(f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
                      f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d)


def inverse(m: MoebiusMap) -> MoebiusMap:
    n = m.normalized()
    return MoebiusMap(n.d, -n.b, -n.c, n.a)


def commutator(f: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """f g f^-1 g^-1 of the determinant-one representatives.

    The raw product, not a resigned one: flipping the sign of either
    generator leaves it unchanged, so its trace is an honest invariant
    of the group element (and equals -2 in the parabolic cases).
    """
    f, g = f.normalized(), g.normalized()
    return compose(compose(f, g), compose(inverse(f), inverse(g)))


def isometric_circle(m: MoebiusMap) -> IsometricCircle:
    """Isometric circle |cz + d| = 1 of a determinant-one representative.

    Maps fixing infinity (c = 0) have none and raise.
    """
    n = m.normalized()
    if n.c == 0:
        raise ValueError("map fixes infinity and has no isometric circle")
    return IsometricCircle(ComplexPoint.from_complex(-n.d / n.c), 1.0 / abs(n.c))


def rectangular_generators(r: float) -> GeneratorPair:
    """The symmetric generator pair with radii (r, 1/r).

    A fixes +-1 and B fixes +-i; their isometric circles sit on the real
    and imaginary axes and are mutually tangent exactly because the radii
    are reciprocal, which is also what makes the commutator parabolic.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    s = 1.0 / r
    qa = math.sqrt(1.0 / r**2 + 1.0)
    qb = math.sqrt(1.0 / s**2 + 1.0)
    A = MoebiusMap(qa, 1.0 / r, 1.0 / r, qa)
    B = MoebiusMap(qb, 1j / s, -1j / s, qb)
    return GeneratorPair(A=A, B=B, r=r, s=s)


def _tangent_point(c1: complex, r1: float, c2: complex, r2: float) -> complex:
    return c1 + r1 * (c2 - c1) / (r1 + r2)


def tangency_vertices(pair: GeneratorPair) -> tuple[ComplexPoint, ComplexPoint,
                                                    ComplexPoint, ComplexPoint]:
    """The four mutual tangency points of the isometric circles.

    Order: C(A) with C(B), C(B) with C(A^-1), C(A^-1) with C(B^-1),
    C(B^-1) with C(A).  Raises for non-reciprocal radii, where the
    circles fail to touch.
    """
    if abs(pair.r * pair.s - 1.0) >= _TANGENT_TOL:
        raise ValueError("circles are not tangent: radii are not reciprocal")
    ca, ca_inv, cb, cb_inv = pair.circles()
    za, zai = ca.center.as_complex(), ca_inv.center.as_complex()
    zb, zbi = cb.center.as_complex(), cb_inv.center.as_complex()
    pts = (
        _tangent_point(za, ca.radius, zb, cb.radius),
        _tangent_point(zb, cb.radius, zai, ca_inv.radius),
        _tangent_point(zai, ca_inv.radius, zbi, cb_inv.radius),
        _tangent_point(zbi, cb_inv.radius, za, ca.radius),
    )
    return tuple(ComplexPoint.from_complex(p) for p in pts)


def quad_cross_ratio_from_group(pair: GeneratorPair) -> float:
    """Cross ratio of the four tangency vertices of a rectangular pair.

    Closed form 1 + r^2; the vertex-based recomputation through the
    four-point cross ratio is exercised in the tests.
    """
    if abs(pair.r * pair.s - 1.0) >= _TANGENT_TOL:
        raise ValueError("cross ratio needs the tangent configuration rs = 1")
    return 1.0 + pair.r**2


def nonrectangular_pair(r: float, lam: float) -> tuple[MoebiusMap, MoebiusMap]:
    """Sheared side-pairing maps at twist lam, radii (r, 1/r).

    At lam = 0 they reduce entrywise to the rectangular generators (in
    the opposite order: u to B, v to A).  Their fixed points stay
    antipodal on the unit circle for every twist.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if lam < 0:
        raise ValueError("twist must be nonnegative")
    w = math.sqrt(1.0 + lam * lam)
    qa = math.sqrt(r * r + 1.0)
    qb = math.sqrt(1.0 / r**2 + 1.0)
    u = MoebiusMap(qa * w, lam + 1j * r * w, lam - 1j * r * w, qa * w)
    v = MoebiusMap(qb * w, w / r + 1j * lam, w / r - 1j * lam, qb * w)
    return u, v


def commutator_trace_general(lam: float, mu: float, r: float) -> float:
    """tr[u, v] - 2 at twists (lam, mu), in closed form.

    Equals -4 exactly when the twists agree (the parabolic, cusped
    case).  The value does not depend on r; the argument is kept because
    the underlying pair does, and the matrix-product oracle in the tests
    confirms the independence.
    """
    if lam <= 0 or mu <= 0:
        raise ValueError("closed form is singular at zero twist")
    del r
    l2, m2 = lam * lam, mu * mu
    num = l2 * (m2 + 1.0) - 2.0 * math.sqrt((l2 + 1.0) * (m2 + 1.0)) + m2 + 2.0
    return -4.0 * num / (l2 * m2)


def angle_relation(ell1: float, ell2: float) -> AngleRelation:
    """Angle and cross ratio of a torus with given dual geodesic lengths.

    The two geodesics meet once, at the angle theta in (0, pi/2] with
    sin(theta) sinh(ell1/2) sinh(ell2/2) = 1; a product below 1 cannot
    close up into a torus and raises.
    """
    if ell1 <= 0 or ell2 <= 0:
        raise ValueError("lengths must be positive")
    prod = math.sinh(0.5 * ell1) * math.sinh(0.5 * ell2)
    if prod < 1.0:
        raise ValueError("no valid angle: sinh(l1/2) sinh(l2/2) < 1")
    theta = math.asin(min(1.0 / prod, 1.0))
    quad_cr = 1.0 + math.cosh(0.5 * ell1) ** 2 / math.cosh(0.5 * ell2) ** 2
    return AngleRelation(theta=theta, quad_cr=quad_cr)


def sample_torus(rng_seed, inverse_cdf: QuadCrInverseCdf | None = None) -> TorusSample:
    """Draw one random punctured torus.

    Both lengths come from the geodesic length law by inverse-CDF
    sampling; pairs that violate the closure inequality
    sinh(x/2) sinh(y/2) >= 1 are redrawn together, so the accepted pair
    is i.i.d.-from-the-law conditioned on describing an actual torus.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    inv = inverse_cdf if inverse_cdf is not None else _get_default_inverse()
    while True:
        x, y = sample_length_values(2, rng, inv)
        prod = math.sinh(0.5 * x) * math.sinh(0.5 * y)
        if prod >= 1.0:
            theta = math.asin(min(1.0 / prod, 1.0))
            return TorusSample(x_sigma=x.item(), y_sigma=y.item(), theta=theta)
