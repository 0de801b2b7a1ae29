"""Moebius transformations and upper half-plane geometry.

Points of the upper half-plane are plain Python complex numbers with positive
imaginary part.  Group elements are :class:`MoebiusElement` instances, real
2x2 matrices of determinant one stored with a canonical sign so that ``g`` and
``-g`` (the same transformation) compare equal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadDeterminant,
    InputError,
    NotExceptional,
    NotHyperbolic,
    NotRegular,
    RejectBoundary,
)

EPS_DET = 1e-9
EPS_DELTA = 1e-9
EPS_TRACE = 1e-12


def _canonical_sign(a, b, c, d):
    for x in (a, b, c):
        if x != 0.0:
            if x < 0.0:
                return -a, -b, -c, -d
            break
    return a, b, c, d


@dataclass(frozen=True)
class MoebiusElement:
    """An element of PSL2(R).

    The sign is normalized on construction: the first nonzero entry among
    ``a, b, c`` is positive.  The determinant check is relative to the squared
    norm because products of long words lose absolute accuracy in ``ad - bc``.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        if not all(math.isfinite(x) for x in (a, b, c, d)):
            raise BadDeterminant("matrix entries must be finite")
        det = a * d - b * c
        scale = max(1.0, a * a + b * b + c * c + d * d)
        if abs(det - 1.0) > EPS_DET * scale:
            raise BadDeterminant(f"determinant {det!r} is not 1")
        a, b, c, d = _canonical_sign(a, b, c, d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_array(cls, m) -> "MoebiusElement":
        m = np.asarray(m, dtype=float).reshape(-1)
        return cls(m[0], m[1], m[2], m[3])

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diagonal(cls, m: float) -> "MoebiusElement":
        return cls(m, 0.0, 0.0, 1.0 / m)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def sqnorm(self) -> float:
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        if not isinstance(other, MoebiusElement):
            return NotImplemented
        a, b, c, d = self.as_tuple()
        e, f, g, h = other.as_tuple()
        return MoebiusElement(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def __call__(self, z: complex) -> complex:
        return mobius_apply(self, z)


class DeltaKind(enum.Enum):
    IDENTITY = "identity"
    EXCEPTIONAL = "exceptional"
    REGULAR = "regular"


@dataclass(frozen=True)
class DeltaClass:
    delta: float
    kind: DeltaKind

    def __post_init__(self):
        if self.kind is DeltaKind.EXCEPTIONAL and not self.delta < 2.0:
            raise InputError("exceptional classes need delta < 2")
        if self.kind is DeltaKind.REGULAR and not self.delta > 2.0:
            raise InputError("regular classes need delta > 2")


def _check_point(z: complex) -> complex:
    z = complex(z)
    if not z.imag > 0.0:
        raise InputError(f"{z!r} is not in the upper half-plane")
    return z


def mobius_apply(g: MoebiusElement, z: complex) -> complex:
    """Return (az+b)/(cz+d).

    The imaginary part is recomputed as Im z / |cz+d|^2 so that it stays
    strictly positive even when the quotient loses digits.
    """
    z = _check_point(z)
    den = g.c * z + g.d
    w = (g.a * z + g.b) / den
    return complex(w.real, z.imag / (den.real * den.real + den.imag * den.imag))


def point_pair_u(z: complex, w: complex) -> float:
    z = _check_point(z)
    w = _check_point(w)
    dz = z - w
    return (dz.real * dz.real + dz.imag * dz.imag) / (z.imag * w.imag)


def hyperbolic_distance(z: complex, w: complex) -> float:
    # arccosh(1 + u/2) written to keep full accuracy for nearby points
    return 2.0 * math.asinh(0.5 * math.sqrt(point_pair_u(z, w)))


def delta_invariant(g: MoebiusElement) -> DeltaClass:
    """Classify ``g`` relative to the imaginary axis.

    ``delta = 2|ad + bc|`` is 2 cosh of the distance between the imaginary
    axis and its image under ``g`` when ``abcd > 0``, and ``2|cos theta|`` of
    the crossing angle when ``abcd < 0``.
    """
    a, b, c, d = g.as_tuple()
    ad, bc = a * d, b * c
    delta = 2.0 * abs(ad + bc)
    if b == 0.0 and c == 0.0 or a == 0.0 and d == 0.0:
        # the axis is mapped to itself
        return DeltaClass(delta, DeltaKind.IDENTITY)
    if abs(delta - 2.0) < EPS_DELTA:
        raise RejectBoundary(f"delta={delta!r} is numerically 2")
    kind = DeltaKind.EXCEPTIONAL if ad * bc < 0.0 else DeltaKind.REGULAR
    return DeltaClass(delta, kind)


def axis_distance(g: MoebiusElement) -> float:
    cls = delta_invariant(g)
    if cls.kind is DeltaKind.IDENTITY:
        return 0.0
    return ortholength(max(2.0, cls.delta))


def ortholength(delta: float) -> float:
    """arccosh(delta/2), accurate for delta close to 2."""
    if delta < 2.0:
        raise InputError("ortholength needs delta >= 2")
    x = 0.5 * (delta - 2.0)
    return math.log1p(x + math.sqrt(x * (x + 2.0)))


def angle_from_delta(delta: float) -> float:
    if not 0.0 <= delta < 2.0:
        raise NotExceptional(f"delta={delta!r} is not below 2")
    return math.acos(0.5 * delta)


def intersection_angle(g) -> float:
    """Unsigned crossing angle in (0, pi/2] of the imaginary axis and its image.

    Accepts a group element or a delta value.
    """
    if isinstance(g, MoebiusElement):
        cls = delta_invariant(g)
        if cls.kind is not DeltaKind.EXCEPTIONAL:
            raise NotExceptional(f"element is {cls.kind.value}, delta={cls.delta!r}")
        return angle_from_delta(cls.delta)
    return angle_from_delta(float(g))


def nu_from_delta(delta: float) -> float:
    if delta < 2.0:
        raise NotRegular("nu(delta) is defined for delta >= 2")
    return 0.5 * (math.sqrt(delta + 2.0) + math.sqrt(delta - 2.0))


def delta_from_nu(nu: float) -> float:
    return nu * nu + 1.0 / (nu * nu)


def lambda_invariants(g: MoebiusElement) -> tuple[float, float, float]:
    """Return (lambda_l, lambda_r, nu) for an element with abcd != 0."""
    a, b, c, d = g.as_tuple()
    if a * b * c * d == 0.0:
        raise NotRegular("lambda invariants need abcd != 0")
    lam_l = 0.5 * math.log(abs(a * b / (c * d)))
    lam_r = 0.5 * math.log(abs(a * c / (b * d)))
    nu = math.sqrt(abs(a * d)) + math.sqrt(abs(b * c))
    return lam_l, lam_r, nu


def _eigenvector(a, b, c, d, lam):
    v1 = (b, lam - a)
    v2 = (lam - d, c)
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    return v1 if n1 >= n2 else v2


def diagonalize_hyperbolic(g: MoebiusElement) -> tuple[MoebiusElement, float]:
    """Find sigma with sigma g sigma^-1 = diag(m, 1/m), m > 1.

    sigma sends the repelling fixed point of ``g`` to 0 and the attracting one
    to infinity.  Among all such conjugators (they differ by a diagonal
    factor) the one sending the foot of the perpendicular from ``i`` to the
    axis of ``g`` back to ``i`` is returned, which makes the result unique.
    """
    a, b, c, d = g.as_tuple()
    tr = a + d
    if abs(tr) <= 2.0 + EPS_TRACE:
        raise NotHyperbolic(f"|trace| = {abs(tr)!r} <= 2")
    s = 1.0 if tr > 0 else -1.0
    big = 0.5 * (tr + s * math.sqrt(tr * tr - 4.0))
    small = 1.0 / big
    p11, p21 = _eigenvector(a, b, c, d, big)
    p12, p22 = _eigenvector(a, b, c, d, small)
    det = p11 * p22 - p12 * p21
    if det < 0:
        p12, p22 = -p12, -p22
        det = -det
    k = 1.0 / math.sqrt(det)
    p11, p12, p21, p22 = p11 * k, p12 * k, p21 * k, p22 * k
    # sigma0 = P^-1 maps the attracting fixed point to infinity
    s0 = (p22, -p12, -p21, p11)
    w = (s0[0] * 1j + s0[1]) / (s0[2] * 1j + s0[3])
    rho = abs(w)
    r = 1.0 / math.sqrt(rho)
    sigma = MoebiusElement(s0[0] * r, s0[1] * r, s0[2] / r, s0[3] / r)
    return sigma, abs(big)
