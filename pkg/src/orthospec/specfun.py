"""Special functions: K-Bessel functions of real and imaginary order, their
uniform asymptotics and decay bounds, the complete elliptic integral, and the
Selberg transform of a point-pair kernel.

Bessel functions of imaginary order come from trapezoidal quadrature of
``e^z K_{ir}(z) = int_0^inf exp(-z (cosh u - 1)) cos(r u) du`` in the
compiled kernels.  Every function takes ``scaled=True`` to return
``e^z K(z)``; unscaled values below the double range raise Underflow carrying
the logarithm instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from . import _kernels
from ._quad import trapezoid_halfline
from .errors import (
    AccuracyLoss,
    DecayTooSlow,
    InputError,
    ModulusOutOfRange,
    NonConvergent,
    OutOfRegion,
    Underflow,
)

UNDERFLOW_Z = 700.0
TARGET_RTOL = 1e-9
_EPS = np.finfo(float).eps

# Error-bound constants, calibrated as twice the largest observed ratio on the
# grids below (reference values: this module's quadrature where it is
# cancellation free, mpmath.besselk otherwise).  tests/test_calibration.py
# recomputes the ratios.
C_UNIFORM = 0.15
C_RAPID = 3.6e6
C_SUPER = 5.0
CALIBRATION_Z = (100.0, 300.0, 1000.0, 3000.0, 10000.0)
SUPER_CALIBRATION_Z = (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


class RegimeTag(enum.Enum):
    QUADRATURE = "quadrature"
    UNIFORM_ASYMPTOTIC = "uniform_asymptotic"
    RAPID_DECAY = "rapid_decay"
    SUPEREXPONENTIAL = "superexponential"


@dataclass(frozen=True)
class BesselRegime:
    tag: RegimeTag
    error_estimate: float


def classify_regime(r: float, z: float) -> RegimeTag:
    """Region of the (r, z) plane used by the asymptotic analysis."""
    if r > z:
        return RegimeTag.SUPEREXPONENTIAL
    if r >= z ** (14.0 / 25.0) and r >= 4.0:
        return RegimeTag.RAPID_DECAY
    if r >= 4.0:
        return RegimeTag.UNIFORM_ASYMPTOTIC
    return RegimeTag.QUADRATURE


def _check_z(z: float) -> float:
    z = float(z)
    if not z > 0.0 or not math.isfinite(z):
        raise InputError(f"z={z!r} must be positive and finite")
    return z


def _unscale(value: float, z: float, what: str) -> float:
    if z > UNDERFLOW_Z:
        log = math.log(abs(value)) - z if value != 0.0 else -math.inf
        raise Underflow(f"{what} underflows at z={z!r}; use scaled=True", log, math.copysign(1.0, value))
    return value * math.exp(-z)


# --- K0 and real order ------------------------------------------------------


def k0(z: float, scaled: bool = False) -> float:
    z = _check_z(z)
    v = float(special.k0e(z))
    return v if scaled else _unscale(v, z, "K_0")


def log_k0(z: float) -> float:
    z = _check_z(z)
    return math.log(float(special.k0e(z))) - z


def k_real_order(nu: float, z: float, scaled: bool = False) -> float:
    """K_nu(z) for 0 <= nu <= 1/2 by quadrature of int exp(-z cosh u) cosh(nu u) du."""
    z = _check_z(z)
    if not 0.0 <= nu <= 0.5:
        raise InputError(f"order nu={nu!r} outside [0, 1/2]")
    v, _, _ = _kernels.knu_scaled_many(np.array([float(nu)]), z)
    v = float(v[0])
    return v if scaled else _unscale(v, z, "K_nu")


def _rel_error(vals, abss, r, z):
    # rounding in exp/cos plus the phase error r*u*eps, relative to |value|
    u_max = np.arccosh(1.0 + 50.0 / z)
    err = (8.0 + r * u_max) * _EPS * abss
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(vals != 0.0, err / np.abs(vals), np.inf)


def k_imag_order_many(r, z: float) -> tuple[np.ndarray, np.ndarray]:
    """Scaled values e^z K_{ir}(z) for an array of r, with relative error estimates.

    Never raises for cancellation; callers decide what to do with large
    estimates.
    """
    z = _check_z(z)
    r = np.abs(np.asarray(r, dtype=float).reshape(-1))
    vals, abss, _ = _kernels.kir_scaled_many(r, z)
    return vals, _rel_error(vals, abss, r, z)


def k_imag_order(r: float, z: float, scaled: bool = False) -> float:
    """K_{ir}(z), real for real r.

    Raises AccuracyLoss when cancellation in the oscillatory integral leaves
    fewer than nine correct digits; :func:`kir_abs_bound` or
    :func:`decay_bound` are then the right tools.
    """
    z = _check_z(z)
    if not r >= 0.0:
        raise InputError(f"r={r!r} must be nonnegative")
    vals, rel = k_imag_order_many(np.array([float(r)]), z)
    if rel[0] > TARGET_RTOL:
        raise AccuracyLoss(
            f"K_(i{r}) at z={z}: estimated relative error {rel[0]:.2e} exceeds {TARGET_RTOL:.0e}"
        )
    v = float(vals[0])
    return v if scaled else _unscale(v, z, "K_ir")


def kir_abs_bound(r: float, z: float) -> float:
    """Rigorous bound for e^z |K_{ir}(z)|.

    Shifting the contour to Im u = theta gives
    |K_{ir}(z)| <= e^{-r theta} K_0(z cos theta) for 0 <= theta < pi/2; the
    bound is minimized over theta numerically (any theta is valid).
    """
    z = _check_z(z)
    r = abs(float(r))

    def log_bound(theta):
        c = math.cos(theta)
        return z * (1.0 - c) - r * theta + math.log(special.k0e(z * c))

    if r == 0.0:
        return float(special.k0e(z))
    res = minimize_scalar(log_bound, bounds=(0.0, 0.5 * math.pi * (1.0 - 1e-9)), method="bounded",
                          options={"xatol": 1e-10})
    return math.exp(min(float(res.fun), log_bound(0.0)))


def kir_abs_bound_many(r, z: float, n_theta: int = 64, chunk: int = 65536) -> np.ndarray:
    """Vectorized form of :func:`kir_abs_bound`, minimizing over a theta grid.

    Every theta gives a valid bound, so the grid minimum is still rigorous
    (only slightly less tight than the continuous minimum).
    """
    z = _check_z(z)
    r = np.abs(np.asarray(r, dtype=float)).reshape(-1)
    theta = np.linspace(0.0, 0.5 * math.pi, n_theta, endpoint=False)
    c = np.cos(theta)
    base = z * (1.0 - c) + np.log(special.k0e(z * c))
    out = np.empty(len(r))
    for i in range(0, len(r), chunk):
        rr = r[i : i + chunk]
        out[i : i + chunk] = np.exp(np.min(base[None, :] - rr[:, None] * theta[None, :], axis=1))
    return out


# --- asymptotics ------------------------------------------------------------


def uniform_asymptotic(r: float, z: float, scaled: bool = False) -> tuple[float, BesselRegime]:
    """sqrt(pi/2z) exp(-(z + r^2/2z)) (1 + (r^2 - z)/(8 z^2)) for 4 <= r <= z.

    The error estimate is ``C e^{-z} z^{-1/2} (r z^{-3/2} + sqrt(r/z) e^{-z/r})``
    with the calibrated constant ``C_UNIFORM``.
    """
    z = _check_z(z)
    if not 4.0 <= r <= z:
        raise OutOfRegion(f"uniform asymptotic needs 4 <= r <= z, got r={r!r}, z={z!r}")
    val = math.sqrt(math.pi / (2.0 * z)) * math.exp(-r * r / (2.0 * z)) * (1.0 + (r * r - z) / (8.0 * z * z))
    err = C_UNIFORM * (r / z**1.5 + math.sqrt(r / z) * math.exp(-z / r)) / math.sqrt(z)
    if not scaled:
        val = _unscale(val, z, "uniform asymptotic")
        err = err * math.exp(-z)
    return val, BesselRegime(RegimeTag.UNIFORM_ASYMPTOTIC, err)


def decay_bound(r: float, z: float, scaled: bool = False) -> float:
    """Upper bound for |K_{ir}(z)| in the rapid-decay and superexponential regions.

    ``C_RAPID e^{-z} z^{15/2} / r^16`` for ``z^{14/25} <= r <= z`` and
    ``C_SUPER r e^{-pi r/2}`` for ``r > z``; the second branch is calibrated
    only for r >= 1.
    """
    z = _check_z(z)
    if r > z:
        if r < 1.0:
            raise OutOfRegion("the r > z bound is calibrated for r >= 1 only")
        log_b = math.log(C_SUPER * r) - 0.5 * math.pi * r
        if scaled:
            log_b += z
    elif r >= z ** (14.0 / 25.0):
        log_b = math.log(C_RAPID) + 7.5 * math.log(z) - 16.0 * math.log(r)
        if not scaled:
            log_b -= z
    else:
        raise OutOfRegion(f"no decay bound for r={r!r} < z^(14/25) at z={z!r}")
    return math.exp(log_b)


# --- elliptic integral ------------------------------------------------------


def _agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 4.0 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus k, by the AGM."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ModulusOutOfRange(f"modulus k={k!r} outside [0, 1)")
    return elliptic_K_complement(math.sqrt((1.0 - k) * (1.0 + k)))


def elliptic_K_complement(kp: float) -> float:
    """K as a function of the complementary modulus k' = sqrt(1 - k^2).

    Accurate near k = 1, where k' is small but computing it from k would
    cancel.
    """
    if not 0.0 < kp <= 1.0:
        raise ModulusOutOfRange(f"complementary modulus {kp!r} outside (0, 1]")
    return 0.5 * math.pi / _agm(1.0, kp)


def elliptic_K_complement_array(kp: np.ndarray) -> np.ndarray:
    a = np.ones_like(kp)
    b = np.array(kp, dtype=float)
    for _ in range(64):
        if np.all(np.abs(a - b) <= 4.0 * _EPS * a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * math.pi / (0.5 * (a + b))


# --- kernels and the Selberg transform --------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """A point-pair kernel Phi(u) on u >= 0.

    ``exponential(t)`` is ``exp(-t u)``.  ``tabulated(xs, values, decay_rate)``
    interpolates log Phi monotonically between samples (``xs[0] == 0``) and
    continues with ``values[-1] exp(-decay_rate (u - xs[-1]))``.  ``majorant``
    is a constant A with Phi(u) <= A exp(-decay_rate u) everywhere, which the
    tail bounds use.
    """

    kind: str
    t: float | None = None
    xs: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None
    decay_rate: float | None = None
    majorant: float | None = None
    _interp: object = field(default=None, repr=False, compare=False)

    @classmethod
    def exponential(cls, t: float) -> "KernelSpec":
        t = float(t)
        if not t > 0.0 or not math.isfinite(t):
            raise InputError(f"kernel parameter t={t!r} must be positive")
        return cls("exponential", t=t, decay_rate=t, majorant=1.0)

    @classmethod
    def tabulated(cls, xs, values, decay_rate: float | None) -> "KernelSpec":
        xs = np.asarray(xs, dtype=float)
        vals = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != vals.shape or len(xs) < 4:
            raise InputError("need at least four (x, Phi(x)) samples")
        if xs[0] != 0.0 or np.any(np.diff(xs) <= 0.0):
            raise InputError("sample points must start at 0 and increase")
        if np.any(vals <= 0.0) or np.any(np.diff(vals) > 0.0):
            raise InputError("tabulated kernel must be positive and nonincreasing")
        if decay_rate is None or not decay_rate > 0.0:
            raise DecayTooSlow("tabulated kernels need a positive exponential decay rate for the tail")
        interp = PchipInterpolator(xs, np.log(vals), extrapolate=False)
        grid = np.linspace(0.0, xs[-1], 20 * len(xs))
        majorant = float(np.max(np.exp(interp(grid) + decay_rate * grid)))
        majorant = max(majorant, float(vals[-1] * math.exp(decay_rate * xs[-1])))
        return cls(
            "tabulated", xs=tuple(xs), values=tuple(vals), decay_rate=float(decay_rate),
            majorant=majorant * (1.0 + 1e-12), _interp=interp,
        )

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential"

    def phi(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.is_exponential:
            return np.exp(-self.t * u)
        x_end = self.xs[-1]
        with np.errstate(invalid="ignore"):
            inside = np.exp(self._interp(np.clip(u, 0.0, x_end)))
        tail = self.values[-1] * np.exp(-self.decay_rate * (u - x_end))
        return np.where(u <= x_end, inside, tail)

    def __call__(self, u):
        return self.phi(u)


def kernel_Q(kernel: KernelSpec, x) -> np.ndarray:
    """Q(x) = int_x^inf Phi(v) / sqrt(v - x) dv = 2 int_0^inf Phi(x + s^2) ds."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if kernel.is_exponential:
        return np.exp(-kernel.t * x) * math.sqrt(math.pi / kernel.t)
    # the majorant bounds the tail: A exp(-kappa (x + s^2)) <= 1e-20 Phi(x)
    kappa = kernel.decay_rate
    px = kernel.phi(x)
    s_max = math.sqrt(float(np.max(np.log(kernel.majorant / px) - kappa * x)) / kappa + 46.0 / kappa)
    h = s_max / 64.0
    nodes = np.arange(65) * h
    vals = kernel.phi(x[:, None] + nodes[None, :] ** 2)
    acc = vals.sum(axis=1) - 0.5 * vals[:, 0] - 0.5 * vals[:, -1]
    total = h * acc
    for _ in range(14):
        mid = (np.arange(len(nodes) - 1) + 0.5) * h
        acc = acc + kernel.phi(x[:, None] + mid[None, :] ** 2).sum(axis=1)
        h *= 0.5
        nodes = np.arange(2 * len(nodes) - 1) * h
        new_total = h * acc
        done = np.all(np.abs(new_total - total) <= 1e-13 * np.abs(new_total))
        total = new_total
        if done:
            return 2.0 * total
    raise NonConvergent("Q transform of the tabulated kernel did not converge")


def kernel_g(kernel: KernelSpec, u) -> np.ndarray:
    """g(u) = Q(2 cosh u - 2), written as Q(4 sinh^2(u/2))."""
    u = np.asarray(u, dtype=float)
    s = np.sinh(0.5 * u)
    return kernel_Q(kernel, 4.0 * s * s).reshape(u.shape)


def spectral_parameter(lam: float) -> complex | float:
    """r with lambda = 1/4 + r^2: real for lambda >= 1/4, else i*eps."""
    if lam >= 0.25:
        return math.sqrt(lam - 0.25)
    return 1j * math.sqrt(0.25 - lam)


def selberg_transform(kernel: KernelSpec, r: complex | float) -> float:
    """h(r) = int g(u) e^{iru} du for real r or r = i*eps, 0 < eps <= 1/2.

    For ``exp(-t u)`` this is ``2 e^{2t} sqrt(pi/t) K_{ir}(2t)``; for
    tabulated kernels the Q -> g -> h chain is integrated numerically.
    """
    r = complex(r)
    if r.imag != 0.0 and r.real != 0.0:
        raise InputError("r must be real or purely imaginary")
    eps = abs(r.imag)
    if eps > 0.5:
        raise InputError("|Im r| must not exceed 1/2")
    if kernel.is_exponential:
        t = kernel.t
        if eps > 0.0:
            if eps == 0.5:
                # K_{1/2} closed form: the transform is exactly pi/t
                return math.pi / t
            k = k_real_order(eps, 2.0 * t, scaled=True)
        else:
            k = k_imag_order(abs(r.real), 2.0 * t, scaled=True)
        return 2.0 * math.sqrt(math.pi / t) * k
    rr = abs(r.real)
    h0 = 0.05 if rr == 0.0 else min(0.05, 2.0 * math.pi / (20.0 * rr))
    if eps > 0.0:
        f = lambda u: kernel_g(kernel, u) * np.cosh(eps * u)  # noqa: E731
    else:
        f = lambda u: kernel_g(kernel, u) * np.cos(rr * u)  # noqa: E731
    val, _ = trapezoid_halfline(f, h0=h0, rtol=1e-10, u_start=2.0)
    return 2.0 * val
