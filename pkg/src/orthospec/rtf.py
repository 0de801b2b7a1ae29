"""Both sides of the relative trace formula for a closed geodesic.

Geometric side: a main term from the stabilizer's own coset plus one orbital
integral per double coset, split into exceptional (crossing, delta < 2) and
regular (delta > 2) classes.  Spectral side: a sum over eigenvalues of the
Selberg transform times the squared period.

Normalization.  The orbital integral of a class with trivial stabilizer is
the integral of Phi(u(gamma iy, ix)) over both copies of the imaginary axis
with the invariant measure dx/x dy/y.  For Phi(u) = exp(-t u) it equals

    2 e^{2t} K_0((delta + 2) t / 2) K_0(|delta - 2| t / 2),

which is twice the single product (checked against a direct double
integral in the tests).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from ._quad import exp_sinh, trapezoid_halfline
from .errors import CutoffInsufficient, DegenerateDelta, InputError
from .fuchsian import OrthoSpectrum
from .hypgeo import EPS_DELTA
from .specfun import (
    KernelSpec,
    elliptic_K_complement_array,
    k_imag_order,
    k_imag_order_many,
    kir_abs_bound_many,
    k_real_order,
)


# --- orbital integrals ------------------------------------------------------


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not delta >= 0.0:
        raise InputError(f"delta={delta!r} must be nonnegative")
    if abs(delta - 2.0) < EPS_DELTA:
        raise DegenerateDelta(f"delta={delta!r} is numerically 2")
    return delta


def log_orbital_integral_exp(delta, t: float) -> np.ndarray:
    """log of 2 e^{2t} K0((d+2)t/2) K0(|d-2|t/2), evaluated with scaled K0."""
    d = np.asarray(delta, dtype=float)
    a = 0.5 * (d + 2.0) * t
    b = 0.5 * np.abs(d - 2.0) * t
    return math.log(2.0) - t * (np.maximum(d, 2.0) - 2.0) + np.log(special.k0e(a)) + np.log(special.k0e(b))


def orbital_integral_exp(delta: float, t: float) -> float:
    """Orbital integral of exp(-t u) for a class with invariant delta."""
    delta = _check_delta(delta)
    if not t > 0.0:
        raise InputError(f"t={t!r} must be positive")
    return float(np.exp(log_orbital_integral_exp(delta, t)))


def _orbital_integrand(delta: float, kernel: KernelSpec):
    if delta > 2.0:
        lo = delta
        c = delta * delta - 4.0

        def f(x):
            s = lo + x
            s2m4 = (s - 2.0) * (s + 2.0)
            kp = np.sqrt(np.clip(c / s2m4, 0.0, 1.0))
            return kernel.phi(s - 2.0) / np.sqrt(s2m4) * elliptic_K_complement_array(np.maximum(kp, 1e-300))
    else:
        lo = 2.0
        c = 4.0 - delta * delta

        def f(x):
            s = lo + x
            s2md2 = (s - delta) * (s + delta)
            kp = np.sqrt(np.clip(c / s2md2, 0.0, 1.0))
            return kernel.phi(s - 2.0) / np.sqrt(s2md2) * elliptic_K_complement_array(np.maximum(kp, 1e-300))

    return lo, f


def orbital_integral_general(delta: float, kernel: KernelSpec) -> float:
    """Orbital integral of a kernel through its elliptic-integral form.

    For delta > 2: 4 int_delta^inf Phi(s-2) K(k) / sqrt(s^2-4) ds with
    k'^2 = (delta^2-4)/(s^2-4); for delta < 2:
    4 int_2^inf Phi(s-2) K(k) / sqrt(s^2-delta^2) ds with
    k'^2 = (4-delta^2)/(s^2-delta^2).  K is evaluated from k' directly, so the
    logarithmic growth as k -> 1 costs no accuracy.  The integrand is analytic
    at the lower end; the exp-sinh rule handles the scale set by the kernel.
    """
    delta = _check_delta(delta)
    lo, f = _orbital_integrand(delta, kernel)
    scale = min(1.0, 1.0 / kernel.decay_rate)
    val, _ = exp_sinh(f, 0.0, scale=scale, rtol=1e-12)
    return 4.0 * val


def main_term(kernel: KernelSpec, lenC: float) -> float:
    """Contribution of the stabilizer's own double coset.

    ``2 lenC int_0^inf Phi(2 cosh s - 2) ds``; for exp(-t u) this is
    ``2 lenC e^{2t} K0(2t)``.
    """
    if not lenC > 0.0:
        raise InputError("lenC must be positive")
    if kernel.is_exponential:
        return 2.0 * lenC * float(special.k0e(2.0 * kernel.t))
    h0 = min(0.05, 0.5 / math.sqrt(kernel.decay_rate))

    def f(s):
        sh = np.sinh(0.5 * s)
        return kernel.phi(4.0 * sh * sh)

    val, _ = trapezoid_halfline(f, h0=h0, rtol=1e-12, u_start=2.0)
    return 2.0 * lenC * val


# --- truncation bounds ------------------------------------------------------


def count_bound(spec: OrthoSpectrum):
    """(B, B') with B(x) >= number of classes with delta < x, or None.

    Needs the covolume and Dirichlet radius recorded on the spectrum.  Every
    class with delta < x has a normal form of squared norm below
    ``c0 + c2 x^2``; those lie in a hyperbolic ball whose translates of the
    fundamental domain fit in a ball of radius larger by ``shift``, so their
    number is at most that ball's area over the covolume.
    """
    cb = spec.count_data
    if cb is None:
        return None
    vol, shift, c0, c2 = cb
    ch, sh = math.cosh(shift), math.sinh(shift)
    k = 2.0 * math.pi / vol

    def B(x):
        R = c0 + c2 * x * x
        half = 0.5 * R
        return k * (half * ch + np.sqrt(half * half - 1.0) * sh - 1.0)

    def dB(x):
        R = c0 + c2 * x * x
        half = 0.5 * R
        return k * c2 * x * (ch + half / np.sqrt(half * half - 1.0) * sh)

    return B, dB


def _empirical_count_bound(spec: OrthoSpectrum):
    # heuristic quadratic envelope from the data itself (not certified)
    X = spec.cutoff
    xs = np.linspace(max(2.5, 0.25 * X), X, 32)
    counts = np.searchsorted(spec.delta, xs, side="left")
    c = 2.0 * float(np.max(counts / xs**2)) if len(spec.delta) else 1.0 / X
    c = max(c, 1.0 / (X * X))
    return (lambda x: c * x * x), (lambda x: 2.0 * c * x)


def tail_bound(spec: OrthoSpectrum, kernel: KernelSpec) -> tuple[float, bool]:
    """Bound for the sum of orbital integrals over classes with delta >= cutoff.

    Orbital integrals are positive and linear in Phi, so Phi <= A exp(-k u)
    reduces everything to the exponential kernel, whose orbital integral I(x)
    decreases in x > 2.  Summation by parts against a count bound B gives

        tail <= A [I(X) (B(X) - N(X)) + int_X^inf I(x) B'(x) dx].

    Returns (bound, certified) where ``certified`` is False when B is a
    heuristic envelope.
    """
    X = spec.cutoff
    if X <= 2.0:
        raise InputError("cutoff must exceed 2")
    bounds = count_bound(spec)
    certified = bounds is not None
    B, dB = bounds if certified else _empirical_count_bound(spec)
    kappa = kernel.decay_rate
    A = kernel.majorant
    n_below = len(spec.delta)
    excess = max(float(B(X)) - n_below, 0.0)
    log_head = float(log_orbital_integral_exp(X, kappa))
    head = math.exp(log_head) * excess if excess > 0.0 else 0.0
    ref = log_head

    def f(x):
        xs = X + x
        # scale by exp(-ref) to keep the integrand near unity
        return np.exp(log_orbital_integral_exp(xs, kappa) - ref) * dB(xs)

    integral, _ = exp_sinh(f, 0.0, scale=1.0 / kappa, rtol=1e-8)
    return A * (head + math.exp(ref) * integral), certified


# --- geometric side ---------------------------------------------------------


@dataclass(frozen=True)
class GeometricSideResult:
    main_term: float
    exceptional_sum: float
    regular_sum: float
    truncation_bound: float
    cutoff_X: float
    t: float | None
    truncation_certified: bool = True
    n_exceptional: int = 0
    n_regular: int = 0

    @property
    def total(self) -> float:
        return math.fsum((self.main_term, self.exceptional_sum, self.regular_sum))

    def period_normalized(self) -> float:
        """total / (2 sqrt(pi/t)) = e^{2t} sum_n K_{ir_n}(2t) |P_n|^2 for exp(-t u)."""
        if self.t is None:
            raise InputError("only defined for the exponential kernel")
        return self.total / (2.0 * math.sqrt(math.pi / self.t))


def _orbital_sums(deltas: np.ndarray, kernel: KernelSpec, threads: int) -> float:
    if len(deltas) == 0:
        return 0.0
    if kernel.is_exponential:
        vals = np.exp(log_orbital_integral_exp(deltas, kernel.t))
    elif threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = np.array(list(ex.map(lambda d: orbital_integral_general(float(d), kernel), deltas)))
    else:
        vals = np.array([orbital_integral_general(float(d), kernel) for d in deltas])
    # deltas arrive sorted ascending; fsum makes the order irrelevant anyway
    return math.fsum(vals)


def geometric_side(
    spec: OrthoSpectrum,
    lenC: float | None = None,
    kernel: KernelSpec | None = None,
    *,
    include_main: bool | None = None,
    rtol: float | None = None,
    atol: float | None = None,
    threads: int = 1,
) -> GeometricSideResult:
    """Main term plus orbital integrals over the classes in ``spec``.

    ``truncation_bound`` bounds the omitted classes (delta >= cutoff).  With
    ``rtol``/``atol`` the call raises CutoffInsufficient when the bound
    exceeds ``rtol * total + atol``.
    """
    if kernel is None:
        raise InputError("a kernel is required")
    lenC = spec.lenC if lenC is None else float(lenC)
    if include_main is None:
        include_main = not spec.pair
    exc = spec.exceptional_delta
    reg = spec.regular_delta
    main = main_term(kernel, lenC) if include_main else 0.0
    exc_sum = _orbital_sums(exc, kernel, threads)
    reg_sum = _orbital_sums(reg, kernel, threads)
    bound, certified = tail_bound(spec, kernel)
    res = GeometricSideResult(
        main, exc_sum, reg_sum, bound, spec.cutoff,
        kernel.t if kernel.is_exponential else None, certified, len(exc), len(reg),
    )
    if rtol is not None or atol is not None:
        limit = (rtol or 0.0) * abs(res.total) + (atol or 0.0)
        if bound > limit:
            raise CutoffInsufficient(
                f"truncation bound {bound:.3e} exceeds the tolerance {limit:.3e} at cutoff {spec.cutoff}"
            )
    return res


def pairs_geometric_side(spec: OrthoSpectrum, t: float, **kw) -> GeometricSideResult:
    """Geometric side for a pair of geodesics: no main term."""
    return geometric_side(spec, kernel=KernelSpec.exponential(t), include_main=False, **kw)


def next_order_coefficient(spec: OrthoSpectrum, t_ladder: Sequence[float]) -> tuple[float, float]:
    """Fit the 1/t coefficient of the geometric side at large t.

    Returns (fitted, predicted): the intercept of (total - main) t / pi
    against 1/t, and 2 sum_{delta<2} 1/sqrt(4 - delta^2).
    """
    ts = np.asarray(sorted(t_ladder), dtype=float)
    ys = []
    for t in ts:
        res = geometric_side(spec, kernel=KernelSpec.exponential(t), include_main=False)
        ys.append(math.fsum((res.exceptional_sum, res.regular_sum)) * t / math.pi)
    fitted = float(np.polyfit(1.0 / ts, np.array(ys), 1)[1]) if len(ts) > 1 else ys[0]
    exc = spec.exceptional_delta
    predicted = 2.0 * math.fsum(1.0 / np.sqrt(4.0 - exc * exc)) if len(exc) else 0.0
    return fitted, predicted


# --- spectral side ----------------------------------------------------------


@dataclass(frozen=True)
class SpectralDatum:
    """Eigenvalue and squared period (or P1 * conj(P2) for a pair)."""

    lam: float
    p: complex | float

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise InputError(f"eigenvalue {self.lam!r} must be nonnegative")


def spectral_side(data: Iterable[SpectralDatum], t: float, *, with_error: bool = False):
    """sum_n h(r_n) p_n with h(r) = 2 e^{2t} sqrt(pi/t) K_{ir}(2t).

    Eigenvalues below 1/4 use the real order eps = sqrt(1/4 - lambda);
    lambda = 0 gives exactly pi/t.  Every term with lambda >= 1/4 also gets
    the rigorous contour bound on |K_{ir}|; where that bound is smaller than
    the quadrature's error estimate (or negligible outright) the term is
    replaced by zero and the bound goes into the error.  Terms are summed in ascending eigenvalue order with exact
    rounding (math.fsum).  Returns a float (complex if any p is complex),
    or (value, error bound) when ``with_error`` is set.
    """
    if not t > 0.0:
        raise InputError(f"t={t!r} must be positive")
    items = sorted(data, key=lambda d: d.lam)
    if not items:
        return (0.0, 0.0) if with_error else 0.0
    lam = np.array([d.lam for d in items], dtype=float)
    p = np.array([d.p for d in items])
    z = 2.0 * t
    pref = 2.0 * math.sqrt(math.pi / t)
    h = np.zeros(len(items))
    err = np.zeros(len(items))
    small = lam < 0.25
    for i in np.nonzero(small)[0]:
        if lam[i] == 0.0:
            h[i] = math.pi / t
        else:
            h[i] = pref * k_real_order(math.sqrt(0.25 - lam[i]), z, scaled=True)
            err[i] = 1e-14 * h[i]
    big = np.nonzero(~small)[0]
    if len(big):
        r = np.sqrt(lam[big] - 0.25)
        bound = kir_abs_bound_many(r, z)
        weight = bound * np.abs(p[big])
        # terms that cannot matter at double precision skip the quadrature
        skip = weight <= 1e-17 * math.fsum(weight)
        vals = np.zeros(len(big))
        e = bound.copy()
        go = np.nonzero(~skip)[0]
        if len(go):
            v, rel = k_imag_order_many(r[go], z)
            ev = rel * np.abs(v)
            # past the point where the quadrature beats the bound, keep 0 +- bound
            use = ev < bound[go]
            vals[go[use]] = v[use]
            e[go[use]] = ev[use]
        h[big] = pref * vals
        err[big] = pref * e
    terms = h * p
    error = math.fsum(np.abs(p) * err)
    if np.iscomplexobj(terms):
        value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    else:
        value = math.fsum(terms)
    return (value, error) if with_error else value


def twisted_main_term(j: int, k: int, lenC: float, t: float) -> complex:
    """Main term of the formula twisted by characters x^{pi i j/log m}, x^{pi i k/log m}.

    The identity-coset kernel on C x C depends only on the difference of the
    two arclength coordinates, so characters with j != k integrate to zero.
    For j = k the term is 2 lenC e^{2t} K_{ir}(2t) with r = 2 pi j / lenC.
    """
    if not t > 0.0:
        raise InputError(f"t={t!r} must be positive")
    if int(j) != int(k):
        return 0j
    r = 2.0 * math.pi * abs(int(j)) / lenC
    return complex(2.0 * lenC * k_imag_order(r, 2.0 * t, scaled=True))
