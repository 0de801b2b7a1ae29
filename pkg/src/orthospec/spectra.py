"""Counting functions, asymptotic checks and synthetic spectra.

True Laplace eigenvalues and periods are not computed anywhere in this
package.  The synthetic spectra here realize the Weyl law and the period
law exactly on a grid, so the spectral-side machinery can be exercised
against closed-form targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AlphaForbidden,
    BeyondCutoff,
    InputError,
    NotDisjoint,
    NotSimple,
)
from .fuchsian import OrthoSpectrum
from .rtf import SpectralDatum, geometric_side
from .specfun import KernelSpec


# --- synthetic spectra ------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpectrum:
    """Eigenvalues on the Weyl-law grid with telescoping period weights.

    ``lam[j-1] = 4 pi j / volX`` so that N(lam_j) = j exactly, and
    ``p_j = (lenC/pi)(sqrt(lam_j) - sqrt(lam_{j-1}))`` (with lam_0 = 0) so the
    partial sums equal ``(lenC/pi) sqrt(lam_j)``.
    """

    lam: np.ndarray
    p: np.ndarray
    volX: float
    lenC: float
    model: str = "weyl-grid"
    seed: int | None = field(default=None, compare=False)

    @property
    def entries(self) -> list[SpectralDatum]:
        return [SpectralDatum(float(l), float(q)) for l, q in zip(self.lam, self.p)]

    @property
    def r(self) -> np.ndarray:
        """Spectral parameters: sqrt(lam - 1/4), or i*sqrt(1/4 - lam) below 1/4."""
        d = self.lam - 0.25
        return np.where(d >= 0.0, np.sqrt(np.abs(d)) + 0j, 1j * np.sqrt(np.abs(d)))

    def __len__(self):
        return len(self.lam)

    def counting(self, x: float) -> int:
        return int(np.searchsorted(self.lam, x, side="right"))

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.p)


def synthetic_spectrum(
    volX: float, lenC: float, lambda_max: float, *, jitter_seed: int | None = None
) -> SyntheticSpectrum:
    """Deterministic Weyl-law spectrum up to ``lambda_max``.

    With ``jitter_seed`` each eigenvalue is moved by up to 0.4 grid steps
    (seeded, reproducible); the weights are recomputed from the moved points
    so the period law still holds exactly at every eigenvalue.
    """
    if not (volX > 0.0 and lenC > 0.0):
        raise InputError("volX and lenC must be positive")
    if not lambda_max > 0.0:
        raise InputError("lambda_max must be positive")
    step = 4.0 * math.pi / volX
    n = int(math.floor(lambda_max / step * (1.0 + 1e-14)))
    j = np.arange(1, n + 1, dtype=float)
    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        j = j + rng.uniform(-0.4, 0.4, size=n)
    lam = step * j
    root = np.sqrt(np.concatenate(([0.0], lam)))
    p = lenC / math.pi * np.diff(root)
    model = "weyl-grid" if jitter_seed is None else "weyl-grid-jittered"
    return SyntheticSpectrum(lam, p, float(volX), float(lenC), model, jitter_seed)


def _as_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, SyntheticSpectrum):
        return data.lam, data.p
    items = list(data)
    lam = np.array([d.lam for d in items], dtype=float)
    p = np.array([d.p for d in items])
    return lam, p


# --- Laplace limit ----------------------------------------------------------


def laplace_sum(data, z: float) -> float:
    """sqrt(pi/2z) sum_j exp(-r_j^2/2z) p_j with r_j^2 = lam_j - 1/4.

    For lam < 1/4 the exponent is positive (r is imaginary); it is carried
    exactly rather than dropped.
    """
    if not z > 0.0:
        raise InputError("z must be positive")
    lam, p = _as_arrays(data)
    if len(lam) == 0:
        return 0.0
    w = np.exp(-(lam - 0.25) / (2.0 * z))
    terms = w * p
    order = np.argsort(lam, kind="stable")
    s = math.fsum(np.real(terms[order]))
    return math.sqrt(math.pi / (2.0 * z)) * s


def laplace_limit_check(data, z_ladder: Sequence[float], lenC: float | None = None) -> list[dict]:
    """Rows of (z, value, target, rel_gap) with target lenC/2."""
    if lenC is None:
        lenC = getattr(data, "lenC", None)
    rows = []
    for z in z_ladder:
        v = laplace_sum(data, float(z))
        row = {"z": float(z), "value": v}
        if lenC is not None:
            target = 0.5 * lenC
            row.update(target=target, rel_gap=(v - target) / target)
        rows.append(row)
    return rows


def moment_sum(data, alpha: float, r_lo: float, r_hi: float) -> float:
    """sum of r_j^alpha over r_lo <= r_j <= r_hi (real r_j only)."""
    if alpha == -2.0:
        raise AlphaForbidden("alpha = -2 is excluded")
    if not 4.0 <= r_lo < r_hi:
        raise InputError(f"need 4 <= r_lo < r_hi, got {r_lo!r}, {r_hi!r}")
    lam, _ = _as_arrays(data)
    r = np.sqrt(np.maximum(lam - 0.25, 0.0))
    r = np.sort(r[(lam >= 0.25) & (r >= r_lo) & (r <= r_hi)])
    if alpha == 0.0:
        return float(len(r))
    return math.fsum(r**alpha)


# --- geometric asymptotics --------------------------------------------------


def small_t_asymptotic(
    spec: OrthoSpectrum,
    volX: float,
    t_ladder: Sequence[float],
    lenC: float | None = None,
    *,
    rtol: float = 1e-6,
) -> list[dict]:
    """t * geometric_side(t) for each t, against two candidate limits.

    ``target_sqrt2`` is lenC^2 pi sqrt(2)/volX; ``target`` is lenC^2 pi/volX,
    the value an equidistribution argument gives for the kernel exp(-t u)
    (see the README).  Raises CutoffInsufficient unless the truncation bound
    is below ``rtol`` of the total at every t.
    """
    lenC = spec.lenC if lenC is None else float(lenC)
    rows = []
    for t in sorted(t_ladder, reverse=True):
        res = geometric_side(spec, lenC, KernelSpec.exponential(float(t)), rtol=rtol)
        rows.append(
            {
                "t": float(t),
                "t_total": t * res.total,
                "truncation_bound": t * res.truncation_bound,
                "certified": res.truncation_certified,
                "target_sqrt2": lenC * lenC * math.pi * math.sqrt(2.0) / volX,
                "target": lenC * lenC * math.pi / volX,
            }
        )
    return rows


def count_bounds_report(spec: OrthoSpectrum, n_points: int = 11, decade: float = 10.0) -> dict:
    """Empirical pi_delta(x)/x, pi_delta(x)/x^2 and pi_delta(x) log(x)/x.

    Samples are log-spaced over the top ``decade`` of the enumerated range.
    The summary reports whether pi/x^2 decreases across the samples and the
    coefficient of variation of pi/x.
    """
    X = spec.cutoff
    if len(spec) == 0:
        return {"rows": [], "x2_decreasing": None, "cv": None, "mean_slope": None}
    lo = max(X / decade, 2.0 + 1e-6)
    xs = np.geomspace(lo, X, n_points)
    counts = np.searchsorted(spec.delta, xs, side="left").astype(float)
    counts[-1] = len(spec)  # the cutoff itself is exclusive
    rows = [
        {"x": float(x), "pi": int(c), "pi_over_x": c / x, "pi_over_x2": c / (x * x), "pi_log_over_x": c * math.log(x) / x}
        for x, c in zip(xs, counts)
    ]
    r1 = counts / xs
    r2 = counts / xs**2
    return {
        "rows": rows,
        "x2_decreasing": bool(np.all(np.diff(r2) < 0.0)),
        "cv": float(np.std(r1) / np.mean(r1)) if np.mean(r1) > 0 else float("inf"),
        "mean_slope": float(np.mean(r1)),
    }


def good_slope(lenC1: float, lenC2: float, volX: float) -> float:
    """Leading coefficient of pi_delta(x) ~ c x for the double-coset count."""
    return lenC1 * lenC2 / (math.pi * volX)


# --- Kloosterman sums -------------------------------------------------------


@dataclass(frozen=True)
class KloostermanQuery:
    m: int
    n: int
    lenC1: float | None = None
    lenC2: float | None = None


def _class_coordinates(spec: OrthoSpectrum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b, c, d = spec.reps.T
    lam_l = 0.5 * np.log(np.abs(a * b / (c * d)))
    lam_r = 0.5 * np.log(np.abs(a * c / (b * d)))
    nu = np.sqrt(np.abs(a * d)) + np.sqrt(np.abs(b * c))
    return lam_l, lam_r, nu


def kloosterman_sum(spec: OrthoSpectrum, q: KloostermanQuery, x: float) -> complex:
    """Cumulative sum of e(m Lambda_l / len_left + n Lambda_r / len_right) over nu <= x.

    ``Lambda_l`` shifts by the left geodesic's length under the left
    stabilizer and ``Lambda_r`` by the right one's, so each is paired with the
    length that makes the phase well defined on double cosets.  Left means
    the second geodesic of a pair (``spec.lenC2``), right the first.
    ``q.lenC1``/``q.lenC2`` override these lengths when given.
    """
    if not x > 0.0:
        raise InputError("x must be positive")
    if x * x + 1.0 / (x * x) > spec.cutoff * (1.0 + 1e-12):
        raise BeyondCutoff(f"nu={x!r} corresponds to delta beyond the cutoff {spec.cutoff!r}")
    len_right = spec.lenC if q.lenC1 is None else q.lenC1
    len_left = spec.lenC2 if q.lenC2 is None else q.lenC2
    if len(spec) == 0:
        return 0j
    lam_l, lam_r, nu = _class_coordinates(spec)
    keep = nu <= x
    phase = 2.0 * math.pi * (q.m * lam_l[keep] / len_left + q.n * lam_r[keep] / len_right)
    order = np.argsort(nu[keep], kind="stable")
    return complex(math.fsum(np.cos(phase[order])), math.fsum(np.sin(phase[order])))


def nu_counting(spec: OrthoSpectrum, x: float) -> int:
    """Number of classes with nu <= x."""
    return int(round(kloosterman_sum(spec, KloostermanQuery(0, 0), x).real))


# --- Basmajian --------------------------------------------------------------


@dataclass(frozen=True)
class BasmajianResult:
    partial_sum: float
    bound: float
    n_terms: int
    cutoff: float
    increments: np.ndarray = field(repr=False)

    @property
    def within_bound(self) -> bool:
        return self.partial_sum <= self.bound * (1.0 + 1e-12)


def log_coth_half(delta) -> np.ndarray:
    """log coth(len/2) with cosh(len) = delta/2, as log((delta+2)/(delta-2))/2."""
    d = np.asarray(delta, dtype=float)
    return 0.5 * np.log1p(4.0 / (d - 2.0))


def basmajian_check(pair_spec: OrthoSpectrum, self_spec: OrthoSpectrum | None = None) -> BasmajianResult:
    """Partial sum of log coth(len/2) over orthogeodesics from C1 to C2.

    ``self_spec`` (the single-geodesic spectrum of C1) enables the
    simplicity check.  The target 2 len(C1) is used only as a one-sided
    bound; see the README for why the full sum over all double cosets is not
    expected to converge to it.
    """
    if not pair_spec.pair:
        raise InputError("basmajian_check needs a pair spectrum")
    if len(pair_spec.exceptional_delta):
        raise NotDisjoint(f"{len(pair_spec.exceptional_delta)} intersection classes between C1 and C2")
    if self_spec is not None and len(self_spec.exceptional_delta):
        raise NotSimple(f"C1 has {len(self_spec.exceptional_delta)} self-intersection classes")
    d = np.sort(pair_spec.regular_delta)
    inc = log_coth_half(d)
    return BasmajianResult(math.fsum(inc), 2.0 * pair_spec.lenC, len(d), pair_spec.cutoff, inc)


def basmajian_ladder(pair_spec: OrthoSpectrum, cutoffs: Sequence[float]) -> list[dict]:
    rows = []
    for x in sorted(cutoffs):
        if x > pair_spec.cutoff:
            raise BeyondCutoff(f"cutoff {x!r} exceeds {pair_spec.cutoff!r}")
        r = basmajian_check(pair_spec.restrict(x))
        rows.append({"cutoff": x, "partial_sum": r.partial_sum, "bound": r.bound, "n_terms": r.n_terms})
    return rows


__all__ = [
    "SyntheticSpectrum",
    "synthetic_spectrum",
    "laplace_sum",
    "laplace_limit_check",
    "moment_sum",
    "small_t_asymptotic",
    "count_bounds_report",
    "good_slope",
    "KloostermanQuery",
    "kloosterman_sum",
    "nu_counting",
    "BasmajianResult",
    "log_coth_half",
    "basmajian_check",
    "basmajian_ladder",
]
