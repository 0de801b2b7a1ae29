"""Quadrature on half-lines.

Two schemes, both refined by halving the step until successive estimates
agree: the exp-sinh (double exponential) rule for integrals over [a, inf)
with an integrand that may vary rapidly near ``a``, and the plain trapezoidal
rule on [0, inf) for smooth even integrands that already decay fast.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import NonConvergent

Vectorized = Callable[[np.ndarray], np.ndarray]


def exp_sinh(
    f: Vectorized,
    a: float,
    *,
    scale: float = 1.0,
    rtol: float = 1e-12,
    atol: float = 0.0,
    max_level: int = 10,
) -> tuple[float, float]:
    """Integrate f over [a, inf) with x = a + scale * exp(pi/2 sinh tau).

    Returns (value, error estimate).  ``f`` must accept arrays and may return
    zeros where it underflows.
    """
    h = 0.5
    tau_max = 4.5

    def level(step, offset):
        tau = np.arange(-tau_max + offset, tau_max + 1e-12, step)
        e = np.exp(0.5 * math.pi * np.sinh(tau))
        x = a + scale * e
        w = scale * 0.5 * math.pi * np.cosh(tau) * e
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            v = f(x) * w
        v = np.where(np.isfinite(v), v, 0.0)
        return float(np.sum(v)), np.abs(v)

    s, absv = level(h, 0.0)
    total = s * h
    for _ in range(max_level):
        s_new, absv_new = level(h, 0.5 * h)
        s += s_new
        h *= 0.5
        new_total = s * h
        err = abs(new_total - total)
        total = new_total
        # the end nodes must be negligible for the truncated range to be valid
        edge = max(absv[0], absv[-1], absv_new[0], absv_new[-1]) * h
        tol = max(rtol * abs(total), atol)
        if h <= 0.125 and err <= tol and edge <= tol:
            return total, err
    raise NonConvergent(f"exp-sinh quadrature did not converge (last change {err:.3e})")


def trapezoid_halfline(
    f: Vectorized,
    *,
    h0: float = 0.1,
    rtol: float = 1e-12,
    atol: float = 0.0,
    tail: float = 1e-18,
    u_start: float = 4.0,
    max_level: int = 12,
) -> tuple[float, float]:
    """Integrate an even smooth decaying f over [0, inf) by the trapezoidal rule.

    The range is extended until |f(U)| is below ``tail`` times the largest
    sampled value, then the step is halved until two estimates agree.
    """
    U = u_start
    while True:
        v = np.abs(f(np.array([U, U + h0])))
        ref = abs(float(f(np.array([0.0]))[0])) or 1.0
        if v.max() <= tail * ref or U > 1e4:
            break
        U *= 1.5
    h = h0
    n = int(math.ceil(U / h))
    u = np.arange(n + 1) * h
    v = f(u)
    s = math.fsum(v) - 0.5 * float(v[0])
    total = h * s
    for _ in range(max_level):
        mid = (np.arange(n) + 0.5) * h
        s += math.fsum(f(mid))
        h *= 0.5
        n *= 2
        new_total = h * s
        err = abs(new_total - total)
        total = new_total
        if err <= max(rtol * abs(total), atol):
            return total, err
    raise NonConvergent(f"trapezoidal rule did not converge (last change {err:.3e})")
