"""NumPy implementation of the quadrature kernels (same rules as the
compiled module, vectorized per evaluation)."""

from __future__ import annotations

import math

import numpy as np

TAIL = 45.0
H_MAX = 0.1
TWO_PI = 2.0 * math.pi


def _cutoff(z: float, nu: float) -> float:
    u = math.acosh(1.0 + TAIL / z)
    if nu > 0.0:
        u = math.acosh(1.0 + (TAIL + nu * u) / z)
        u = math.acosh(1.0 + (TAIL + nu * u) / z)
    return u


def _step(r: float, z: float) -> float:
    h = min(H_MAX, TWO_PI / (r + 10.0 * math.sqrt(z) + 10.0))
    if r > 0.0:
        h = min(h, TWO_PI / (20.0 * r))
    return h


def _trap(r: float, z: float, nu: float, imag: bool):
    h = _step(r, z)
    n = int(math.ceil(_cutoff(z, nu) / h))
    u = np.arange(n + 1) * h
    s = np.sinh(0.5 * u)
    w = np.exp(-2.0 * z * s * s)
    f = w * (np.cos(r * u) if imag else np.cosh(nu * u))
    f[0] *= 0.5
    return h * math.fsum(f), h * float(np.abs(f).sum()), n + 1


def kir_scaled_many(r, z: float):
    rr = np.asarray(r, dtype=float).reshape(-1)
    res = [_trap(float(x), float(z), 0.0, True) for x in rr]
    return _pack(res)


def knu_scaled_many(nu, z: float):
    vv = np.asarray(nu, dtype=float).reshape(-1)
    res = [_trap(0.0, float(z), float(x), False) for x in vv]
    return _pack(res)


def _pack(res):
    if not res:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=np.int64)
    v, a, n = zip(*res)
    return np.array(v), np.array(a), np.array(n, dtype=np.int64)
