"""Batch operations on arrays of 2x2 matrices stored as rows (a, b, c, d)."""

from __future__ import annotations

import numpy as np

# coefficients of a sign-invariant quadratic form used as a sort key
_KEY = np.array([1.0, 0.6180339887498949, 0.3819660112501051, 0.2360679774997897])
_KEY_CROSS = (0.2923717047227367, 0.1387961189902711)


def as_rows(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return m.reshape(-1, 4)


def mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise product x @ y, broadcasting over leading axes."""
    a, b, c, d = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    e, f, g, h = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return np.stack((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h), axis=-1)


def inv(x: np.ndarray) -> np.ndarray:
    return np.stack((x[..., 3], -x[..., 1], -x[..., 2], x[..., 0]), axis=-1)


def conjugate(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """s x s^-1 for every row of x."""
    return mul(mul(s, x), inv(s))


def canon(x: np.ndarray) -> np.ndarray:
    """Flip signs so the first nonzero of (a, b, c) is positive."""
    a, b, c = x[..., 0], x[..., 1], x[..., 2]
    lead = np.where(a != 0.0, a, np.where(b != 0.0, b, c))
    sgn = np.where(lead < 0.0, -1.0, 1.0)
    return x * sgn[..., None]


def sqnorm(x: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", x, x)


def delta(x: np.ndarray) -> np.ndarray:
    return 2.0 * np.abs(x[..., 0] * x[..., 3] + x[..., 1] * x[..., 2])


def sort_key(x: np.ndarray) -> np.ndarray:
    q = (x * x) @ _KEY
    return q + _KEY_CROSS[0] * x[:, 0] * x[:, 1] + _KEY_CROSS[1] * x[:, 2] * x[:, 3]


def rows_equal(x: np.ndarray, y: np.ndarray, tol: float) -> np.ndarray:
    """Equality in PSL2: x == y or x == -y entrywise within a relative tolerance."""
    scale = tol * (1.0 + np.maximum(np.abs(x).max(axis=-1), np.abs(y).max(axis=-1)))
    plus = (np.abs(x - y).max(axis=-1) <= scale)
    minus = (np.abs(x + y).max(axis=-1) <= scale)
    return plus | minus


def _key_tol(f: np.ndarray, tol: float) -> np.ndarray:
    return 4.0 * tol * (1.0 + np.abs(f))


def unique_rows(
    x: np.ndarray, tol: float = 1e-9, lookback: int = 3, priority: np.ndarray | None = None
) -> np.ndarray:
    """Indices (ascending) of one representative per PSL2 element in ``x``.

    Rows are sorted by a sign-invariant quadratic key; rows whose keys are
    within tolerance of one of the previous ``lookback`` sorted rows are
    compared entrywise.  Unlike rounding to a fixed grid this never splits
    two numerically equal matrices that straddle a rounding boundary.

    With ``priority`` the kept row of each group of equal rows is the one
    with the smallest priority (ties by index); otherwise it is the first in
    key order.
    """
    n = len(x)
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    f = sort_key(x)
    order = np.argsort(f, kind="stable")
    fs = f[order]
    xs = x[order]
    dup = np.zeros(n, dtype=bool)
    ftol = _key_tol(fs, tol)
    pairs = []
    for shift in range(1, lookback + 1):
        if shift >= n:
            break
        i = np.nonzero(fs[shift:] - fs[:-shift] <= ftol[shift:])[0] + shift
        if len(i) == 0:
            continue
        same = rows_equal(xs[i], xs[i - shift], tol)
        dup[i[same]] = True
        pairs.append((i[same], i[same] - shift))
    if priority is None or not pairs:
        return np.sort(order[~dup])
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    # connected components of the "equal" graph by min-label propagation
    labels = np.arange(n)
    while True:
        new = labels.copy()
        np.minimum.at(new, a, labels[b])
        np.minimum.at(new, b, labels[a])
        new = new[new]
        if np.array_equal(new, labels):
            break
        labels = new
    pr = np.asarray(priority, dtype=float)[order]
    pick = np.lexsort((order, pr, labels))
    first = np.ones(n, dtype=bool)
    first[1:] = labels[pick[1:]] != labels[pick[:-1]]
    return np.sort(order[pick[first]])


class RowSet:
    """A growing set of PSL2 elements with tolerance-aware membership tests."""

    def __init__(self, tol: float = 1e-9):
        self.tol = tol
        self._keys = np.zeros(0)
        self._rows = np.zeros((0, 4))

    def __len__(self):
        return len(self._keys)

    def contains(self, x: np.ndarray) -> np.ndarray:
        found = np.zeros(len(x), dtype=bool)
        if len(self._keys) == 0 or len(x) == 0:
            return found
        f = sort_key(x)
        ftol = _key_tol(f, self.tol)
        lo = np.searchsorted(self._keys, f - ftol, side="left")
        hi = np.searchsorted(self._keys, f + ftol, side="right")
        cnt = hi - lo
        k = 0
        while True:
            idx = np.nonzero((cnt > k) & ~found)[0]
            if len(idx) == 0:
                break
            same = rows_equal(x[idx], self._rows[lo[idx] + k], self.tol)
            found[idx[same]] = True
            k += 1
        return found

    def add(self, x: np.ndarray) -> None:
        if len(x) == 0:
            return
        keys = np.concatenate((self._keys, sort_key(x)))
        rows = np.concatenate((self._rows, x))
        order = np.argsort(keys, kind="stable")
        self._keys = keys[order]
        self._rows = rows[order]
