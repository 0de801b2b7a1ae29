"""Cocompact Fuchsian groups, norm-ball enumeration and double cosets of a
closed geodesic's stabilizer.

Everything heavy works on arrays of matrices (rows ``a, b, c, d``); the
:class:`MoebiusElement` objects only appear at the public surface.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _matrices as mx
from .errors import (
    BadDeterminant,
    BeyondCutoff,
    BudgetExceeded,
    ConfigError,
    DegenerateDelta,
    EmptyGenerators,
    IncompleteEnumeration,
    InputError,
    InvariantViolation,
    NotHyperbolic,
    NotPrimitive,
)
from .hypgeo import (
    EPS_DELTA,
    DeltaClass,
    DeltaKind,
    MoebiusElement,
    angle_from_delta,
    diagonalize_hyperbolic,
    hyperbolic_distance,
    mobius_apply,
    ortholength,
)

DEFAULT_BUDGET = 5_000_000
DEFAULT_MARGIN = 0.25
_PARALLEL_MIN_ROWS = 20_000
# relative snap used when a normalized entry lands on an interval end
_SNAP = 1e-9


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class FuchsianGroup:
    """Generators (closed under inverses) of a cocompact torsion-free group.

    ``generators[:n_input]`` are the generators as supplied; words refer to
    them by signed 1-based index.  Inverses that were missing are appended.

    ``dirichlet`` records that the generators pair the sides of a Dirichlet
    domain centred at ``i``; then the pruned breadth-first enumeration is
    complete without any margin.  ``covolume`` and ``dirichlet_radius`` (the
    largest distance from ``i`` to a point of that domain) enable certified
    lattice-count bounds.  None of these are verified.
    """

    generators: tuple[MoebiusElement, ...]
    n_input: int
    inverse_index: tuple[int, ...]
    label: str = ""
    exactness: str | None = None
    dirichlet: bool = False
    covolume: float | None = None
    dirichlet_radius: float | None = None
    _rows: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        rows = np.array([g.as_tuple() for g in self.generators], dtype=float).reshape(-1, 4)
        rows.setflags(write=False)
        object.__setattr__(self, "_rows", rows)

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def word(self, word: Sequence[int]) -> MoebiusElement:
        """Evaluate a word of signed 1-based generator indices."""
        if len(word) == 0:
            raise InputError("empty word")
        g = MoebiusElement.identity()
        for w in word:
            w = int(w)
            if w == 0 or abs(w) > self.n_input:
                raise InputError(f"generator index {w} out of range 1..{self.n_input}")
            h = self.generators[abs(w) - 1]
            g = g @ (h if w > 0 else h.inverse())
        return g


def _make_group(gens: Sequence[MoebiusElement], **kw) -> FuchsianGroup:
    if len(gens) == 0:
        raise EmptyGenerators("a group needs at least one generator")
    gens = list(gens)
    n_input = len(gens)
    rows = np.array([g.as_tuple() for g in gens])
    for g in list(gens):
        gi = g.inverse()
        if not mx.rows_equal(rows, np.array(gi.as_tuple())[None, :], 1e-12).any():
            gens.append(gi)
            rows = np.vstack((rows, gi.as_tuple()))
    inverse_index = []
    for g in gens:
        hit = np.nonzero(mx.rows_equal(rows, np.array(g.inverse().as_tuple())[None, :], 1e-12))[0]
        inverse_index.append(int(hit[0]))
    return FuchsianGroup(tuple(gens), n_input, tuple(inverse_index), **kw)


def _rotation(phi: float) -> MoebiusElement:
    c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
    return MoebiusElement(c, s, -s, c)


BOLZA_RELATION = (0, 3, 6, 1, 4, 7, 2, 5)


def builtin_bolza() -> FuchsianGroup:
    """Genus-2 surface group of the regular octagon with angles pi/4.

    ``g_k = R(k pi/4) A R(-k pi/4)`` with ``A`` the translation of trace
    ``2(1 + sqrt 2)`` along the imaginary axis direction rotated to the
    horizontal geodesic through ``i``; ``g_{k+4} = g_k^-1``.
    """
    ch = 1.0 + math.sqrt(2.0)
    sh = math.sqrt(ch * ch - 1.0)
    a = MoebiusElement(ch, sh, sh, ch)
    gens = [_rotation(k * math.pi / 4.0) @ a @ _rotation(-k * math.pi / 4.0) for k in range(8)]
    rel = MoebiusElement.identity()
    for k in BOLZA_RELATION:
        rel = rel @ gens[k]
    resid = float(np.abs(rel.as_array() - np.array([1.0, 0.0, 0.0, 1.0])).max())
    if resid > 1e-9:
        raise InvariantViolation(f"octagon relation residual {resid:.3e}")
    for k in range(4):
        if not mx.rows_equal(gens[k + 4].as_array()[None], gens[k].inverse().as_array()[None], 1e-12)[0]:
            raise InvariantViolation("octagon generators are not paired by inverses")
    return _make_group(
        gens,
        label="bolza",
        exactness="regular octagon, trace 2(1+sqrt 2), closed-form entries",
        dirichlet=True,
        covolume=4.0 * math.pi,
        dirichlet_radius=math.acosh(3.0 + 2.0 * math.sqrt(2.0)),
    )


BUILTINS = {"bolza": builtin_bolza}


def load_group(config: dict) -> FuchsianGroup:
    """Build a group from ``{"builtin": name}`` or ``{"generators": [[a,b,c,d], ...]}``."""
    has_b = "builtin" in config and config["builtin"] is not None
    has_g = "generators" in config and config["generators"] is not None
    if has_b == has_g:
        raise ConfigError("exactly one of 'builtin' and 'generators' is required")
    if has_b:
        name = str(config["builtin"]).lower()
        if name not in BUILTINS:
            raise ConfigError(f"unknown builtin group {config['builtin']!r}")
        return BUILTINS[name]()
    raw = config["generators"]
    if len(raw) == 0:
        raise EmptyGenerators("generator list is empty")
    gens = []
    for i, g in enumerate(raw):
        if len(g) != 4:
            raise ConfigError(f"generator {i + 1} needs 4 entries")
        try:
            gens.append(MoebiusElement(*map(float, g)))
        except BadDeterminant as exc:
            raise BadDeterminant(f"generator {i + 1}: {exc}") from None
    return _make_group(
        gens,
        label=str(config.get("label", "custom")),
        exactness=config.get("exactness"),
        dirichlet=bool(config.get("dirichlet", False)),
        covolume=config.get("covolume"),
        dirichlet_radius=config.get("dirichlet_radius"),
    )


# --- enumeration ------------------------------------------------------------


def _expand(frontier: np.ndarray, gens: np.ndarray, bound: float, threads: int) -> np.ndarray:
    def work(chunk):
        prod = mx.mul(chunk[:, None, :], gens[None, :, :]).reshape(-1, 4)
        return prod[mx.sqnorm(prod) < bound]

    if threads <= 1 or len(frontier) < _PARALLEL_MIN_ROWS:
        out = work(frontier)
    else:
        chunks = np.array_split(frontier, threads)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = np.concatenate(list(ex.map(work, chunks)))
    return mx.canon(out)


def _bfs(gens: np.ndarray, bound: float, budget: int, threads: int) -> np.ndarray:
    seen = mx.RowSet()
    ident = np.array([[1.0, 0.0, 0.0, 1.0]])
    seen.add(ident)
    parts = [ident]
    frontier = ident
    total = 1
    while len(frontier):
        cand = _expand(frontier, gens, bound, threads)
        cand = cand[mx.unique_rows(cand)]
        new = cand[~seen.contains(cand)]
        total += len(new)
        if total > budget:
            raise BudgetExceeded(f"more than {budget} elements inside the ball")
        seen.add(new)
        parts.append(new)
        frontier = new
    return np.concatenate(parts)


def ball_rows(
    G: FuchsianGroup,
    R: float,
    *,
    margin: float | None = None,
    budget: int = DEFAULT_BUDGET,
    threads: int | None = None,
    verify: bool | None = None,
) -> np.ndarray:
    """All elements with squared norm below ``R`` as canonical rows.

    Breadth-first search over right multiplication by generators, pruned at
    ``R * (1 + margin)``.  For Dirichlet side pairings every element is
    reached through elements of smaller norm, so no margin is needed; for
    other generating sets the margin is a heuristic and ``verify`` reruns
    with a larger margin, raising IncompleteEnumeration when counts differ.
    Rows are sorted by squared norm (ties by the sort key), so the result is
    independent of thread count.
    """
    if not R >= 2.0:
        raise InputError(f"ball bound R={R!r} must be at least 2")
    if margin is None:
        margin = 0.0 if G.dirichlet else DEFAULT_MARGIN
    if verify is None:
        verify = not G.dirichlet
    threads = default_threads() if threads is None else max(1, int(threads))
    rows = _bfs(G.rows, R * (1.0 + margin), budget, threads)
    rows = rows[mx.sqnorm(rows) < R]
    if verify:
        wide = _bfs(G.rows, R * (1.0 + 2.0 * margin + 0.5), budget, threads)
        wide = wide[mx.sqnorm(wide) < R]
        if len(wide) != len(rows):
            raise IncompleteEnumeration(
                f"enumeration unstable: {len(rows)} elements with margin {margin}, "
                f"{len(wide)} with a wider margin"
            )
    order = np.lexsort((mx.sort_key(rows), mx.sqnorm(rows)))
    return rows[order]


def enumerate_ball(G: FuchsianGroup, R: float, **kw) -> list[MoebiusElement]:
    """Distinct elements (up to sign) with a^2+b^2+c^2+d^2 < R.

    Since ``|g|^2 = 2 cosh d(i, g i)`` this is the orbit of ``i`` inside the
    hyperbolic ball of radius arccosh(R/2).
    """
    return [MoebiusElement(*r) for r in ball_rows(G, R, **kw)]


def closure_defects(G: FuchsianGroup, rows: np.ndarray, R: float) -> int:
    """Number of products row*generator inside the ball but missing from rows."""
    s = mx.RowSet()
    s.add(rows)
    prod = mx.canon(mx.mul(rows[:, None, :], G.rows[None, :, :]).reshape(-1, 4))
    prod = prod[mx.sqnorm(prod) < R]
    return int((~s.contains(prod)).sum())


def widen_bound(R: float, *shifts: float) -> float:
    """Squared-norm bound in the base frame covering a ball of bound R around
    points at the given distances from i."""
    rho = math.acosh(R / 2.0) + sum(shifts)
    return 2.0 * math.cosh(rho)


# --- geodesics --------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicFrame:
    """Coordinates in which the lift of a closed geodesic is the imaginary axis.

    ``sigma gamma sigma^-1 = diag(m, 1/m)`` and ``lenC = 2 log m``.  ``offset``
    is the distance from ``i`` to ``sigma^-1 i``, the price in ball radius for
    working in this frame.
    """

    sigma: MoebiusElement
    m: float
    lenC: float
    primitive_checked: bool
    gamma: MoebiusElement
    word: tuple[int, ...] = ()
    offset: float = 0.0

    def to_frame(self, rows: np.ndarray) -> np.ndarray:
        return mx.canon(mx.conjugate(rows, self.sigma.as_array()))


def _frame_for(gamma: MoebiusElement, word=()) -> GeodesicFrame:
    sigma, m = diagonalize_hyperbolic(gamma)
    conj = sigma @ gamma @ sigma.inverse()
    resid = float(np.abs(conj.as_array() - np.array([m, 0.0, 0.0, 1.0 / m])).max())
    if resid > 1e-10 * max(1.0, m):
        raise InvariantViolation(f"diagonalization residual {resid:.3e}")
    offset = hyperbolic_distance(1j, mobius_apply(sigma.inverse(), 1j))
    return GeodesicFrame(sigma, m, 2.0 * math.log(m), False, gamma, tuple(word), offset)


def geodesic_frame(
    G: FuchsianGroup, word: Sequence[int], *, check_primitive: bool = True, threads: int | None = None
) -> GeodesicFrame:
    gamma = G.word(word)
    frame = _frame_for(gamma, word)
    if not check_primitive:
        return frame
    # any proper root is diagonal in this frame with |a| in (1, m)
    R = 2.0 * (math.cosh(frame.lenC) + 1.0)
    rows = ball_rows(G, widen_bound(R, 2.0 * frame.offset), threads=threads)
    conj = frame.to_frame(rows)
    conj = conj[mx.sqnorm(conj) < R]
    scale = 1e-8 * (1.0 + np.abs(conj).max(axis=1))
    diag = (np.abs(conj[:, 1]) <= scale) & (np.abs(conj[:, 2]) <= scale)
    a = np.abs(conj[diag, 0])
    a = np.maximum(a, 1.0 / a)
    roots = np.sort(a[(a > 1.0 + 1e-9) & (a < frame.m * (1.0 - 1e-9))])
    if len(roots):
        r = float(roots[0])
        n = frame.lenC / (2.0 * math.log(r))
        if abs(n - round(n)) > 1e-6:
            raise InvariantViolation("stabilizer of the axis is not cyclic")
        raise NotPrimitive(
            f"word is the {round(n)}-th power of a shorter element", root=r, power=round(n)
        )
    return GeodesicFrame(
        frame.sigma, frame.m, frame.lenC, True, frame.gamma, frame.word, frame.offset
    )


# --- double cosets ----------------------------------------------------------


@dataclass(frozen=True)
class DoubleCosetRep:
    rep: MoebiusElement
    cls: DeltaClass
    ortholength: float | None
    angle: float | None
    nu: float
    lambda_l: float
    lambda_r: float

    @property
    def delta(self) -> float:
        return self.cls.delta

    @property
    def kind(self) -> DeltaKind:
        return self.cls.kind


_IDENTITY, _EXCEPTIONAL, _REGULAR = 0, 1, 2
_KINDS = {_IDENTITY: DeltaKind.IDENTITY, _EXCEPTIONAL: DeltaKind.EXCEPTIONAL, _REGULAR: DeltaKind.REGULAR}


def _identity_mask(x: np.ndarray) -> np.ndarray:
    scale = 1e-9 * (1.0 + np.abs(x).max(axis=1))
    return (np.abs(x[:, 1]) <= scale) & (np.abs(x[:, 2]) <= scale)


def _classify(x: np.ndarray, ident: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dl = mx.delta(x)
    kinds = np.where(x[:, 0] * x[:, 1] * x[:, 2] * x[:, 3] < 0.0, _EXCEPTIONAL, _REGULAR)
    kinds[ident] = _IDENTITY
    bad = (~ident) & (np.abs(dl - 2.0) < EPS_DELTA)
    if bad.any():
        raise DegenerateDelta(f"{int(bad.sum())} element(s) with delta numerically equal to 2")
    return dl, kinds


def reduce_rows(x: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normal forms of the classes of rows ``x`` (given in the frame).

    Left and right multiplication by ``diag(m^k)`` scale ``a`` by ``m^(k+j)``
    and ``b`` by ``m^(k-j)``.  So ``p = k+j`` is fixed by ``|a m^p|`` in
    ``[1, m)`` and ``q = k-j``, of the same parity, by ``|b m^q|`` in
    ``[1, m^2)``.  Values within a relative ``1e-9`` of an interval's upper
    end snap to the lower end so that rounding noise cannot split a class.
    Returns (normal forms, delta, kind codes).
    """
    x = np.asarray(x, dtype=float).reshape(-1, 4)
    ident = _identity_mask(x)
    out = x.copy()
    out[ident] = (1.0, 0.0, 0.0, 1.0)
    reg = ~ident
    if reg.any():
        y = x[reg]
        logm = math.log(m)
        with np.errstate(divide="raise"):
            try:
                la = np.log(np.abs(y[:, 0])) / logm
                lb = np.log(np.abs(y[:, 1])) / logm
            except FloatingPointError:
                raise DegenerateDelta("element with a zero diagonal or off-diagonal entry") from None
        p = -np.floor(la + _SNAP)
        q = p - 2.0 * np.floor((lb + p + _SNAP) / 2.0)
        sp = np.power(m, p)
        sq = np.power(m, q)
        out[reg] = np.stack((y[:, 0] * sp, y[:, 1] * sq, y[:, 2] / sq, y[:, 3] / sp), axis=1)
    out = mx.canon(out)
    dl, kinds = _classify(out, ident)
    return out, dl, kinds


def _rep_object(row: np.ndarray, dl: float, kind: int) -> DoubleCosetRep:
    rep = MoebiusElement(*row)
    k = _KINDS[kind]
    cls = DeltaClass(float(dl), k)
    if k is DeltaKind.IDENTITY:
        return DoubleCosetRep(rep, cls, None, None, float("nan"), float("nan"), float("nan"))
    a, b, c, d = row
    lam_l = 0.5 * math.log(abs(a * b / (c * d)))
    lam_r = 0.5 * math.log(abs(a * c / (b * d)))
    nu = math.sqrt(abs(a * d)) + math.sqrt(abs(b * c))
    if k is DeltaKind.REGULAR:
        return DoubleCosetRep(rep, cls, ortholength(float(dl)), None, nu, lam_l, lam_r)
    return DoubleCosetRep(rep, cls, None, angle_from_delta(float(dl)), nu, lam_l, lam_r)


def double_coset_reduce(frame: GeodesicFrame, g: MoebiusElement) -> DoubleCosetRep:
    """Canonical representative of the class of ``g`` (given in the frame)."""
    rows, dl, kinds = reduce_rows(g.as_array()[None, :], frame.m)
    return _rep_object(rows[0], dl[0], kinds[0])


# --- spectra ----------------------------------------------------------------


@dataclass(frozen=True)
class OrthoSpectrum:
    """Double-coset classes with delta below ``cutoff``.

    ``reps``, ``delta`` and ``kinds`` are aligned arrays sorted by delta (ties
    by representative).  Both exceptional and regular classes are kept;
    ``entries`` lists the regular deltas with multiplicities and
    ``exceptional`` the crossing angles.  For a pair of geodesics ``m`` and
    ``lenC`` refer to the first (right-acting) geodesic and ``m2``/``lenC2``
    to the second (left-acting) one; otherwise both coincide.

    ``count_data`` is ``(covolume, shift, c0, c2)`` when the group carries a
    covolume and Dirichlet radius: every class with delta < x has a normal
    form g with ``d(i, g i) < acosh((c0 + c2 x^2)/2)`` in the frame, and
    ``shift`` is the extra radius needed to cover the matching translates of
    the Dirichlet domain.
    """

    reps: np.ndarray
    delta: np.ndarray
    kinds: np.ndarray
    cutoff: float
    m: float
    lenC: float
    m2: float
    lenC2: float
    pair: bool = False
    tau: MoebiusElement | None = None
    n_elements: int = 0
    count_data: tuple[float, float, float, float] | None = None

    @property
    def regular_delta(self) -> np.ndarray:
        return self.delta[self.kinds == _REGULAR]

    @property
    def exceptional_delta(self) -> np.ndarray:
        return self.delta[self.kinds == _EXCEPTIONAL]

    @property
    def exceptional(self) -> list[float]:
        return sorted(angle_from_delta(float(d)) for d in self.exceptional_delta)

    @property
    def entries(self) -> list[tuple[float, int]]:
        out: list[tuple[float, int]] = []
        for d in self.regular_delta:
            d = float(d)
            if out and abs(d - out[-1][0]) <= 1e-9 * d:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((d, 1))
        return out

    def __len__(self):
        return len(self.delta)

    def classes(self) -> list[DoubleCosetRep]:
        return [_rep_object(r, d, k) for r, d, k in zip(self.reps, self.delta, self.kinds)]

    def degeneracy(self) -> np.ndarray:
        """For each class, how many classes share its delta (relative 1e-9)."""
        n = len(self.delta)
        out = np.ones(n, dtype=np.int64)
        start = 0
        for i in range(1, n + 1):
            if i == n or self.delta[i] - self.delta[start] > 1e-9 * self.delta[start]:
                out[start:i] = i - start
                start = i
        return out

    def restrict(self, x: float) -> "OrthoSpectrum":
        """The spectrum that a run with cutoff ``x`` would produce."""
        if x > self.cutoff:
            raise BeyondCutoff(f"x={x!r} exceeds the cutoff {self.cutoff!r}")
        keep = self.delta < x
        return OrthoSpectrum(
            self.reps[keep], self.delta[keep], self.kinds[keep], x, self.m, self.lenC,
            self.m2, self.lenC2, self.pair, self.tau, self.n_elements, self.count_data,
        )


def _sorted_classes(reps, dl, kinds, priority=None):
    # of several elements of one class, keep the one reached with the
    # smallest norm: it carries the least rounding error
    keep = mx.unique_rows(reps, priority=priority)
    reps, dl, kinds = reps[keep], dl[keep], kinds[keep]
    # rounded keys, so that roundoff in a representative cannot reorder ties
    k = np.round(reps, 9)
    order = np.lexsort((k[:, 3], k[:, 2], k[:, 1], k[:, 0], np.round(dl, 9)))
    return reps[order], dl[order], kinds[order]


def ortho_spectrum(
    G: FuchsianGroup,
    frame: GeodesicFrame,
    X: float,
    *,
    budget: int = DEFAULT_BUDGET,
    threads: int | None = None,
    margin: float | None = None,
) -> OrthoSpectrum:
    """All classes in Gamma_0 \\ Gamma / Gamma_0 other than Gamma_0 with delta < X.

    A normalized representative with delta < X has squared norm below
    ``2 m^4 + X^2/4 + 1``: ``a^2 + b^2 < m^2 + m^4`` and, since
    ``|a|, |b| >= 1``, ``c^2 + d^2 <= a^2 d^2 + b^2 c^2 <= X^2/4 + 1``.  That
    ball (in the frame) is enumerated and every element reduced.
    """
    if not X > 2.0:
        raise InputError(f"cutoff X={X!r} must exceed 2")
    m = frame.m
    R = 2.0 * m**4 + X * X / 4.0 + 1.0
    rows = ball_rows(G, widen_bound(R, 2.0 * frame.offset), budget=budget, threads=threads, margin=margin)
    conj = frame.to_frame(rows)
    inside = mx.sqnorm(conj) < R
    conj = conj[inside]
    reps, dl, kinds = reduce_rows(conj, m)
    keep = (kinds != _IDENTITY) & (dl < X)
    prio = mx.sqnorm(rows[inside][keep])
    reps, dl, kinds = _sorted_classes(reps[keep], dl[keep], kinds[keep], prio)
    cd = _count_data(G, 2.0 * frame.offset, 2.0 * m**4 + 1.0, 0.25)
    return OrthoSpectrum(
        reps, dl, kinds, float(X), m, frame.lenC, m, frame.lenC, n_elements=len(rows), count_data=cd
    )


def _count_data(G: FuchsianGroup, shift: float, c0: float, c2: float):
    # g i within rho of i in the frame puts g o within rho + shift of o in the
    # base frame; that translate of the Dirichlet domain lies within
    # rho + shift + dirichlet_radius, and translates are disjoint
    if G.covolume is None or G.dirichlet_radius is None:
        return None
    return (float(G.covolume), float(shift + G.dirichlet_radius), float(c0), float(c2))


def pi_delta(spec: OrthoSpectrum, x: float) -> int:
    """Number of classes (exceptional and regular) with delta < x."""
    if x > spec.cutoff:
        raise BeyondCutoff(f"x={x!r} exceeds the cutoff {spec.cutoff!r}")
    return int(np.searchsorted(spec.delta, x, side="left"))


def reduce_pair_rows(x: np.ndarray, m1: float, m2: float):
    """Normal forms for Gamma_2 \\ Gamma / Gamma_1 with both stabilizers diagonal.

    Left multiplication by ``diag(m2^k)`` and right by ``diag(m1^j)`` move
    ``(log|a|, log|b|)`` by ``k(L2, L2) + j(L1, -L1)``; the normal form puts
    ``(log|a| + log|b|)/2`` in ``[0, L2)`` and ``(log|a| - log|b|)/2`` in
    ``[0, L1)``.  Then ``|a| >= 1`` and ``|b| > 1/m1``.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 4)
    ident = _identity_mask(x)
    out = x.copy()
    out[ident] = (1.0, 0.0, 0.0, 1.0)
    reg = ~ident
    if reg.any():
        y = x[reg]
        l1, l2 = math.log(m1), math.log(m2)
        with np.errstate(divide="raise"):
            try:
                u = np.log(np.abs(y[:, 0]))
                v = np.log(np.abs(y[:, 1]))
            except FloatingPointError:
                raise DegenerateDelta("element with a zero diagonal or off-diagonal entry") from None
        k = -np.floor((u + v) / (2.0 * l2) + _SNAP)
        j = -np.floor((u - v) / (2.0 * l1) + _SNAP)
        s_left = np.power(m2, k)
        s_right = np.power(m1, j)
        out[reg] = np.stack(
            (
                y[:, 0] * s_left * s_right,
                y[:, 1] * s_left / s_right,
                y[:, 2] / s_left * s_right,
                y[:, 3] / s_left / s_right,
            ),
            axis=1,
        )
    out = mx.canon(out)
    dl, kinds = _classify(out, ident)
    return out, dl, kinds


def pair_cosets(
    G: FuchsianGroup,
    frame1: GeodesicFrame,
    word2: Sequence[int],
    X: float,
    *,
    budget: int = DEFAULT_BUDGET,
    threads: int | None = None,
    margin: float | None = None,
) -> OrthoSpectrum:
    """Classes of geodesic segments from C1 to C2, parameterized by
    ``delta(tau^-1 gamma)`` where ``tau i R+`` is a lift of C2 in frame 1.

    With ``sigma_2`` the frame of C2, ``tau = sigma_1 sigma_2^-1`` and the
    element to normalize is ``h = sigma_2 gamma sigma_1^-1``.  The identity
    class only occurs when C1 = C2; it is dropped.
    """
    if not X > 2.0:
        raise InputError(f"cutoff X={X!r} must exceed 2")
    frame2 = geodesic_frame(G, word2, threads=threads)
    m1, m2 = frame1.m, frame2.m
    s1 = frame1.sigma.as_array()
    s2 = frame2.sigma.as_array()
    tau = frame1.sigma @ frame2.sigma.inverse()
    R = (m1 * m2) ** 2 + m2**2 + X * X / 4.0 * (1.0 + m1 * m1) + 1.0
    rows = ball_rows(
        G, widen_bound(R, frame1.offset, frame2.offset), budget=budget, threads=threads, margin=margin
    )
    h = mx.canon(mx.mul(mx.mul(s2, rows), mx.inv(s1)))
    inside = mx.sqnorm(h) < R
    h = h[inside]
    reps, dl, kinds = reduce_pair_rows(h, m1, m2)
    keep = (kinds != _IDENTITY) & (dl < X)
    prio = mx.sqnorm(rows[inside][keep])
    reps, dl, kinds = _sorted_classes(reps[keep], dl[keep], kinds[keep], prio)
    cd = _count_data(G, frame1.offset + frame2.offset, (m1 * m2) ** 2 + m2**2 + 1.0, 0.25 * (1.0 + m1 * m1))
    return OrthoSpectrum(
        reps, dl, kinds, float(X), m1, frame1.lenC, m2, frame2.lenC, True, tau, len(rows), cd
    )


def class_reps_of(spec: OrthoSpectrum, kinds: Iterable[DeltaKind]) -> list[DoubleCosetRep]:
    wanted = set(kinds)
    return [c for c in spec.classes() if c.kind in wanted]
