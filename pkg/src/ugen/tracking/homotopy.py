"""Straight-line homotopies with the gamma trick and fixed chart rows.

A homotopy here is any object with ``nvars``, ``nrows`` and
``evaluate(X, t) -> (H, H_x, H_t)`` acting on a batch ``X`` of shape
(B, nvars) and parameters ``t`` of shape (B,).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ugen.algebra.compiled import CompiledSystem
from ugen.algebra.poly import MPoly, PolySystem, Ring


class DegreeMismatchError(ValueError):
    pass


def random_unit_complex(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def random_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_charts(ring: Ring, rng: np.random.Generator) -> list[MPoly]:
    """One affine chart ``c . x_g - 1`` per variable group."""
    charts = []
    for g in ring.groups:
        c = random_sphere(rng, len(g))
        charts.append(MPoly.linear(ring, c, g, constant=-1.0))
    return charts


def place_on_charts(x: np.ndarray, ring: Ring, charts: Sequence[MPoly]) -> np.ndarray:
    """Rescale each group of ``x`` so its chart equation holds."""
    x = np.array(x, dtype=complex)
    for g, chart in zip(ring.groups, charts):
        idx = list(g)
        lin = chart.evaluate(np.where(np.isin(np.arange(ring.nvars), idx), x, 0)) + 1.0
        if abs(lin) < 1e-14:
            raise ZeroDivisionError("point lies on the chart's hyperplane at infinity")
        x[idx] = x[idx] / lin
    return x


class LinearProducts:
    """Rows ``prod_k (A_i x)_k`` evaluated in factored form.

    ``factors[i]`` has shape (number of factors, nvars).  Expanding such
    products can create hundreds of monomials; factored evaluation is linear
    in the factor count.
    """

    def __init__(self, factors: Sequence[np.ndarray]):
        factors = [np.asarray(A, dtype=complex) for A in factors]
        self.nrows = len(factors)
        K = max((A.shape[0] for A in factors), default=0)
        n = factors[0].shape[1] if factors else 0
        # pad every row to K factors; padded slots evaluate to 1
        self._A = np.zeros((self.nrows, K, n), dtype=complex)
        self._pad = np.zeros((self.nrows, K), dtype=bool)
        for i, A in enumerate(factors):
            self._A[i, :A.shape[0]] = A
            self._pad[i, A.shape[0]:] = True

    def values_and_jacobians(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m, K, n = self._A.shape
        L = (X @ self._A.reshape(m * K, n).T).reshape(X.shape[0], m, K)
        L[:, self._pad] = 1.0
        one = np.ones(L.shape[:2] + (1,), dtype=complex)
        # product of all factors but the k-th, without dividing
        before = np.cumprod(np.concatenate([one, L[:, :, :-1]], axis=2), axis=2)
        after = np.cumprod(np.concatenate([one, L[:, :, :0:-1]], axis=2), axis=2)[:, :, ::-1]
        others = np.where(self._pad, 0.0, before * after)
        vals = before[:, :, -1] * L[:, :, -1]
        jac = np.matmul(others.transpose(1, 0, 2), self._A).transpose(1, 0, 2)
        return vals, jac


class Homotopy:
    """``H(x, t) = [fixed(x); (1 - t) gamma start(x) + t target(x)]``.

    ``fixed`` holds rows that do not move with ``t``: defining equations shared by
    both ends and one chart equation per projective factor.  When the start rows
    are products of linear forms, pass their coefficient matrices as
    ``start_factors`` to evaluate them unexpanded.
    """

    def __init__(self, ring: Ring, start: Sequence[MPoly], target: Sequence[MPoly], gamma: complex = 1.0,
                 fixed: Sequence[MPoly] = (), charts: Sequence[MPoly] = (),
                 start_factors: Sequence[np.ndarray] | None = None):
        start, target, fixed, charts = list(start), list(target), list(fixed), list(charts)
        if len(start) != len(target):
            raise ValueError("start and target systems must have the same length")
        if start_factors is not None and len(start_factors) != len(start):
            raise ValueError("need one factor matrix per start row")
        for p in start + target + fixed + charts:
            if p.ring != ring:
                raise ValueError("all rows must live in the homotopy's ring")
        self.ring = ring
        self.start = PolySystem(ring, tuple(start))
        self.target = PolySystem(ring, tuple(target))
        self.fixed = PolySystem(ring, tuple(fixed))
        self.charts = PolySystem(ring, tuple(charts))
        self.gamma = complex(gamma)
        self.nvars = ring.nvars
        self.nfixed = len(fixed) + len(charts)
        self.nmoving = len(start)
        self.nrows = self.nfixed + self.nmoving
        self._products = LinearProducts(start_factors) if start_factors is not None else None
        if self._products is None:
            self._compiled = CompiledSystem(fixed + charts + start + target, ring.nvars)
        else:
            self._compiled = CompiledSystem(fixed + charts + target, ring.nvars)

    def evaluate(self, X: np.ndarray, t: np.ndarray):
        X = np.asarray(X, dtype=complex)
        t = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],))[:, None]
        vals, jac = self._compiled.values_and_jacobians(X)
        nf, nm = self.nfixed, self.nmoving
        if self._products is None:
            S, T = vals[:, nf:nf + nm], vals[:, nf + nm:]
            JS, JT = jac[:, nf:nf + nm], jac[:, nf + nm:]
        else:
            S, JS = self._products.values_and_jacobians(X)
            T, JT = vals[:, nf:], jac[:, nf:]
        g = self.gamma
        H = np.concatenate([vals[:, :nf], (1 - t) * g * S + t * T], axis=1)
        Hx = np.concatenate([jac[:, :nf], (1 - t)[:, :, None] * g * JS + t[:, :, None] * JT], axis=1)
        Ht = np.concatenate([np.zeros((X.shape[0], nf), dtype=complex), T - g * S], axis=1)
        return H, Hx, Ht

    def residual(self, x: np.ndarray, t: float) -> float:
        H, _, _ = self.evaluate(np.asarray(x)[None, :], np.array([t]))
        return float(np.linalg.norm(H[0]))


def make_straight_line(start: PolySystem, target: PolySystem, gamma: complex = 1.0,
                       charts: Sequence[MPoly] = (), fixed: Sequence[MPoly] = ()) -> Homotopy:
    """Straight-line family between two systems of matching per-group degrees."""
    if start.ring != target.ring:
        raise ValueError("start and target must share a ring")
    if len(start) != len(target):
        raise ValueError("start and target must have the same number of equations")
    if abs(abs(gamma) - 1.0) > 1e-12:
        raise ValueError("gamma must lie on the unit circle")
    for k, (s, q) in enumerate(zip(start, target)):
        if s.is_zero() or q.is_zero():
            raise DegreeMismatchError(f"row {k} is identically zero")
        if s.multidegree() != q.multidegree():
            raise DegreeMismatchError(
                f"row {k}: start multidegree {s.multidegree()} differs from target {q.multidegree()}")
    return Homotopy(start.ring, start.polys, target.polys, gamma, fixed=fixed, charts=charts)


@dataclass(frozen=True)
class AffineSubstitution:
    """``x[var] = (coef(t) . x + const(t))`` with coef, const given as callables of t."""

    var: int
    coef: object  # t -> (B, nvars) array, zero in column ``var``
    coef_dt: object
    const: object  # t -> (B,) array
    const_dt: object


class ReducedHomotopy:
    """A homotopy with some variables and the rows defining them eliminated.

    Each eliminated variable is replaced by an affine-linear expression in the
    remaining ones (possibly depending on ``t``); no substitution may refer to
    another eliminated variable.  Coordinates of the reduced homotopy omit
    the eliminated variables.
    """

    def __init__(self, base, subs: Sequence[AffineSubstitution] | AffineSubstitution,
                 rows: Sequence[int] | int, t_min: float = 0.0):
        subs = [subs] if isinstance(subs, AffineSubstitution) else list(subs)
        rows = [rows] if isinstance(rows, (int, np.integer)) else list(rows)
        if len(subs) != len(rows) or len({s.var for s in subs}) != len(subs) or len(set(rows)) != len(rows):
            raise ValueError("need one distinct row per distinct eliminated variable")
        self.base = base
        self.subs = subs
        self.rows_removed = rows
        self.t_min = t_min
        gone = {s.var for s in subs}
        self.nvars = base.nvars - len(subs)
        self.nrows = base.nrows - len(rows)
        self._keep = [j for j in range(base.nvars) if j not in gone]
        self._rows = [i for i in range(base.nrows) if i not in set(rows)]

    @property
    def sub(self) -> AffineSubstitution:
        return self.subs[0]

    def _check_t(self, t):
        if np.any(np.asarray(t) < self.t_min):
            raise ValueError(f"eliminated homotopy is only valid for t >= {self.t_min}")

    def lift(self, Y: np.ndarray, t: np.ndarray) -> np.ndarray:
        self._check_t(t)
        Y = np.atleast_2d(np.asarray(Y, dtype=complex))
        t = np.broadcast_to(np.asarray(t, dtype=float), (Y.shape[0],))
        X = np.zeros((Y.shape[0], self.base.nvars), dtype=complex)
        X[:, self._keep] = Y
        for s in self.subs:
            X[:, s.var] = np.sum(s.coef(t) * X, axis=1) + s.const(t)
        return X

    def reduce(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=complex))[:, self._keep]

    def evaluate(self, Y: np.ndarray, t: np.ndarray):
        t = np.broadcast_to(np.asarray(t, dtype=float), (np.atleast_2d(Y).shape[0],))
        X = self.lift(Y, t)
        H, Hx, Ht = self.base.evaluate(X, t)
        Jy = Hx[:, :, self._keep].copy()
        Jt = Ht.copy()
        for s in self.subs:
            dHdv = Hx[:, :, s.var]
            Jy += dHdv[:, :, None] * s.coef(t)[:, None, self._keep]
            Jt += dHdv * (np.sum(s.coef_dt(t) * X, axis=1) + s.const_dt(t))[:, None]
        rows = self._rows
        return H[:, rows], Jy[:, rows], Jt[:, rows]


def _affine_parts(p: MPoly) -> tuple[np.ndarray, complex]:
    if p.degree > 1:
        raise ValueError("elimination row must be affine-linear")
    a = np.zeros(p.ring.nvars, dtype=complex)
    b = 0j
    for e, c in p.terms.items():
        if sum(e) == 0:
            b = c
        else:
            a[e.index(1)] = c
    return a, b


def eliminate_by_rows(H: Homotopy, variables: Sequence[int], rows: Sequence[int],
                      t_min: float = 0.0) -> ReducedHomotopy:
    """Eliminate each ``variables[k]`` through the affine-linear row ``rows[k]`` of ``H``."""
    subs = [_substitution(H, v, r) for v, r in zip(variables, rows)]
    gone = set(variables)
    for v, r in zip(variables, rows):
        a0, a1 = _row_affine_parts(H, r)
        for other in gone - {v}:
            if a0[0][other] != 0 or a1[0][other] != 0:
                raise ValueError(f"row {r} involves another eliminated variable")
    return ReducedHomotopy(H, subs, list(rows), t_min)


def _row_affine_parts(H: Homotopy, row: int):
    if row < H.nfixed:
        parts = _affine_parts((H.fixed.polys + H.charts.polys)[row])
        return parts, parts
    k = row - H.nfixed
    return _affine_parts(H.start[k]), _affine_parts(H.target[k])


def eliminate_by_row(H: Homotopy, var: int, row: int, t_min: float = 0.0) -> ReducedHomotopy:
    """Eliminate ``var`` through an affine-linear row of ``H``.

    A fixed row (a chart) gives a ``t``-independent substitution; a moving row
    ``(1 - t) gamma s(x) + t q(x)`` gives one that is singular wherever the
    coefficient of ``var`` vanishes, e.g. at ``t = 0`` for ``s`` free of ``var``.
    """
    return eliminate_by_rows(H, [var], [row], t_min)


def _substitution(H: Homotopy, var: int, row: int) -> AffineSubstitution:
    if row < H.nfixed:
        a0, b0 = _affine_parts((H.fixed.polys + H.charts.polys)[row])
        a1, b1 = a0, b0
        g = 1.0
        blend = lambda t: (np.ones_like(t), np.zeros_like(t))  # noqa: E731
    else:
        k = row - H.nfixed
        a0, b0 = _affine_parts(H.start[k])
        a1, b1 = _affine_parts(H.target[k])
        g = H.gamma
        blend = lambda t: ((1 - t), t)  # noqa: E731

    def parts(t):
        w0, w1 = blend(t)
        a = w0[:, None] * g * a0 + w1[:, None] * a1
        b = w0 * g * b0 + w1 * b1
        if row < H.nfixed:
            da, db = np.zeros_like(a), np.zeros_like(b)
        else:
            da = np.broadcast_to(a1 - g * a0, a.shape)
            db = np.broadcast_to(b1 - g * b0, b.shape)
        return a, b, da, db

    def pivot(a):
        p = a[:, var]
        if np.any(np.abs(p) < 1e-300):
            raise ZeroDivisionError("eliminated variable has zero coefficient at this t")
        return p

    def coef(t):
        a, _, _, _ = parts(t)
        c = -a / pivot(a)[:, None]
        c[:, var] = 0
        return c

    def coef_dt(t):
        a, _, da, _ = parts(t)
        p = pivot(a)
        c = -(da * p[:, None] - a * da[:, var][:, None]) / (p ** 2)[:, None]
        c[:, var] = 0
        return c

    def const(t):
        a, b, _, _ = parts(t)
        return -b / pivot(a)

    def const_dt(t):
        a, b, da, db = parts(t)
        p = pivot(a)
        return -(db * p - b * da[:, var]) / p ** 2

    return AffineSubstitution(var, coef, coef_dt, const, const_dt)
