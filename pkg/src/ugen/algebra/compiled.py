"""Batched evaluation of polynomial systems and their Jacobians.

All monomials appearing in a system or its first partials are collected once;
values and Jacobians are then sparse coefficient matrices applied to the
vector of monomial values, so a batch of points costs a few dense array passes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ugen.algebra.poly import MPoly, PolySystem


class CompiledSystem:
    """Evaluate ``polys`` (sharing one ring) at many points at once."""

    def __init__(self, polys: Sequence[MPoly] | PolySystem, nvars: int | None = None):
        polys = list(polys)
        if nvars is None:
            if not polys:
                raise ValueError("cannot infer the variable count of an empty system")
            nvars = polys[0].ring.nvars
        self.nvars = nvars
        self.npolys = len(polys)
        index: dict[tuple[int, ...], int] = {}

        def slot(e):
            k = index.get(e)
            if k is None:
                k = index[e] = len(index)
            return k

        rows, cols, vals = [], [], []
        jrows, jcols, jvals = [], [], []
        for i, p in enumerate(polys):
            for e, c in p.terms.items():
                rows.append(i)
                cols.append(slot(e))
                vals.append(c)
                for j, k in enumerate(e):
                    if k:
                        d = list(e)
                        d[j] = k - 1
                        jrows.append(i * nvars + j)
                        jcols.append(slot(tuple(d)))
                        jvals.append(c * k)
        nmono = max(len(index), 1)
        exps = np.zeros((nmono, nvars), dtype=np.int64)
        for e, k in index.items():
            exps[k] = e
        self.exponents = exps
        self.max_degree = int(exps.max()) if exps.size else 0
        self._value_matrix = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)),
                                           shape=(self.npolys, nmono))
        self._jac_matrix = sp.csr_matrix((np.asarray(jvals, dtype=complex), (jrows, jcols)),
                                         shape=(self.npolys * nvars, nmono))
        # only variables that actually appear with positive exponent need a factor
        self._active = [j for j in range(nvars) if exps[:, j].any()]

    def monomials(self, X: np.ndarray) -> np.ndarray:
        """Monomial values, shape (nmono, batch)."""
        X = np.asarray(X, dtype=complex)
        B = X.shape[0]
        out = np.ones((self.exponents.shape[0], B), dtype=complex)
        if not self._active:
            return out
        powers = np.empty((self.max_degree + 1, self.nvars, B), dtype=complex)
        powers[0] = 1.0
        if self.max_degree >= 1:
            powers[1] = X.T
        for k in range(2, self.max_degree + 1):
            powers[k] = powers[k - 1] * X.T
        for j in self._active:
            e = self.exponents[:, j]
            out *= powers[e, j, :]
        return out

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.ndim != 2 or X.shape[1] != self.nvars:
            raise ValueError(f"points have shape {X.shape}, expected (batch, {self.nvars})")
        return X

    def values(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        return np.asarray(self._value_matrix @ self.monomials(X)).T

    def values_and_jacobians(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns values (B, npolys) and Jacobians (B, npolys, nvars)."""
        X = self._check(X)
        mono = self.monomials(X)
        vals = np.asarray(self._value_matrix @ mono).T
        jac = np.asarray(self._jac_matrix @ mono).T.reshape(X.shape[0], self.npolys, self.nvars)
        return vals, jac


def relative_residuals(polys: Sequence[MPoly], X: np.ndarray, nvars: int | None = None) -> np.ndarray:
    """``|f(x)| / sum_k |c_k| prod_g ||x_g||^{e_kg}`` per point (row) and polynomial (column).

    The denominator bounds every term by the norms of the variable groups, so
    the ratio is scale free and stays meaningful when coordinates vanish.
    """
    polys = list(polys)
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if not polys:
        return np.zeros((X.shape[0], 0))
    ring = polys[0].ring
    n = nvars if nvars is not None else ring.nvars
    vals = CompiledSystem(polys, n).values(X)
    groups = [list(g) for g in ring.groups] if n == ring.nvars else [list(range(n))]
    norms = np.stack([np.linalg.norm(X[:, g], axis=1) for g in groups], axis=1)
    mags = np.zeros_like(vals, dtype=float)
    for i, p in enumerate(polys):
        for e, c in p.terms.items():
            e = np.asarray(e)
            mags[:, i] += abs(c) * np.prod(norms ** np.array([e[g].sum() for g in groups]), axis=1)
    return np.abs(vals) / np.maximum(mags, np.finfo(float).tiny)
