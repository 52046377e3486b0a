"""Univariate complex root finding (Aberth–Ehrlich with a binomial fast path)."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class RootFindingError(ArithmeticError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


def _trim(coeffs: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    return c


def _binomial_roots(c: np.ndarray) -> np.ndarray | None:
    """Roots of ``a*u^d + b`` in closed form, or None if ``c`` has another shape."""
    d = c.size - 1
    if d < 1 or np.any(c[1:-1] != 0):
        return None
    target = -c[0] / c[-1]
    if target == 0:
        return np.zeros(d, dtype=complex)
    r = abs(target) ** (1.0 / d)
    phase = np.angle(target)
    k = np.arange(d)
    return r * np.exp(1j * (phase + 2 * np.pi * k) / d)


def _residual_scale(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    # sum |a_k| |z|^k, the natural scale of rounding error in p(z)
    return np.polyval(np.abs(c[::-1]), np.abs(z))


def univariate_roots(coeffs: Sequence[complex], tol: float = 1e-12, max_iter: int = 500) -> np.ndarray:
    """All roots, with multiplicity, of ``sum coeffs[k] * u**k`` (ascending order)."""
    c = _trim(coeffs)
    d = c.size - 1
    if d < 1:
        raise ValueError("polynomial has degree 0")
    if c[-1] == 0:
        raise ValueError("leading coefficient is zero")
    fast = _binomial_roots(c)
    if fast is not None:
        return fast

    desc = c[::-1]
    ddesc = np.polyder(desc)
    # initial guesses on a circle of Cauchy-like radius, rotated off the axes
    mags = np.abs(desc[1:] / desc[0]) ** (1.0 / np.arange(1, d + 1))
    radius = max(np.max(mags), 1e-3)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
    done = np.zeros(d, dtype=bool)
    for _ in range(max_iter):
        p = np.polyval(desc, z)
        dp = np.polyval(ddesc, z)
        small = np.abs(p) <= tol * _residual_scale(c, z)
        done |= small
        if done.all():
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1 - ratio * s)
        w = np.where(done | ~np.isfinite(w), 0, w)
        z = z - w
    res = np.abs(np.polyval(desc, z)) / _residual_scale(c, z)
    worst = float(np.max(res))
    if not np.all(np.isfinite(z)) or worst > max(tol, 1e-10) * 1e3:
        raise RootFindingError(f"Aberth iteration did not converge (relative residual {worst:.3e})", worst)
    return z
