"""Benchmark system generators."""

from __future__ import annotations

from math import comb
from typing import Sequence

import numpy as np

from ugen.algebra.poly import MPoly, PolySystem, Ring


def gen_katsura(n: int) -> PolySystem:
    """Katsura-n in x0..xn with the reflection ``x_{-i} = x_i``.

    One linear equation ``x0 + 2 sum_{i>=1} x_i = 1`` followed by the n
    quadrics ``sum_{l=-n}^{n} x_|l| x_|m-l| = x_m`` for ``m = 0..n-1``.
    """
    if n < 2:
        raise ValueError("katsura needs n >= 2")
    ring = Ring.from_names([[f"x{i}" for i in range(n + 1)]])
    x = ring.gens()

    def xx(i):
        i = abs(i)
        return x[i] if i <= n else None

    eqs = [x[0] + 2 * sum(x[1:], MPoly(ring)) - 1]
    for m in range(n):
        acc = MPoly(ring)
        for l in range(-n, n + 1):
            a, b = xx(l), xx(m - l)
            if a is not None and b is not None:
                acc = acc + a * b
        eqs.append(acc - x[m])
    sys_ = PolySystem(ring, tuple(eqs))
    if len(sys_) != ring.nvars:
        raise AssertionError("katsura generator produced a non-square system")
    return sys_


def gen_cyclic(n: int) -> PolySystem:
    """Cyclic n-roots: degree-m cyclic sums for m = 1..n-1, then ``prod x_i - 1``."""
    if n < 3:
        raise ValueError("cyclic needs n >= 3")
    ring = Ring.from_names([[f"x{i}" for i in range(n)]])
    x = ring.gens()
    eqs = []
    for m in range(1, n):
        acc = MPoly(ring)
        for i in range(n):
            term = MPoly.constant(ring, 1.0)
            for j in range(m):
                term = term * x[(i + j) % n]
            acc = acc + term
        eqs.append(acc)
    prod = MPoly.constant(ring, 1.0)
    for xi in x:
        prod = prod * xi
    eqs.append(prod - 1)
    return PolySystem(ring, tuple(eqs))


def gen_banded_quadrics(n: int, k: int, seed: int = 0) -> PolySystem:
    """Homogeneous banded system on P^n (variables x0..xn).

    ``f_1`` is a random linear form; for ``i = 2..n``, ``f_i`` is a random
    quadratic form in the window ``x_i, ..., x_{(i+k) mod (n+1)}``.  Real and
    imaginary parts of every coefficient are uniform on [0, 1].
    """
    if not 2 <= k <= n:
        raise ValueError("banded quadrics need 2 <= k <= n")
    rng = np.random.default_rng(seed)
    ring = Ring.from_names([[f"x{i}" for i in range(n + 1)]])
    x = ring.gens()

    def draw(shape):
        return rng.random(shape) + 1j * rng.random(shape)

    eqs = [MPoly.linear(ring, draw(n + 1))]
    for i in range(2, n + 1):
        window = [(i + j) % (n + 1) for j in range(k + 1)]
        C = draw((k + 1, k + 1))
        f = MPoly(ring)
        for a, ia in enumerate(window):
            for b, ib in enumerate(window):
                f = f + complex(C[a, b]) * x[ia] * x[ib]
        eqs.append(f)
    return PolySystem(ring, tuple(eqs))


def homogenized(system: PolySystem, stems: Sequence[str] | None = None) -> PolySystem:
    """Add one homogenizing variable per group (appended to the group) and homogenize."""
    ring = system.ring
    stems = stems or (["h"] if ring.ngroups == 1 else [f"h{g}" for g in range(ring.ngroups)])
    names, groups = set(ring.variables), []
    hvars = []
    for g, stem in enumerate(stems):
        name = stem
        k = 0
        while name in names:
            name, k = f"{stem}{k}", k + 1
        names.add(name)
        hvars.append(name)
        groups.append(list(ring.group_names(g)) + [name])
    target = Ring.from_names(groups, hvars)
    return system.homogenize(target)


def _sym_index(r: int):
    """Upper-triangle (i <= j) index pairs of an r x r symmetric matrix."""
    return [(i, j) for i in range(r) for j in range(i, r)]


def gen_mle_symmetric(n: int, r: int, U: np.ndarray) -> PolySystem:
    """Critical equations of the symmetric rank-``r`` likelihood in local kernel form.

    Unknowns: symmetric ``P1`` (r x r, diagonal entries doubled), ``L1``
    ((n-r) x r) and symmetric ``Lam`` ((n-r) x (n-r)), in three variable groups
    in that order.  With ``B = [I_r; L1]`` the model matrix is
    ``M = B P1 B^T`` and the kernel block is ``K = C Lam C^T`` for
    ``C = [-L1^T; I]``, so ``M K = 0``.  Equations: the column sums and the
    strictly-upper entries of ``E = M ∘ K + N M - (U + I ∘ U)`` with
    ``N = sum_{i<=j} U_ij``; the (1, n) entry comes last.
    """
    U = np.asarray(U)
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    if U.shape != (n, n) or not np.array_equal(U, U.T):
        raise ValueError("U must be a symmetric n x n matrix")
    if np.any(U <= 0) or not np.issubdtype(U.dtype, np.integer):
        raise ValueError("U must have positive integer entries")
    s = n - r
    pn = [f"p{i}{j}" for i, j in _sym_index(r)]
    ln = [f"l{i}{j}" for i in range(s) for j in range(r)]
    mn = [f"m{i}{j}" for i, j in _sym_index(s)]
    groups = [g for g in (pn, ln, mn) if g]
    ring = Ring.from_names(groups)
    zero = MPoly(ring)

    def v(name):
        return MPoly.variable(ring, name)

    P1 = [[zero] * r for _ in range(r)]
    for i, j in _sym_index(r):
        p = v(f"p{i}{j}")
        if i == j:
            P1[i][i] = 2 * p
        else:
            P1[i][j] = P1[j][i] = p
    L1 = [[v(f"l{i}{j}") for j in range(r)] for i in range(s)]
    Lam = [[zero] * s for _ in range(s)]
    for i, j in _sym_index(s):
        Lam[i][j] = Lam[j][i] = v(f"m{i}{j}")

    def mat_mul(A, B):
        if not A or not B:
            return [[zero] * (len(B[0]) if B else 0) for _ in A]
        return [[sum((A[i][k] * B[k][j] for k in range(len(B))), zero) for j in range(len(B[0]))]
                for i in range(len(A))]

    def transpose(A):
        return [list(row) for row in zip(*A)] if A else []

    L1T = transpose(L1)
    top_right = mat_mul(P1, L1T) if s else []
    bottom_left = mat_mul(L1, P1)
    bottom_right = mat_mul(bottom_left, L1T) if s else []
    M = [[zero] * n for _ in range(n)]
    for i in range(r):
        for j in range(r):
            M[i][j] = P1[i][j]
        for j in range(s):
            M[i][r + j] = top_right[i][j]
    for i in range(s):
        for j in range(r):
            M[r + i][j] = bottom_left[i][j]
        for j in range(s):
            M[r + i][r + j] = bottom_right[i][j]
    K = [[zero] * n for _ in range(n)]
    if s:
        LamL1 = mat_mul(Lam, L1)
        L1TLamL1 = mat_mul(L1T, LamL1)
        for i in range(r):
            for j in range(r):
                K[i][j] = L1TLamL1[i][j]
            for j in range(s):
                K[i][r + j] = -LamL1[j][i]
        for i in range(s):
            for j in range(r):
                K[r + i][j] = -LamL1[i][j]
            for j in range(s):
                K[r + i][r + j] = Lam[i][j]
    N = int(sum(U[i, j] for i in range(n) for j in range(i, n)))
    E = [[M[i][j] * K[i][j] + N * M[i][j] - float(U[i, j] * (2 if i == j else 1)) for j in range(n)]
         for i in range(n)]
    eqs = [sum((E[i][j] for i in range(n)), zero) for j in range(n)]
    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if n > 1:
        upper.remove((0, n - 1))
        upper.append((0, n - 1))
    eqs += [E[i][j] for i, j in upper]
    system = PolySystem(ring, tuple(eqs))
    if len(system) != comb(n + 1, 2) or ring.nvars != comb(n + 1, 2):
        raise AssertionError("MLE generator produced a non-square system")
    if 0 < r < n and system[-1].multidegree() != (1, 2, 1):
        raise AssertionError("dropped MLE equation does not have degree (1, 2, 1)")
    return system
