"""Predictor-corrector path tracking, vectorized over a batch of paths.

Every path carries its own ``t`` and step size; one loop iteration advances
all still-active paths by one attempted step.  Predictor: classical RK4 on
``dx/dt = -H_x^{-1} H_t``.  Corrector: plain Newton at the new ``t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ugen.tracking.points import FiniteRule, MultiProjPoint, classify_endpoint


class PathStatus(str, enum.Enum):
    SUCCESS = "Success"
    AT_INFINITY = "AtInfinity"
    MIN_STEP_FAILURE = "MinStepFailure"
    MAX_STEPS_EXCEEDED = "MaxStepsExceeded"
    SINGULAR = "Singular"
    START_FAILURE = "StartFailure"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TrackerSettings:
    initial_step: float = 0.01
    max_step: float = 0.1
    min_step: float = 1e-8
    max_corrector_iters: int = 3
    corrector_tol: float = 1e-7
    max_steps: int = 20000
    infinity_threshold: float = 1e-6
    endpoint_refine_tol: float = 1e-10
    endpoint_refine_iters: int = 8
    singular_condition: float = 1e10
    affine_bound: float = 1e8
    # near the end a step is only "too small" if it is also tiny next to the distance left
    min_step_fraction: float = 1e-3
    arrival_gap: float = 1e-14
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.min_step <= self.initial_step < 1:
            raise ValueError("need 0 < min_step <= initial_step < 1")
        if self.max_step < self.initial_step:
            raise ValueError("max_step must be at least initial_step")
        if self.max_corrector_iters < 1:
            raise ValueError("max_corrector_iters must be >= 1")
        if self.corrector_tol <= 0 or self.endpoint_refine_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def with_(self, **changes) -> "TrackerSettings":
        return replace(self, **changes)

    @classmethod
    def for_mle(cls, **changes) -> "TrackerSettings":
        return cls(**{"min_step": 1e-14, "max_corrector_iters": 2, **changes})


@dataclass
class PathResult:
    index: int
    status: PathStatus
    x: np.ndarray
    endpoint: MultiProjPoint | None
    t_reached: float
    steps_taken: int
    final_residual: float
    final_condition_estimate: float
    infinite_factors: tuple[int, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.status is PathStatus.SUCCESS


def solve_batch(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A[k] y[k] = b[k]; singular systems give NaN rows instead of raising."""
    try:
        return np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(b.shape, np.nan, dtype=complex)
        for k in range(A.shape[0]):
            try:
                out[k] = np.linalg.solve(A[k], b[k])
            except np.linalg.LinAlgError:
                pass
        return out


def _rel_norm(dx: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(dx, axis=1) / (1.0 + np.linalg.norm(x, axis=1))


def row_scaled_condition(J: np.ndarray) -> np.ndarray:
    scale = np.linalg.norm(J, axis=2, keepdims=True)
    scale[scale == 0] = 1.0
    with np.errstate(all="ignore"):
        c = np.linalg.cond(J / scale)
    return np.where(np.isfinite(c), c, np.inf)


def newton_batch(H, X: np.ndarray, t: np.ndarray, iters: int, tol: float):
    """Newton at fixed ``t``; returns (X, converged mask, last relative step)."""
    X = np.array(X, dtype=complex)
    last = np.full(X.shape[0], np.inf)
    done = np.zeros(X.shape[0], dtype=bool)
    for _ in range(iters):
        todo = ~done
        if not todo.any():
            break
        val, jac, _ = H.evaluate(X[todo], t[todo])
        dx = solve_batch(jac, -val)
        Xn = X[todo] + dx
        step = _rel_norm(dx, Xn)
        step = np.where(np.isfinite(step), step, np.inf)
        ok = np.isfinite(step)
        X[np.flatnonzero(todo)[ok]] = Xn[ok]
        last[todo] = step
        done[todo] = step <= tol
    return X, done, last


def _velocity(H, X, t):
    _, Hx, Ht = H.evaluate(X, t)
    return solve_batch(Hx, -Ht)


def _advance(H, X, t0, t1, s: TrackerSettings, on_accept=None):
    """Track rows of X from t0 to t1 (per-row arrays). Returns (X, t, status, steps)."""
    B = X.shape[0]
    X = np.array(X, dtype=complex)
    t = np.array(t0, dtype=float)
    t1 = np.broadcast_to(np.asarray(t1, dtype=float), (B,)).copy()
    h = np.full(B, s.initial_step)
    streak = np.zeros(B, dtype=int)
    steps = np.zeros(B, dtype=int)
    status = np.full(B, None, dtype=object)
    active = t < t1
    while active.any():
        idx = np.flatnonzero(active)
        x, tt = X[idx], t[idx]
        hh = np.minimum(h[idx], t1[idx] - tt)
        with np.errstate(all="ignore"):
            k1 = _velocity(H, x, tt)
            k2 = _velocity(H, x + (hh / 2)[:, None] * k1, tt + hh / 2)
            k3 = _velocity(H, x + (hh / 2)[:, None] * k2, tt + hh / 2)
            k4 = _velocity(H, x + hh[:, None] * k3, tt + hh)
            xp = x + (hh / 6)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)
            tn = tt + hh
            good = np.all(np.isfinite(xp), axis=1)
            xp[~good] = x[~good]
            prev = np.full(len(idx), np.inf)
            conv = np.zeros(len(idx), dtype=bool)
            contracting = np.ones(len(idx), dtype=bool)
            for _ in range(s.max_corrector_iters):
                todo = good & ~conv
                if not todo.any():
                    break
                val, jac, _ = H.evaluate(xp[todo], tn[todo])
                dx = solve_batch(jac, -val)
                xn = xp[todo] + dx
                step = _rel_norm(dx, xn)
                step = np.where(np.isfinite(step), step, np.inf)
                ti = np.flatnonzero(todo)
                finite = np.isfinite(step)
                xp[ti[finite]] = xn[finite]
                good[ti[~finite]] = False
                contracting[ti] &= (step <= 0.5 * prev[ti]) | (step <= s.corrector_tol)
                prev[ti] = step
                conv[ti] = step <= s.corrector_tol
        accept = good & conv & contracting
        if s.affine_bound:
            accept &= np.linalg.norm(xp, axis=1) <= s.affine_bound
        acc, rej = idx[accept], idx[~accept]
        X[acc] = xp[accept]
        t[acc] = np.where(t1[acc] - tn[accept] < 1e-15, t1[acc], tn[accept])
        if on_accept is not None and len(acc):
            on_accept(acc, X[acc].copy(), t[acc].copy())
        streak[acc] += 1
        grow = acc[streak[acc] >= 4]
        h[grow] = np.minimum(2 * h[grow], s.max_step)
        streak[grow] = 0
        h[rej] /= 2
        streak[rej] = 0
        steps[idx] += 1
        close = idx[t1[idx] - t[idx] < s.arrival_gap]
        t[close] = t1[close]
        floor = np.minimum(s.min_step, s.min_step_fraction * (t1[idx] - t[idx]))
        status[idx[(h[idx] < floor) & ~accept & (t[idx] < t1[idx])]] = PathStatus.MIN_STEP_FAILURE
        status[idx[(steps[idx] >= s.max_steps) & (t[idx] < t1[idx])]] = PathStatus.MAX_STEPS_EXCEEDED
        active = (t < t1) & (status == None)  # noqa: E711
    return X, t, status, steps


def _as_array(starts, nvars: int) -> np.ndarray:
    if isinstance(starts, np.ndarray):
        X = np.array(starts, dtype=complex)
    else:
        starts = list(starts)
        if not starts:
            return np.zeros((0, nvars), dtype=complex)
        X = np.stack([np.asarray(p.coords if isinstance(p, MultiProjPoint) else p, dtype=complex) for p in starts])
    X = X.reshape(-1, nvars) if X.size else np.zeros((0, nvars), dtype=complex)
    return X


def track_batch(H, starts, settings: TrackerSettings = TrackerSettings(), *, t_start: float = 0.0,
                t_end: float = 1.0, groups: Sequence[Sequence[int]] | None = None,
                rules: Sequence[FiniteRule] = (), refine: bool = True, polish_start: bool = True,
                on_accept=None) -> list[PathResult]:
    """Track every start point of ``starts`` from ``t_start`` to ``t_end``.

    ``groups`` lists the coordinate indices of each projective factor (defaults
    to the homotopy ring's groups) and ``rules`` decide which endpoints are
    finite.  Results come back in start order.  ``on_accept(rows, X, t)``, if
    given, sees every accepted predictor-corrector step; ``rows`` index the
    successfully polished starts.
    """
    s = settings
    n = H.nvars
    X = _as_array(starts, n)
    B = X.shape[0]
    if B == 0:
        return []
    if groups is None:
        groups = H.ring.groups if hasattr(H, "ring") else (tuple(range(n)),)
    tvec = np.full(B, float(t_start))

    start_ok = np.ones(B, dtype=bool)
    if polish_start:
        X, start_ok, _ = newton_batch(H, X, tvec, max(3, s.max_corrector_iters), s.corrector_tol)
    Xs, ts, status, steps = _advance(H, X[start_ok], tvec[start_ok], t_end, s, on_accept)
    Xall = np.array(X)
    tall = np.array(tvec)
    stall = np.full(B, None, dtype=object)
    stepall = np.zeros(B, dtype=int)
    stall[~start_ok] = PathStatus.START_FAILURE
    Xall[start_ok], tall[start_ok], stall[start_ok], stepall[start_ok] = Xs, ts, status, steps

    residual = np.full(B, np.nan)
    cond = np.full(B, np.nan)
    arrived = stall == None  # noqa: E711
    if arrived.any():
        te = np.full(int(arrived.sum()), float(t_end))
        Xa = Xall[arrived]
        if refine:
            Xr, conv, last = newton_batch(H, Xa, te, s.endpoint_refine_iters, s.endpoint_refine_tol)
        else:
            Xr, conv = Xa, np.ones(len(Xa), dtype=bool)
            last = np.zeros(len(Xa))
        _, jac, _ = H.evaluate(np.nan_to_num(Xr), te)
        c = row_scaled_condition(jac)
        singular = (c > s.singular_condition) | ~conv | ~np.all(np.isfinite(Xr), axis=1)
        Xr[singular] = Xa[singular]
        Xall[arrived] = Xr
        ai = np.flatnonzero(arrived)
        for k, sing in zip(ai, singular):
            stall[k] = PathStatus.SINGULAR if sing else PathStatus.SUCCESS
        residual[ai] = last
        cond[ai] = c

    results = []
    for k in range(B):
        x = Xall[k]
        st = stall[k]
        endpoint = None
        bad: tuple[int, ...] = ()
        if np.all(np.isfinite(x)) and all(np.any(x[list(g)] != 0) for g in groups):
            endpoint = MultiProjPoint(x, groups).normalize()
            if st in (PathStatus.SUCCESS, PathStatus.SINGULAR) and rules:
                verdict = classify_endpoint(endpoint, rules, s.infinity_threshold)
                if not verdict.finite:
                    st = PathStatus.AT_INFINITY
                    bad = verdict.infinite_factors
        results.append(PathResult(k, st, x, endpoint, float(tall[k]), int(stepall[k]),
                                  float(residual[k]), float(cond[k]), bad))
    return results


def track_path(H, x0, settings: TrackerSettings = TrackerSettings(), **kwargs) -> PathResult:
    return track_batch(H, [x0], settings, **kwargs)[0]
