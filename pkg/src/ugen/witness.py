"""Witness sets, start systems, slice moves, membership and witness collections."""

from __future__ import annotations

import itertools
import zlib
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from ugen.algebra.compiled import relative_residuals
from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.diagnostics import Diagnostics
from ugen.tracking.homotopy import Homotopy, place_on_charts, random_charts, random_sphere, random_unit_complex
from ugen.tracking.points import FiniteRule, MultiProjPoint, dedup_endpoints, pairwise_close
from ugen.tracking.tracker import PathStatus, TrackerSettings, track_batch

RESIDUAL_TOL = 1e-8
DEDUP_TOL = 1e-6


class WitnessError(RuntimeError):
    pass


class PathFailureWarning(UserWarning):
    pass


def rng_from(settings: TrackerSettings, rng: np.random.Generator | None, stream: str) -> np.random.Generator:
    """``rng`` if given, else a generator seeded by ``settings.seed`` and the operation name.

    Keying on the name keeps separate calls with the same seed from drawing
    identical linears (a reused slice would make a start system degenerate).
    """
    if rng is not None:
        return rng
    return np.random.default_rng([settings.seed, zlib.crc32(stream.encode())])


def random_linear(ring: Ring, rng: np.random.Generator, group: int = 0) -> MPoly:
    """A linear form in the variables of one group, coefficients on the unit sphere."""
    g = ring.groups[group]
    return MPoly.linear(ring, random_sphere(rng, len(g)), g)


def linear_group(p: MPoly) -> int:
    """The unique group a homogeneous linear form lives in."""
    groups = {p.ring.group_of(i) for i in p.support()}
    if len(groups) != 1 or p.degree != 1 or not p.is_homogeneous():
        raise ValueError("expected a homogeneous linear form in a single group")
    return groups.pop()


def finite_rules(ring: Ring) -> list[FiniteRule]:
    """Finiteness means every designated homogenizing coordinate is nonzero."""
    return [FiniteRule(g, h, False) for g, h in enumerate(ring.homogenizing) if h is not None]


def ambient_dims(ring: Ring) -> tuple[int, ...]:
    return tuple(len(g) - 1 for g in ring.groups)


def _points_array(points: Sequence[MultiProjPoint], nvars: int) -> np.ndarray:
    if not points:
        return np.zeros((0, nvars), dtype=complex)
    return np.stack([p.coords for p in points])


def check_points(polys: Sequence[MPoly], points: Sequence[MultiProjPoint], ring: Ring,
                 tol: float = RESIDUAL_TOL) -> np.ndarray:
    """Largest relative residual per point (normalized coordinates)."""
    if not polys or not points:
        return np.zeros(len(points))
    X = _points_array([p.normalize() for p in points], ring.nvars)
    return relative_residuals(polys, X, ring.nvars).max(axis=1)


@dataclass(frozen=True, eq=False)
class WitnessSet:
    """``(F, L, W)``: equations, slice linears, and the slice's points on the variety."""

    ring: Ring
    F: tuple[MPoly, ...]
    L: tuple[MPoly, ...]
    W: tuple[MultiProjPoint, ...]
    dim: int
    warnings: tuple[str, ...] = ()
    diagnostics: tuple[Diagnostics, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("F", "L", "W", "warnings", "diagnostics"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.L) != self.dim:
            raise ValueError(f"slice has {len(self.L)} linears but dim = {self.dim}")
        for p in self.F + self.L:
            if p.ring != self.ring:
                raise ValueError("equations and slice must share the ambient ring")
        W = tuple(p.normalize() for p in self.W)
        object.__setattr__(self, "W", W)
        res = check_points(self.F + self.L, W, self.ring)
        if np.any(res > RESIDUAL_TOL):
            raise ValueError(f"witness point residual {float(res.max()):.2e} exceeds {RESIDUAL_TOL}")
        if len(W) > 1:
            close = pairwise_close(list(W), list(W), DEDUP_TOL)
            if np.triu(close, 1).any():
                raise ValueError("witness points contain duplicates")

    @property
    def degree(self) -> int:
        return len(self.W)

    @property
    def system(self) -> PolySystem:
        return PolySystem(self.ring, self.F)

    def to_dict(self) -> dict:
        from ugen.io import witness_to_dict

        return witness_to_dict(self)


@dataclass(frozen=True)
class WitnessCollection:
    """Witness point sets indexed by slice type ``(a_1, ..., a_k)``, ``sum a_i = dim``."""

    ring: Ring
    F: tuple[MPoly, ...]
    dim: int
    sets: Mapping[tuple[int, ...], WitnessSet]

    def __post_init__(self):
        dims = ambient_dims(self.ring)
        for a, w in self.sets.items():
            if len(a) != self.ring.ngroups or sum(a) != self.dim:
                raise ValueError(f"invalid slice type {a}")
            if any(ai > n for ai, n in zip(a, dims)):
                raise ValueError(f"slice type {a} exceeds a factor's dimension")
            if w.dim != self.dim:
                raise ValueError("entry dimension mismatch")
            if sorted(linear_group(l) for l in w.L) != sorted(g for g, k in enumerate(a) for _ in range(k)):
                raise ValueError(f"slice linears of entry {a} do not match its type")

    def __getitem__(self, a: tuple[int, ...]) -> WitnessSet:
        try:
            return self.sets[tuple(a)]
        except KeyError:
            raise KeyError(f"witness collection has no entry w_{tuple(a)}") from None

    def degrees(self) -> dict[tuple[int, ...], int]:
        return {a: len(w.W) for a, w in self.sets.items()}


def slice_types(ring: Ring, dim: int) -> list[tuple[int, ...]]:
    """All multi-indices with ``sum = dim`` and ``a_i <= dim of factor i``, lexicographically descending."""
    dims = ambient_dims(ring)
    out = [a for a in itertools.product(*(range(n + 1) for n in dims)) if sum(a) == dim]
    return sorted(out, reverse=True)


# start systems ---------------------------------------------------------------


def _total_degree_start(ring: Ring, polys: Sequence[MPoly], charts, rng):
    """``z_i^{d_i} - c_i z_h^{d_i}`` for a single projective factor."""
    (group,) = ring.groups
    h = ring.homogenizing[0] if ring.homogenizing[0] is not None else group[-1]
    others = [i for i in group if i != h]
    degs = [p.degree for p in polys]
    zh = MPoly.variable(ring, h)
    c = [random_unit_complex(rng) for _ in polys]
    start = [MPoly.variable(ring, v) ** d - ci * zh ** d for v, d, ci in zip(others, degs, c)]
    roots = []
    for d, ci in zip(degs, c):
        roots.append(ci ** (1.0 / d) * np.exp(2j * np.pi * np.arange(d) / d))
    points = []
    for combo in itertools.product(*roots):
        x = np.zeros(ring.nvars, dtype=complex)
        x[h] = 1.0
        x[others] = combo
        points.append(place_on_charts(x, ring, charts))
    return start, points


def _linear_product_start(ring: Ring, polys: Sequence[MPoly], charts, rng):
    """Products of random group-linear factors matching each multidegree.

    Start solutions pick one factor per equation so that group ``g`` receives
    exactly ``dim P^{n_g}`` factors; each group's point is then the kernel of
    its chosen linears.
    """
    dims = ambient_dims(ring)
    factors = []  # factors[i] = list of (group, coefficient vector)
    start, mats = [], []
    for p in polys:
        md = p.multidegree()
        fs, prod = [], MPoly.constant(ring, 1.0)
        for g, d in enumerate(md):
            for _ in range(d):
                coef = random_sphere(rng, len(ring.groups[g]))
                fs.append((g, coef))
                prod = prod * MPoly.linear(ring, coef, ring.groups[g])
        factors.append(fs)
        start.append(prod)
        A = np.zeros((len(fs), ring.nvars), dtype=complex)
        for k, (g, coef) in enumerate(fs):
            A[k, list(ring.groups[g])] = coef
        mats.append(A)
    points = []
    choice: list[tuple[int, np.ndarray]] = []

    def recurse(i, remaining):
        if i == len(polys):
            x = np.zeros(ring.nvars, dtype=complex)
            for g, members in enumerate(ring.groups):
                rows = np.array([c for gg, c in choice if gg == g]).reshape(-1, len(members))
                ns = scipy.linalg.null_space(rows)
                x[list(members)] = ns[:, 0]
            points.append(place_on_charts(x, ring, charts))
            return
        for g, coef in factors[i]:
            if remaining[g] > 0:
                remaining[g] -= 1
                choice.append((g, coef))
                recurse(i + 1, remaining)
                choice.pop()
                remaining[g] += 1

    recurse(0, list(dims))
    return start, points, mats


def start_system(ring: Ring, polys: Sequence[MPoly], charts, rng):
    """(start polynomials, start points, factor matrices or None)."""
    if ring.ngroups == 1:
        return (*_total_degree_start(ring, polys, charts, rng), None)
    return _linear_product_start(ring, polys, charts, rng)


def solve_square(F: PolySystem | Sequence[MPoly], settings: TrackerSettings = TrackerSettings(), *,
                 rng: np.random.Generator | None = None, ring: Ring | None = None,
                 rules: Sequence[FiniteRule] | None = None, label: str = "total-degree"):
    """Solve a square system on a product of projective spaces.

    Returns (finite deduplicated endpoints, diagnostics).
    """
    rng = rng_from(settings, rng, "solve")
    polys = list(F)
    ring = ring or (F.ring if isinstance(F, PolySystem) else polys[0].ring)
    if len(polys) + ring.ngroups != ring.nvars:
        raise ValueError(f"system is not square: {len(polys)} equations, {ring.nvars} variables, "
                         f"{ring.ngroups} factors")
    for g, d in enumerate(ambient_dims(ring)):
        if d < 0:
            raise ValueError(f"factor {g} is empty")
    charts = random_charts(ring, rng)
    start, starts, mats = start_system(ring, polys, charts, rng)
    gamma = random_unit_complex(rng)
    H = Homotopy(ring, start, polys, gamma, charts=charts, start_factors=mats)
    rules = finite_rules(ring) if rules is None else rules
    results = track_batch(H, starts, settings, rules=rules)
    good = [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
    reps, sizes = dedup_endpoints(good, DEDUP_TOL)
    return reps, Diagnostics.from_results(label, results, sizes)


def total_degree_solve(F: PolySystem, charts=None, settings: TrackerSettings = TrackerSettings(), *,
                       rng: np.random.Generator | None = None) -> list[MultiProjPoint]:
    """Finite solutions of a square system by a total-degree (or linear-product) homotopy.

    ``charts`` is accepted for interface symmetry; random charts are always drawn
    from ``rng`` so runs are reproducible from the seed alone.
    """
    points, _ = solve_square(F, settings, rng=rng)
    return points


# witness sets ----------------------------------------------------------------


def witness_set(F: PolySystem, slice_groups: Sequence[int], settings: TrackerSettings = TrackerSettings(), *,
                rng: np.random.Generator | None = None, require_points: bool = True) -> WitnessSet:
    """Witness set for the pure ``len(slice_groups)``-dimensional part of ``V(F)``.

    One random linear is drawn per entry of ``slice_groups`` in that group.
    """
    rng = rng_from(settings, rng, "witness")
    ring = F.ring
    L = [random_linear(ring, rng, g) for g in slice_groups]
    points, diag = solve_square(list(F) + L, settings, rng=rng, ring=ring, label="witness")
    if require_points and not points:
        raise WitnessError("no witness points survived; is the variety of the assumed dimension?")
    warn = _failure_warnings(diag)
    return WitnessSet(ring, tuple(F), tuple(L), tuple(points), len(L), warn, (diag,))


def witness_curve(F: PolySystem, settings: TrackerSettings = TrackerSettings(), *, group: int = 0,
                  rng: np.random.Generator | None = None) -> WitnessSet:
    return witness_set(F, [group], settings, rng=rng)


def _failure_warnings(diag: Diagnostics) -> tuple[str, ...]:
    if diag.failures:
        return (f"{diag.label}: {diag.failures} of {diag.paths} paths failed",)
    return ()


def move_slice(w: WitnessSet, L_new: Sequence[MPoly], settings: TrackerSettings = TrackerSettings(), *,
               rng: np.random.Generator | None = None) -> WitnessSet:
    """Track ``W`` while the slice moves from ``w.L`` to ``L_new``."""
    L_new = list(L_new)
    if len(L_new) != len(w.L):
        raise ValueError("new slice must have as many linears as the old one")
    if list(L_new) == list(w.L):
        return w
    rng = rng_from(settings, rng, "move-slice")
    charts = random_charts(w.ring, rng)
    H = Homotopy(w.ring, w.L, L_new, random_unit_complex(rng), fixed=w.F, charts=charts)
    starts = [place_on_charts(p.coords, w.ring, charts) for p in w.W]
    results = track_batch(H, starts, settings)
    good = [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
    reps, sizes = dedup_endpoints(good, DEDUP_TOL)
    diag = Diagnostics.from_results("move-slice", results, sizes)
    warn = w.warnings
    if len(reps) != len(w.W):
        msg = f"slice move lost {len(w.W) - len(reps)} of {len(w.W)} witness points"
        warnings.warn(msg, PathFailureWarning, stacklevel=2)
        warn = warn + (msg,)
    return WitnessSet(w.ring, w.F, tuple(L_new), tuple(reps), w.dim, warn, (diag,))


def slice_through(L: Sequence[MPoly], p: MultiProjPoint, rng: np.random.Generator) -> list[MPoly]:
    """Random linears of the same groups as ``L``, each corrected by a rank-one term to vanish at ``p``."""
    out = []
    ring = L[0].ring
    for lin in L:
        g = linear_group(lin)
        idx = list(ring.groups[g])
        c = random_sphere(rng, len(idx))
        pg = p.coords[idx]
        c = c - (c @ pg) * pg.conj() / np.vdot(pg, pg).real
        out.append(MPoly.linear(ring, c, idx))
    return out


def membership(w: WitnessSet, p: MultiProjPoint, settings: TrackerSettings = TrackerSettings(), *,
               rng: np.random.Generator | None = None, tol: float = DEDUP_TOL) -> bool:
    """Does ``p`` lie on the variety represented by ``w``?"""
    if w.F and check_points(w.F, [p], w.ring).max() > 1e-6:
        return False
    if w.dim == 0:
        return bool(pairwise_close([p], list(w.W), tol).any())
    rng = rng_from(settings, rng, "membership")
    L_new = slice_through(w.L, p, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PathFailureWarning)
        moved = move_slice(w, L_new, settings, rng=rng)
    return bool(pairwise_close([p], list(moved.W), tol).any())


def witness_collection(F: PolySystem, dim: int, settings: TrackerSettings = TrackerSettings(), *,
                       rng: np.random.Generator | None = None) -> WitnessCollection:
    """Witness point sets for every admissible slice type of a pure ``dim``-dimensional ``V(F)``.

    One list of linears is drawn per group and entry ``a`` uses the first
    ``a_g`` of group ``g``, so entries differing in one index share all
    other slices (intersection with a hypersurface relies on this).
    """
    rng = rng_from(settings, rng, "witness-collection")
    ring = F.ring
    pool = [[random_linear(ring, rng, g) for _ in range(min(dim, n))] for g, n in enumerate(ambient_dims(ring))]
    sets = {}
    for a in slice_types(ring, dim):
        L = [pool[g][j] for g, k in enumerate(a) for j in range(k)]
        points, diag = solve_square(list(F) + L, settings, rng=rng, ring=ring, label=f"witness{a}")
        sets[a] = WitnessSet(ring, tuple(F), tuple(L), tuple(points), dim, _failure_warnings(diag), (diag,))
    return WitnessCollection(ring, tuple(F), dim, sets)
