"""u-generation in projective space: start points on the cone, hypersurface
intersection, optional elimination of ``u``, and the equation-by-equation cascade.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ugen.algebra.compiled import relative_residuals
from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.algebra.univariate import RootFindingError, univariate_roots
from ugen.diagnostics import Diagnostics
from ugen.tracking.homotopy import (Homotopy, eliminate_by_row, eliminate_by_rows, make_straight_line,
                                    place_on_charts, random_charts, random_unit_complex)
from ugen.tracking.points import FiniteRule, MultiProjPoint, classify_endpoint, dedup_endpoints
from ugen.tracking.tracker import PathResult, PathStatus, TrackerSettings, track_batch
from ugen.witness import (DEDUP_TOL, RESIDUAL_TOL, WitnessError, WitnessSet, finite_rules, membership,
                          random_linear, rng_from)


class Elimination(str, enum.Enum):
    CHART = "chart"
    HOMOTOPY = "homotopy"


@dataclass(frozen=True)
class UGenConfig:
    gamma: complex | None = None  # None: drawn from the run's RNG
    ell0: MPoly | None = None  # None: a random linear form in x
    g0_gamma: complex | None = None  # scalar in front of u^d - ell0^d; None: random
    eliminate_u: bool = False
    elimination: Elimination = Elimination.HOMOTOPY
    t_star: float = 0.1
    settings: TrackerSettings = field(default_factory=TrackerSettings)

    def __post_init__(self):
        if self.gamma is not None and abs(abs(self.gamma) - 1) > 1e-12:
            raise ValueError("gamma must lie on the unit circle")
        if self.eliminate_u and not 0 < self.t_star < 1:
            raise ValueError("t_star must lie in (0, 1)")
        if self.g0_gamma is not None and self.g0_gamma == 0:
            raise ValueError("g0_gamma must be nonzero")


def cone_ring(ring: Ring, stems: Sequence[str] | None = None) -> tuple[Ring, list[int]]:
    """Prepend one new variable to every group; returns the ring and the new indices."""
    stems = stems or (["u"] if ring.ngroups == 1 else [f"u{g}" for g in range(ring.ngroups)])
    taken = set(ring.variables)
    names = []
    for s in stems:
        name = s
        k = 0
        while name in taken:
            name = f"{s}_{k}"
            k += 1
        taken.add(name)
        names.append(name)
    groups = [[c] + list(ring.group_names(g)) for g, c in enumerate(names)]
    hom = [None if h is None else ring.variables[h] for h in ring.homogenizing]
    new = Ring.from_names(groups, hom)
    return new, [new.index(c) for c in names]


def make_g0(d: int, ell0: MPoly, gamma: complex, u: MPoly) -> MPoly:
    """``gamma * (u^d - ell0^d)`` with ``u`` and ``ell0`` in the same ring."""
    if d < 1:
        raise ValueError("g0 needs degree at least 1")
    return gamma * (u ** d - ell0 ** d)


def _g0_roots(g0: MPoly, u_index: int, x: np.ndarray) -> np.ndarray:
    """Roots in ``u`` of ``g0`` with every other coordinate fixed to ``x``."""
    assign = {j: x[j] for j in range(g0.ring.nvars) if j != u_index}
    return univariate_roots(g0.specialize(assign).univariate_coefficients(u_index))


def u_start_points(w: WitnessSet, g0: MPoly, u_index: int) -> WitnessSet:
    """Lift each witness point ``x*`` of a curve to the roots ``[u:x*]`` of ``g0(u, x*)``."""
    if w.dim != 1:
        raise ValueError("u_start_points needs a curve witness set")
    ring = g0.ring
    d = g0.degree
    keep = [j for j in range(ring.nvars) if j != u_index]
    points = []
    for k, p in enumerate(w.W):
        x = np.zeros(ring.nvars, dtype=complex)
        x[keep] = p.coords
        try:
            roots = _g0_roots(g0, u_index, x)
        except (RootFindingError, ValueError) as exc:
            raise RootFindingError(f"g0 roots failed at witness point {k} ({p!r}): {exc}") from exc
        if len(roots) != d:
            raise RootFindingError(f"g0 drops degree at witness point {k} ({p!r})")
        for r in roots:
            y = x.copy()
            y[u_index] = r
            points.append(MultiProjPoint(y, ring.groups))
    F = tuple(f.recast(ring) for f in w.F) + (g0,)
    L = tuple(l.recast(ring) for l in w.L)
    return WitnessSet(ring, F, L, tuple(points), 1)


@dataclass
class IntersectionResult:
    """``sets`` holds the nonempty ones among ``contained`` (``w^(r)``) and ``lower`` (``w^(r-1)``)."""

    sets: list[WitnessSet]
    diagnostics: Diagnostics
    warnings: list[str] = field(default_factory=list)
    contained: WitnessSet | None = None
    lower: WitnessSet | None = None
    preparation: Diagnostics | None = None  # regeneration only


def split_by_hypersurface(w: WitnessSet, g1: MPoly, tol: float = RESIDUAL_TOL):
    """Witness points on ``V(g1)`` and off it, by relative residual."""
    if not w.W:
        return [], []
    X = np.stack([p.coords for p in w.W])
    res = relative_residuals([g1], X, w.ring.nvars)[:, 0]
    inside = [p for p, r in zip(w.W, res) if r <= tol]
    outside = [p for p, r in zip(w.W, res) if r > tol]
    return inside, outside


def track_with_elimination(H: Homotopy, starts, settings: TrackerSettings, *, var: int | Sequence[int],
                           row: int | Sequence[int], t_star: float, groups, rules, t_start: float = 0.0
                           ) -> list[PathResult]:
    """Track on ``H`` up to ``t_star``, then on ``H`` with ``var`` eliminated through ``row``.

    ``var`` and ``row`` may be parallel lists to eliminate several variables.
    """
    if t_star <= t_start:
        raise ValueError("elimination must activate after the start of tracking")
    variables = [var] if isinstance(var, (int, np.integer)) else list(var)
    rows = [row] if isinstance(row, (int, np.integer)) else list(row)
    first = track_batch(H, starts, settings, t_start=t_start, t_end=t_star, groups=groups, refine=False)
    alive = [r for r in first if r.status is PathStatus.SUCCESS]
    R = eliminate_by_rows(H, variables, rows, t_min=t_star)
    reduced_groups = _drop_index_groups(groups, variables)
    Y = np.stack([R.reduce(r.x[None, :])[0] for r in alive]) if alive else np.zeros((0, R.nvars))
    second = track_batch(R, Y, settings, t_start=t_star, t_end=1.0, groups=reduced_groups, polish_start=False)
    out = list(first)
    for r, s in zip(alive, second):
        x = R.lift(np.nan_to_num(s.x)[None, :], np.array([max(s.t_reached, t_star)]))[0]
        endpoint = None
        if np.all(np.isfinite(x)) and all(np.any(x[list(g)] != 0) for g in groups):
            endpoint = MultiProjPoint(x, groups).normalize()
        status = s.status
        bad = ()
        if status in (PathStatus.SUCCESS, PathStatus.SINGULAR) and endpoint is not None and rules:
            verdict = classify_endpoint(endpoint, rules, settings.infinity_threshold)
            if not verdict.finite:
                status, bad = PathStatus.AT_INFINITY, verdict.infinite_factors
        out[r.index] = PathResult(r.index, status, x, endpoint, s.t_reached, r.steps_taken + s.steps_taken,
                                  s.final_residual, s.final_condition_estimate, bad)
    return out


def _drop_index_groups(groups, variables):
    gone = sorted(variables)
    out = []
    for g in groups:
        members = [i - sum(v < i for v in gone) for i in g if i not in gone]
        if members:
            out.append(tuple(members))
    return tuple(out)


def intersect_hypersurface(w: WitnessSet, g1: MPoly, cfg: UGenConfig = UGenConfig(), *,
                           rng: np.random.Generator | None = None) -> IntersectionResult:
    """Witness sets for the equidimensional pieces of ``X ∩ V(g1)`` by u-generation."""
    ring = w.ring
    if ring.ngroups != 1:
        raise ValueError("projective u-generation needs a single variable group")
    if g1.ring != ring:
        raise ValueError("g1 must live in the witness set's ring")
    if not g1.is_homogeneous() or g1.degree < 1:
        raise ValueError("g1 must be homogeneous of positive degree")
    s = cfg.settings
    rng = rng_from(s, rng, "intersect")
    inside, outside = split_by_hypersurface(w, g1)
    sets = []
    contained = None
    if inside:
        contained = WitnessSet(ring, w.F, w.L, tuple(inside), w.dim)
        sets.append(contained)
    d = g1.degree
    diag = Diagnostics("u-generation", extra={"contained": len(inside)})
    lower = None
    if w.dim >= 1 and outside:
        ell = w.L[-1]
        F_Z = w.F + w.L[:-1]
        wz = WitnessSet(ring, F_Z, (ell,), tuple(outside), 1)
        lower, diag, warns = _ugen_curve(wz, g1, cfg, rng)
        if lower is not None:
            lower = WitnessSet(ring, w.F + (g1,), w.L[:-1], lower.W, w.dim - 1, tuple(warns), (diag,))
            sets.append(lower)
    else:
        warns = []
    return IntersectionResult(sets, diag, list(warns), contained, lower)


def _ugen_curve(wz: WitnessSet, g1: MPoly, cfg: UGenConfig, rng):
    """Intersection core on a curve witness set; returns (projected points set, diagnostics, warnings)."""
    ring = wz.ring
    s = cfg.settings
    cring, (ui,) = cone_ring(ring)
    u = MPoly.variable(cring, ui)
    d = g1.degree
    gamma0 = random_unit_complex(rng)
    if cfg.g0_gamma is not None:
        gamma0 = complex(cfg.g0_gamma)
    ell0 = cfg.ell0.recast(cring) if cfg.ell0 is not None else random_linear(ring, rng).recast(cring)
    g0 = make_g0(d, ell0, gamma0, u)
    gamma = cfg.gamma if cfg.gamma is not None else random_unit_complex(rng)
    w0 = u_start_points(wz, g0, ui)
    charts = random_charts(cring, rng)
    F_c = [f.recast(cring) for f in wz.F]
    ell = wz.L[0].recast(cring)
    H = make_straight_line(PolySystem(cring, (g0, ell)), PolySystem(cring, (g1.recast(cring), u)), gamma,
                           charts=charts, fixed=F_c)
    starts = [place_on_charts(p.coords, cring, charts) for p in w0.W]
    rules = [FiniteRule(0, ui, True)] + finite_rules(cring)
    if cfg.eliminate_u:
        row = H.nrows - 1 if cfg.elimination is Elimination.HOMOTOPY else len(F_c)
        results = track_with_elimination(H, starts, s, var=ui, row=row, t_star=cfg.t_star,
                                         groups=cring.groups, rules=rules)
    else:
        results = track_batch(H, starts, s, rules=rules)
    good = [r.endpoint.drop([ui]) for r in results if r.status is PathStatus.SUCCESS]
    reps, sizes = dedup_endpoints(good, DEDUP_TOL)
    diag = Diagnostics.from_results("u-generation", results, sizes, eliminated=cfg.eliminate_u)
    warns = []
    if diag.failures:
        warns.append(f"u-generation: {diag.failures} of {diag.paths} paths failed")
    if diag.paths and not diag.successes and not diag.at_infinity:
        raise WitnessError("all u-generation paths failed")
    pts = tuple(p.with_status(None) for p in reps)
    return WitnessSet(ring, wz.F + (g1,), (), pts, 0), diag, warns


def eliminate_u_mode(H: Homotopy, mode: Elimination | str, u_index: int, *, t_star: float = 0.1):
    """The homotopy with ``u`` substituted from the chart (mode ``chart``) or from
    the row ``(1 - t) gamma ell + t u`` (mode ``homotopy``, valid only for ``t >= t_star > 0``)."""
    mode = Elimination(mode)
    if mode is Elimination.HOMOTOPY:
        if t_star <= 0:
            raise ValueError("u cannot be solved from the homotopy row at t = 0")
        return eliminate_by_row(H, u_index, H.nrows - 1, t_min=t_star)
    chart_row = len(H.fixed)
    return eliminate_by_row(H, u_index, chart_row, t_min=0.0)


# cascade ---------------------------------------------------------------------


@dataclass
class CascadeResult:
    components: list[WitnessSet]
    rounds: list[list[Diagnostics]]
    warnings: list[str]

    def by_dimension(self) -> dict[int, list[WitnessSet]]:
        out: dict[int, list[WitnessSet]] = {}
        for w in self.components:
            out.setdefault(w.dim, []).append(w)
        return out

    def points(self, dim: int = 0) -> list[MultiProjPoint]:
        return [p for w in self.components if w.dim == dim for p in w.W]


def point_witness_set(ring: Ring, rng: np.random.Generator) -> WitnessSet:
    """``(∅, {l_1..l_n}, V(l_1..l_n))``: all of projective space."""
    n = ring.nvars - 1
    L = [random_linear(ring, rng) for _ in range(n)]
    A = np.array([[l.terms.get(tuple(int(k == j) for k in range(ring.nvars)), 0) for j in range(ring.nvars)]
                  for l in L])
    _, _, vh = np.linalg.svd(A)
    p = MultiProjPoint(vh[-1].conj(), ring.groups)
    return WitnessSet(ring, (), tuple(L), (p,), n)


def cascade(F: PolySystem, cfg: UGenConfig = UGenConfig(), *, rng: np.random.Generator | None = None
            ) -> CascadeResult:
    """Equation-by-equation witness sets for the equidimensional pieces of ``V(F)``."""
    ring = F.ring
    if ring.ngroups != 1:
        raise ValueError("the cascade runs in a single projective space")
    for k, f in enumerate(F):
        if not f.is_homogeneous():
            raise ValueError(f"equation {k} is not homogeneous")
    rng = rng_from(cfg.settings, rng, "cascade")
    C = [point_witness_set(ring, rng)]
    rounds, warns = [], []
    for i, f in enumerate(F):
        nxt, diags = [], []
        for j, w in enumerate(C):
            try:
                res = intersect_hypersurface(w, f, cfg, rng=rng)
            except WitnessError as exc:
                raise WitnessError(f"equation {i}, component {j} (dim {w.dim}): {exc}") from exc
            nxt.extend(res.sets)
            diags.append(res.diagnostics)
            warns.extend(f"equation {i}: {m}" for m in res.warnings)
        C = eliminate_redundant(nxt, cfg.settings, rng=rng)
        rounds.append(diags)
    return CascadeResult(C, rounds, warns)


def eliminate_redundant(C: Sequence[WitnessSet], settings: TrackerSettings = TrackerSettings(), *,
                        rng: np.random.Generator | None = None) -> list[WitnessSet]:
    """Drop witness sets whose points all lie on another surviving set of at least the same dimension."""
    rng = rng_from(settings, rng, "eliminate-redundant")
    order = sorted(range(len(C)), key=lambda k: (-C[k].dim, k))
    alive = set(range(len(C)))
    for k in order:
        w = C[k]
        for j in order:
            if j == k or j not in alive or C[j].dim < w.dim:
                continue
            if w.W and all(membership(C[j], p, settings, rng=rng) for p in w.W):
                alive.discard(k)
                break
    return [C[k] for k in sorted(alive)]
