"""Regeneration baseline: intersect a curve with a hypersurface through a product of linear slices.

Stage one moves the curve's slice onto each linear factor of the product;
stage two deforms the product into the hypersurface.  Both stages are
counted so runs can be compared path for path with u-generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ugen.algebra.poly import MPoly, PolySystem
from ugen.diagnostics import Diagnostics
from ugen.projective import IntersectionResult, split_by_hypersurface
from ugen.tracking.homotopy import make_straight_line, place_on_charts, random_charts, random_unit_complex
from ugen.tracking.points import MultiProjPoint, dedup_endpoints
from ugen.tracking.tracker import PathStatus, TrackerSettings, track_batch
from ugen.witness import (DEDUP_TOL, WitnessError, WitnessSet, finite_rules, move_slice, random_linear,
                          rng_from)


@dataclass
class Preparation:
    """Start points for the product homotopy; ``factors[k]`` indexes the linear ``points[k]`` lies on."""

    linears: list[MPoly]
    points: list[MultiProjPoint]
    factors: list[int]
    diagnostics: list[Diagnostics] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def paths(self) -> int:
        return sum(d.paths for d in self.diagnostics)

    def merged_diagnostics(self) -> Diagnostics:
        out = Diagnostics("regeneration-prep")
        for d in self.diagnostics:
            out = out.merged(d, "regeneration-prep")
        return out


def _prepare_one(w: WitnessSet, d: int, settings: TrackerSettings, rng, prep: Preparation):
    if w.dim != 1:
        raise ValueError("regeneration prepares from a curve witness set")
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if d == 0:
        return
    group = next(g for g in range(w.ring.ngroups) if w.L[0].support() <= set(w.ring.groups[g]))
    base = len(prep.linears)
    prep.linears.append(w.L[0])
    prep.points.extend(w.W)
    prep.factors.extend([base] * len(w.W))
    for j in range(1, d):
        lam = random_linear(w.ring, rng, group)
        moved = move_slice(w, [lam], settings, rng=rng)
        prep.linears.append(lam)
        prep.points.extend(moved.W)
        prep.factors.extend([base + j] * len(moved.W))
        prep.diagnostics.extend(moved.diagnostics)
        prep.warnings.extend(moved.warnings[len(w.warnings):])


def regen_prepare(w: WitnessSet, d: int, settings: TrackerSettings = TrackerSettings(), *,
                  rng: np.random.Generator | None = None) -> Preparation:
    """Points of the curve on ``d`` linears; the curve's own slice serves as the first one."""
    if d < 1:
        raise ValueError("d must be at least 1")
    prep = Preparation([], [], [])
    _prepare_one(w, d, settings, rng_from(settings, rng, "regen-prepare"), prep)
    return prep


def regen_prepare_multi(curves: Mapping[int, WitnessSet], degrees: Sequence[int],
                        settings: TrackerSettings = TrackerSettings(), *,
                        rng: np.random.Generator | None = None) -> Preparation:
    """Multiprojective preparation: ``degrees[g]`` linears in group ``g``, from the curve sliced in that group."""
    rng = rng_from(settings, rng, "regen-prepare")
    prep = Preparation([], [], [])
    for g, d in enumerate(degrees):
        if d == 0:
            continue
        if g not in curves:
            raise KeyError(f"no curve witness set sliced in group {g}")
        _prepare_one(curves[g], d, settings, rng, prep)
    return prep


def _product_homotopy_solve(fixed: Sequence[MPoly], prep: Preparation, g1: MPoly, settings, rng, ring):
    start = MPoly.constant(ring, 1.0)
    for lam in prep.linears:
        start = start * lam
    charts = random_charts(ring, rng)
    H = make_straight_line(PolySystem(ring, (start,)), PolySystem(ring, (g1,)), random_unit_complex(rng),
                           charts=charts, fixed=fixed)
    starts = [place_on_charts(p.coords, ring, charts) for p in prep.points]
    results = track_batch(H, starts, settings, rules=finite_rules(ring))
    good = [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
    reps, sizes = dedup_endpoints(good, DEDUP_TOL)
    diag = Diagnostics.from_results("regeneration", results, sizes, prep_paths=prep.paths)
    if diag.paths and not diag.successes and not diag.at_infinity:
        raise WitnessError("all regeneration paths failed")
    return tuple(p.with_status(None) for p in reps), diag


def regen_intersect(w: WitnessSet, g1: MPoly, settings: TrackerSettings = TrackerSettings(), *,
                    rng: np.random.Generator | None = None) -> IntersectionResult:
    """Same contract as u-generation's ``intersect_hypersurface``, computed by regeneration."""
    ring = w.ring
    if g1.ring != ring:
        raise ValueError("g1 must live in the witness set's ring")
    if not g1.is_homogeneous() or g1.degree < 1:
        raise ValueError("g1 must be homogeneous of positive degree")
    rng = rng_from(settings, rng, "regen-intersect")
    inside, outside = split_by_hypersurface(w, g1)
    sets, contained, lower = [], None, None
    if inside:
        contained = WitnessSet(ring, w.F, w.L, tuple(inside), w.dim)
        sets.append(contained)
    diag, prep_diag, warns = Diagnostics("regeneration"), None, []
    if w.dim >= 1 and outside:
        F_Z = w.F + w.L[:-1]
        wz = WitnessSet(ring, F_Z, (w.L[-1],), tuple(outside), 1)
        prep = regen_prepare(wz, g1.degree, settings, rng=rng)
        pts, diag = _product_homotopy_solve(F_Z, prep, g1, settings, rng, ring)
        prep_diag = prep.merged_diagnostics()
        warns = list(prep.warnings)
        if diag.failures:
            warns.append(f"regeneration: {diag.failures} of {diag.paths} paths failed")
        lower = WitnessSet(ring, w.F + (g1,), w.L[:-1], pts, w.dim - 1, tuple(warns), (prep_diag, diag))
        sets.append(lower)
    return IntersectionResult(sets, diag, warns, contained, lower, prep_diag)


def regen_intersect_multi(curves: Mapping[int, WitnessSet], g1: MPoly,
                          settings: TrackerSettings = TrackerSettings(), *,
                          rng: np.random.Generator | None = None) -> IntersectionResult:
    """Regeneration on a curve in a product of projective spaces.

    ``curves[g]`` is the curve's witness set sliced by one linear in group ``g``;
    every entry must carry the same equations.
    """
    rng = rng_from(settings, rng, "regen-intersect")
    first = next(iter(curves.values()))
    ring = first.ring
    for w in curves.values():
        if w.F != first.F:
            raise ValueError("curve witness sets must share their equations")
    prep = regen_prepare_multi(curves, g1.multidegree(), settings, rng=rng)
    pts, diag = _product_homotopy_solve(first.F, prep, g1, settings, rng, ring)
    prep_diag = prep.merged_diagnostics()
    warns = list(prep.warnings)
    if diag.failures:
        warns.append(f"regeneration: {diag.failures} of {diag.paths} paths failed")
    lower = WitnessSet(ring, first.F + (g1,), (), pts, 0, tuple(warns), (prep_diag, diag))
    return IntersectionResult([lower], diag, warns, None, lower, prep_diag)


@dataclass(frozen=True)
class SavingsReport:
    predicted_ratio: float
    ugen_paths: int | None = None
    regen_paths: int | None = None

    @property
    def measured_ratio(self) -> float | None:
        if self.ugen_paths is None or not self.regen_paths:
            return None
        return self.ugen_paths / self.regen_paths


def savings_report(deg_g1: int, deg_X: int, ugen_paths: int | None = None,
                   regen_paths: int | None = None) -> SavingsReport:
    """Predicted u-generation/regeneration path ratio ``d X / ((2d - 1) X)``."""
    if deg_g1 < 1 or deg_X < 1:
        raise ValueError("degrees must be positive")
    ratio = deg_g1 * deg_X / (2 * deg_g1 * deg_X - deg_X)
    return SavingsReport(ratio, ugen_paths, regen_paths)
