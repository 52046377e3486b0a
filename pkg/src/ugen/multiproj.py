"""u-generation in a product of projective spaces.

Each factor ``P^{n_g}`` gets its own cone variable ``u_g``.  On the double
cone the homotopy moves ``(g0, l_1, ..., l_k)`` to ``(g1, u_1, ..., u_k)``.
At ``t = 0`` several paths meet, so tracking starts at a small ``t = eps``
from asymptotic start points that are Newton-polished first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.algebra.univariate import RootFindingError, univariate_roots
from ugen.diagnostics import Diagnostics
from ugen.projective import Elimination, cone_ring, track_with_elimination
from ugen.tracking.homotopy import (Homotopy, eliminate_by_rows, make_straight_line, place_on_charts,
                                    random_charts, random_unit_complex)
from ugen.tracking.points import FiniteRule, MultiProjPoint, dedup_endpoints
from ugen.tracking.tracker import PathStatus, TrackerSettings, row_scaled_condition, track_batch
from ugen.witness import (DEDUP_TOL, RESIDUAL_TOL, WitnessCollection, WitnessError, WitnessSet,
                          ambient_dims, check_points, finite_rules, linear_group, random_linear, rng_from,
                          slice_types)


class G0Variant(str, enum.Enum):
    BINOMIAL = "binomial"  # gamma * prod_g (u_g^d_g - l_g^d_g)
    PRODUCT = "product"  # gamma * prod_g prod_i (u_g - l_gi)


@dataclass(frozen=True)
class MultiUGenConfig:
    epsilon: float = 1e-5
    g0_variant: G0Variant = G0Variant.BINOMIAL
    gamma: complex | None = None
    settings: TrackerSettings = field(default_factory=TrackerSettings)
    eliminate_vars: bool = False
    elimination: Elimination = Elimination.HOMOTOPY
    t_star: float = 0.1
    telemetry: bool = False  # record start-point condition numbers with and without elimination

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.gamma is not None and abs(abs(self.gamma) - 1) > 1e-12:
            raise ValueError("gamma must lie on the unit circle")
        if self.eliminate_vars and not self.epsilon < self.t_star < 1:
            raise ValueError("t_star must lie in (epsilon, 1)")


@dataclass(frozen=True)
class DoubleConeSystem:
    original_ring: Ring
    extended_ring: Ring
    F_tilde: PolySystem
    cone_vars: tuple[int, ...]

    @classmethod
    def build(cls, F: PolySystem | Sequence[MPoly], ring: Ring | None = None) -> "DoubleConeSystem":
        polys = list(F)
        ring = ring or (F.ring if isinstance(F, PolySystem) else polys[0].ring)
        ext, cone = cone_ring(ring)
        return cls(ring, ext, PolySystem(ext, tuple(p.recast(ext) for p in polys)), tuple(cone))

    def lift(self, x: np.ndarray, cone_values: Sequence[complex]) -> np.ndarray:
        """Original coordinates plus given cone coordinates, in extended-ring order."""
        y = np.zeros(self.extended_ring.nvars, dtype=complex)
        y[self._original_slots()] = x
        y[list(self.cone_vars)] = cone_values
        return y

    def project(self, p: MultiProjPoint) -> MultiProjPoint:
        return p.drop(list(self.cone_vars)).normalize()

    def _original_slots(self) -> list[int]:
        return [j for j in range(self.extended_ring.nvars) if j not in self.cone_vars]


def make_g0_multi(degrees: Sequence[int], linears: Sequence[Sequence[MPoly]], gamma: complex,
                  variant: G0Variant | str = G0Variant.BINOMIAL, cone_vars: Sequence[int] | None = None) -> MPoly:
    """A start hypersurface of multidegree ``degrees`` in the extended ring.

    ``linears[g]`` holds the group-``g`` forms: one for the binomial variant,
    ``degrees[g]`` of them for the product variant.  ``cone_vars[g]`` defaults
    to the first variable of group ``g``.
    """
    variant = G0Variant(variant)
    ring = next(l.ring for ls in linears for l in ls)
    if len(degrees) != ring.ngroups or len(linears) != ring.ngroups:
        raise ValueError("need one degree and one list of linears per group")
    cone_vars = list(cone_vars) if cone_vars is not None else [g[0] for g in ring.groups]
    out = MPoly.constant(ring, complex(gamma))
    for g, (d, ls) in enumerate(zip(degrees, linears)):
        if d < 0:
            raise ValueError("degrees must be nonnegative")
        for lin in ls:
            if linear_group(lin) != g or cone_vars[g] in lin.support():
                raise ValueError(f"linear form for group {g} must use only that group's original variables")
        if d == 0:
            continue
        u = MPoly.variable(ring, cone_vars[g])
        if variant is G0Variant.BINOMIAL:
            if len(ls) < 1:
                raise ValueError(f"group {g} needs a linear form")
            out = out * (u ** d - ls[0] ** d)
        else:
            if len(ls) < d:
                raise ValueError(f"group {g} needs {d} linear forms")
            for lin in ls[:d]:
                out = out * (u - lin)
    return out


def expected_path_count(degrees_X: Sequence[int], multidegree_g1: Sequence[int]) -> int:
    """Paths of the multiprojective homotopy: ``sum_g d_g deg_g(X)``."""
    if len(degrees_X) != len(multidegree_g1):
        raise ValueError("group counts differ")
    return int(sum(d * x for d, x in zip(multidegree_g1, degrees_X)))


def u_multiproj_start_points(curves: Sequence[WitnessSet | None], g0: MPoly, epsilon: float, *,
                             cone: DoubleConeSystem, slices: Sequence[MPoly], gamma: complex = 1.0
                             ) -> tuple[list[np.ndarray], list[int]]:
    """Approximate points of the homotopy at ``t = epsilon``, before polishing.

    ``curves[g]`` (in the original ring) is the curve sliced by ``slices[g]``,
    or None when ``g0`` has degree 0 in group ``g``.  For a witness point on
    the group-``g`` slice, ``u_g`` runs over the roots of ``g0`` with every
    other factor at ``[1:0]``, and every other cone coordinate ``u_h`` is set
    to ``(1 - 1/eps) gamma l_h(x_h)`` so its slice row holds exactly.
    Returns (extended coordinates, group tag) lists.
    """
    ring = cone.extended_ring
    orig = cone.original_ring
    md = g0.multidegree()
    slots = cone._original_slots()
    points, tags = [], []
    for g, w in enumerate(curves):
        if md[g] == 0:
            continue
        if w is None:
            raise ValueError(f"no witness points for group {g}, where g0 has degree {md[g]}")
        ug = cone.cone_vars[g]
        assign = {}
        for h in range(ring.ngroups):
            if h != g:
                for j in ring.groups[h]:
                    assign[j] = 1.0 if j == cone.cone_vars[h] else 0.0
        g_restricted = g0.specialize(assign)
        for k, p in enumerate(w.W):
            x = p.coords
            vals = {slots[j]: x[j] for j in orig.groups[g]}
            uni = g_restricted.specialize(vals).univariate_coefficients(ug)
            try:
                roots = univariate_roots(uni)
            except (RootFindingError, ValueError) as exc:
                raise RootFindingError(f"g0 restricted to factor {g} is degenerate at witness point {k}: {exc}")
            if len(roots) != md[g]:
                raise RootFindingError(f"g0 restricted to factor {g} drops degree at witness point {k}")
            cone_vals = []
            for h in range(ring.ngroups):
                if h == g:
                    cone_vals.append(0j)
                else:
                    cone_vals.append((1 - 1 / epsilon) * gamma * slices[h].evaluate(x))
            base = cone.lift(x, cone_vals)
            for r in roots:
                y = base.copy()
                y[ug] = r
                points.append(y)
                tags.append(g)
    return points, tags


def eliminate_cone_vars(H: Homotopy, mode: Elimination | str, cone_vars: Sequence[int], *, t_star: float,
                        nF: int | None = None):
    """``H`` with every cone variable substituted from its slice row (``homotopy``) or chart (``chart``).

    Rows of ``H`` are expected in the order built here: equations, one chart
    per group, then ``g`` and one slice row per group.  The result refuses
    evaluation below ``t_star``.
    """
    mode = Elimination(mode)
    k = len(cone_vars)
    if mode is Elimination.HOMOTOPY:
        if t_star <= 0:
            raise ValueError("cone variables cannot be solved from the slice rows at t = 0")
        rows = [H.nfixed + 1 + g for g in range(k)]
    else:
        nF = len(H.fixed) if nF is None else nF
        rows = [nF + g for g in range(k)]
    return eliminate_by_rows(H, list(cone_vars), rows, t_min=t_star)


def _elimination_rows(H: Homotopy, mode: Elimination, k: int) -> list[int]:
    if mode is Elimination.HOMOTOPY:
        return [H.nfixed + 1 + g for g in range(k)]
    return [len(H.fixed) + g for g in range(k)]


def condition_telemetry(H: Homotopy, X: np.ndarray, t: float, cone_vars: Sequence[int],
                        mode: Elimination | str = Elimination.HOMOTOPY) -> dict[str, float]:
    """Median row-scaled condition numbers at ``(X, t)`` with and without the cone variables eliminated."""
    X = np.atleast_2d(X)
    tt = np.full(X.shape[0], float(t))
    _, J, _ = H.evaluate(X, tt)
    R = eliminate_cone_vars(H, mode, cone_vars, t_star=t)
    _, JR, _ = R.evaluate(R.reduce(X), tt)
    return {"cone": float(np.median(row_scaled_condition(J))),
            "eliminated": float(np.median(row_scaled_condition(JR)))}


@dataclass
class MultiIntersectionResult:
    lower: WitnessCollection | None
    contained: WitnessCollection | None
    diagnostics: dict[tuple[int, ...], Diagnostics]
    warnings: list[str] = field(default_factory=list)

    @property
    def paths(self) -> int:
        return sum(d.paths for d in self.diagnostics.values())


def _curve_ugen(F_Z: Sequence[MPoly], slices: Sequence[MPoly], curves: Sequence[WitnessSet | None], g1: MPoly,
                cfg: MultiUGenConfig, rng) -> tuple[tuple[MultiProjPoint, ...], Diagnostics, list[str]]:
    ring = g1.ring
    s = cfg.settings
    cone = DoubleConeSystem.build(F_Z, ring)
    ext = cone.extended_ring
    k = ring.ngroups
    md = g1.multidegree()
    gamma0 = random_unit_complex(rng)
    if G0Variant(cfg.g0_variant) is G0Variant.BINOMIAL:
        lins = [[random_linear(ring, rng, g).recast(ext)] if md[g] else [] for g in range(k)]
    else:
        lins = [[random_linear(ring, rng, g).recast(ext) for _ in range(md[g])] for g in range(k)]
    g0 = make_g0_multi(md, lins, gamma0, cfg.g0_variant, cone.cone_vars)
    gamma = cfg.gamma if cfg.gamma is not None else random_unit_complex(rng)
    starts, tags = u_multiproj_start_points(curves, g0, cfg.epsilon, cone=cone, slices=slices, gamma=gamma)
    charts = random_charts(ext, rng)
    ell = [l.recast(ext) for l in slices]
    u = [MPoly.variable(ext, c) for c in cone.cone_vars]
    H = make_straight_line(PolySystem(ext, (g0, *ell)), PolySystem(ext, (g1.recast(ext), *u)), gamma,
                           charts=charts, fixed=cone.F_tilde.polys)
    X0 = np.array([place_on_charts(x, ext, charts) for x in starts]) if starts else np.zeros((0, ext.nvars))
    rules = [FiniteRule(g, c, True) for g, c in enumerate(cone.cone_vars)] + finite_rules(ext)
    extra = {"expected_paths": expected_path_count([len(w.W) if w is not None else 0 for w in curves], md),
             "start_tags": [int(sum(1 for x in tags if x == g)) for g in range(k)],
             "eliminated": cfg.eliminate_vars}
    if cfg.telemetry and len(X0):
        extra["start_condition"] = condition_telemetry(H, X0, cfg.epsilon, cone.cone_vars, cfg.elimination)
    if cfg.eliminate_vars:
        results = track_with_elimination(H, X0, s, var=list(cone.cone_vars),
                                         row=_elimination_rows(H, Elimination(cfg.elimination), k),
                                         t_star=cfg.t_star, groups=ext.groups, rules=rules, t_start=cfg.epsilon)
    else:
        results = track_batch(H, X0, s, t_start=cfg.epsilon, rules=rules)
    good = [cone.project(r.endpoint) for r in results if r.status is PathStatus.SUCCESS]
    reps, sizes = dedup_endpoints(good, DEDUP_TOL)
    # paths can stop on a point of an extraneous component; keep only true solutions
    res = check_points(list(F_Z) + [g1], reps, ring) if reps else np.zeros(0)
    kept = tuple(p.with_status(None) for p, r in zip(reps, res) if r <= RESIDUAL_TOL)
    diag = Diagnostics.from_results("multiprojective u-generation", results, sizes, **extra)
    warns = []
    if diag.failures:
        warns.append(f"multiprojective u-generation: {diag.failures} of {diag.paths} paths failed")
    if len(kept) < len(reps):
        warns.append(f"{len(reps) - len(kept)} endpoints failed the residual check")
    return kept, diag, warns


def _as_collection(wc) -> WitnessCollection:
    if isinstance(wc, WitnessCollection):
        return wc
    curves = dict(wc) if isinstance(wc, Mapping) else dict(enumerate(wc))
    first = next(iter(curves.values()))
    ring = first.ring
    sets = {}
    for g, w in curves.items():
        a = tuple(int(h == g) for h in range(ring.ngroups))
        sets[a] = w
    return WitnessCollection(ring, first.F, 1, sets)


def _split(w: WitnessSet, g1: MPoly):
    if not w.W:
        return [], []
    res = check_points([g1], w.W, w.ring)
    return [p for p, r in zip(w.W, res) if r <= RESIDUAL_TOL], [p for p, r in zip(w.W, res) if r > RESIDUAL_TOL]


def intersect_hypersurface_multi(wc, g1: MPoly, cfg: MultiUGenConfig = MultiUGenConfig(), *,
                                 rng: np.random.Generator | None = None) -> MultiIntersectionResult:
    """Witness collection of ``X ∩ V(g1)`` from one of ``X``.

    ``wc`` is a witness collection, or for a curve a mapping (or sequence)
    from group index to the curve's witness set sliced in that group.  For
    each target slice type ``b`` the curve ``X ∩ V(L_b)`` is intersected with
    ``V(g1)``, with start data from the entries ``b + e_g``.  The collection
    must use nested slices as produced by ``witness_collection``.
    """
    wc = _as_collection(wc)
    ring = wc.ring
    if g1.ring != ring:
        raise ValueError("g1 must live in the collection's ring")
    if not g1.is_homogeneous():
        raise ValueError("g1 must be multihomogeneous")
    if wc.dim < 1:
        raise ValueError("need a positive-dimensional witness collection")
    rng = rng_from(cfg.settings, rng, "intersect-multi")
    md = g1.multidegree()
    dims = ambient_dims(ring)

    inside = {a: _split(w, g1)[0] for a, w in wc.sets.items()}
    outside = {a: _split(w, g1)[1] for a, w in wc.sets.items()}
    contained = None
    if any(inside.values()):
        contained = WitnessCollection(ring, wc.F, wc.dim, {
            a: WitnessSet(ring, wc.F, wc.sets[a].L, tuple(pts), wc.dim) for a, pts in inside.items() if pts})
    if not any(outside.values()):
        return MultiIntersectionResult(None, contained, {}, [])

    diags, warns, lower = {}, [], {}
    for b in slice_types(ring, wc.dim - 1):
        curves: list[WitnessSet | None] = []
        slices: list[MPoly | None] = []
        L_b = None
        full = []  # groups already cut to points: the curve has degree 0 there
        for g in range(ring.ngroups):
            a = tuple(bi + (h == g) for h, bi in enumerate(b))
            if a[g] > dims[g]:
                curves.append(None)
                slices.append(None)
                full.append(g)
                continue
            if a not in wc.sets:
                if md[g]:
                    raise KeyError(f"witness collection has no entry w_{a}, needed for w_{b}")
                curves.append(None)
                slices.append(None)
                continue
            w = wc.sets[a]
            group_lins = [l for l in w.L if linear_group(l) == g]
            new = group_lins[-1]
            rest = tuple(l for l in w.L if l is not new)
            if L_b is None:
                L_b = rest
            elif not _same_linears(L_b, rest):
                raise ValueError(f"entries around w_{b} do not share their slices; use nested slices")
            slices.append(new)
            pts = tuple(outside[a])
            curves.append(WitnessSet(ring, wc.F + rest, (new,), pts, 1) if md[g] else None)
        if L_b is None:
            continue
        slices = [s_ if s_ is not None else random_linear(ring, rng, g) for g, s_ in enumerate(slices)]
        F_Z = wc.F + L_b
        for g in full:
            if md[g]:
                curves[g] = WitnessSet(ring, F_Z, (slices[g],), (), 1)
        pts, diag, w_ = _curve_ugen(F_Z, slices, curves, g1, cfg, rng)
        diags[b] = diag
        warns.extend(f"w_{b}: {m}" for m in w_)
        lower[b] = WitnessSet(ring, wc.F + (g1,), L_b, pts, wc.dim - 1, tuple(w_), (diag,))
    coll = WitnessCollection(ring, wc.F + (g1,), wc.dim - 1, lower)
    return MultiIntersectionResult(coll, contained, diags, warns)


def _same_linears(A: Sequence[MPoly], B: Sequence[MPoly]) -> bool:
    return len(A) == len(B) and all(any(a is b for b in B) for a in A)
