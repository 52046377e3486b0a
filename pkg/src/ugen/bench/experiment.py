"""Dropped-equation experiment: solve a square system by intersecting the curve
cut out by all but one equation with the hypersurface of the remaining one.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ugen.algebra.poly import MPoly, PolySystem
from ugen.bench.systems import homogenized
from ugen.diagnostics import Diagnostics
from ugen.multiproj import G0Variant, MultiUGenConfig, intersect_hypersurface_multi
from ugen.projective import UGenConfig, intersect_hypersurface
from ugen.regen import regen_intersect, regen_intersect_multi
from ugen.tracking.points import MultiProjPoint
from ugen.tracking.tracker import TrackerSettings
from ugen.witness import WitnessCollection, WitnessSet, witness_collection, witness_curve

METHODS = ("ugen", "regen")


@dataclass
class BenchReport:
    system: str
    method: str
    paths_prep: int
    paths_main: int
    successes: int
    at_infinity: int
    failures: int
    distinct_solutions: int
    wall_time: float
    seed: int
    witness_degrees: tuple[int, ...] = ()
    points: list[MultiProjPoint] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.paths_prep + self.paths_main != self.successes + self.at_infinity + self.failures:
            raise ValueError("path accounting does not balance")

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("points")
        out["witness_degrees"] = list(self.witness_degrees)
        return out


def prepare_dropped(system: PolySystem, which_eq: int | None = None) -> tuple[PolySystem, MPoly]:
    """Homogenize if needed; return (curve equations, dropped equation)."""
    if not all(p.is_homogeneous() for p in system):
        system = homogenized(system)
    k = len(system) - 1 if which_eq is None else which_eq
    if not 0 <= k < len(system):
        raise IndexError(f"equation index {k} out of range")
    rest = PolySystem(system.ring, tuple(p for i, p in enumerate(system) if i != k))
    return rest, system[k]


def curve_witness(F: PolySystem, settings: TrackerSettings):
    """Witness data for the curve ``V(F)``: a witness set, or a collection in a product of spaces."""
    if F.ring.ngroups == 1:
        return witness_curve(F, settings)
    return witness_collection(F, 1, settings)


def _report(name, method, seed, prep: Diagnostics | None, main: Diagnostics, points, elapsed, degrees):
    prep = prep or Diagnostics("prep")
    return BenchReport(name, method, prep.paths, main.paths, prep.successes + main.successes,
                       prep.at_infinity + main.at_infinity, prep.failures + main.failures, len(points),
                       elapsed, seed, tuple(degrees), list(points))


def run_dropped_equation_experiment(system: PolySystem, which_eq: int | None = None, method: str = "ugen",
                                    settings: TrackerSettings = TrackerSettings(), *, name: str = "system",
                                    witness: WitnessSet | WitnessCollection | None = None,
                                    epsilon: float = 1e-5, eliminate_after: float | None = None,
                                    g0_variant: G0Variant | str = G0Variant.BINOMIAL) -> BenchReport:
    """Drop one equation, build the curve's witness data, and intersect back with ``method``.

    Pass ``witness`` to reuse curve witness data between methods; its
    construction time is not included in ``wall_time``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    F, g1 = prepare_dropped(system, which_eq)
    if witness is None:
        witness = curve_witness(F, settings)
    elim = eliminate_after is not None
    t0 = time.perf_counter()
    if isinstance(witness, WitnessCollection):
        k = F.ring.ngroups
        units = [tuple(int(h == g) for h in range(k)) for g in range(k)]
        degrees = [len(witness[a].W) if a in witness.sets else 0 for a in units]
        if method == "ugen":
            cfg = MultiUGenConfig(epsilon=epsilon, g0_variant=G0Variant(g0_variant), settings=settings,
                                  eliminate_vars=elim,
                                  t_star=eliminate_after if elim else 0.1)
            res = intersect_hypersurface_multi(witness, g1, cfg)
            main = Diagnostics("multiprojective u-generation")
            for d in res.diagnostics.values():
                main = main.merged(d)
            points = res.lower.sets[(0,) * k].W if res.lower else ()
            prep = None
        else:
            curves = {g: witness[a] for g, a in enumerate(units) if a in witness.sets}
            res = regen_intersect_multi(curves, g1, settings)
            main, prep, points = res.diagnostics, res.preparation, res.lower.W
    else:
        degrees = [len(witness.W)]
        if method == "ugen":
            cfg = UGenConfig(settings=settings, eliminate_u=elim, t_star=eliminate_after if elim else 0.1)
            res = intersect_hypersurface(witness, g1, cfg)
            prep = None
        else:
            res = regen_intersect(witness, g1, settings)
            prep = res.preparation
        main = res.diagnostics
        points = res.lower.W if res.lower is not None else ()
    elapsed = time.perf_counter() - t0
    return _report(name, method, settings.seed, prep, main, points, elapsed, degrees)


def format_table(reports) -> str:
    """Plain-text comparison table; timings are local wall-clock seconds."""
    head = f"{'system':<16}{'method':<8}{'deg X':>10}{'prep':>7}{'main':>7}{'total':>7}{'sols':>7}{'fail':>6}" \
           f"{'time[s]':>10}"
    lines = [head, "-" * len(head)]
    for r in reports:
        deg = "/".join(str(d) for d in r.witness_degrees)
        lines.append(f"{r.system:<16}{r.method:<8}{deg:>10}{r.paths_prep:>7}{r.paths_main:>7}"
                     f"{r.paths_prep + r.paths_main:>7}{r.distinct_solutions:>7}{r.failures:>6}{r.wall_time:>10.2f}")
    lines.append("times are wall-clock on this machine and not comparable across machines")
    return "\n".join(lines)


def mle_data(n: int, seed: int = 0) -> np.ndarray:
    """A random symmetric positive integer data matrix."""
    rng = np.random.default_rng(seed)
    U = rng.integers(1, 10, size=(n, n))
    return np.triu(U) + np.triu(U, 1).T
