"""Command line: ``ugen gen | solve | bench | verify``.

Exit codes: 0 success, 1 usage error, 2 numerical failure (output files are
still written when there is something to write).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ugen.algebra.poly import PolySystem
from ugen.algebra.univariate import RootFindingError
from ugen.bench.experiment import (curve_witness, format_table, mle_data, prepare_dropped,
                                   run_dropped_equation_experiment)
from ugen.bench.systems import gen_banded_quadrics, gen_cyclic, gen_katsura, gen_mle_symmetric, homogenized
from ugen.io import (FormatError, dump_json, load_json, load_system, point_from_dict, ring_from_dict,
                     save_solutions, save_system)
from ugen.multiproj import G0Variant
from ugen.tracking.tracker import TrackerSettings
from ugen.witness import WitnessError, check_points, solve_square

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
FAMILIES = ("katsura", "cyclic", "banded", "mle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _settings(args) -> TrackerSettings:
    base = TrackerSettings.for_mle() if getattr(args, "family", None) == "mle" else TrackerSettings()
    changes = {"seed": args.seed}
    if args.min_step is not None:
        changes["min_step"] = args.min_step
        changes["initial_step"] = max(base.initial_step, args.min_step)
    if args.max_corr_steps is not None:
        changes["max_corrector_iters"] = args.max_corr_steps
    if args.infinity_threshold is not None:
        changes["infinity_threshold"] = args.infinity_threshold
    try:
        return base.with_(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_family(family: str, n: int, k: int | None = None, r: int | None = None, seed: int = 0
                 ) -> tuple[PolySystem, str]:
    try:
        if family == "katsura":
            return gen_katsura(n), f"katsura-{n}"
        if family == "cyclic":
            return gen_cyclic(n), f"cyclic-{n}"
        if family == "banded":
            if k is None:
                raise UsageError("banded quadrics need --k")
            return gen_banded_quadrics(n, k, seed), f"banded-{n}-{k}"
        if family == "mle":
            if r is None:
                raise UsageError("the likelihood family needs --r")
            return gen_mle_symmetric(n, r, mle_data(n, seed)), f"mle-{n}-{r}"
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown family {family!r}")


def _add_tracker_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-step", type=float, default=None)
    p.add_argument("--max-corr-steps", type=int, default=None)
    p.add_argument("--infinity-threshold", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=1e-5, help="start offset for products of spaces")
    p.add_argument("--eliminate-after", type=float, default=None,
                   help="eliminate the cone variables once t exceeds this value")
    p.add_argument("--g0-variant", choices=[v.value for v in G0Variant], default=G0Variant.BINOMIAL.value,
                   help="start polynomial shape in products of spaces")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ugen", description="Equation-by-equation polynomial system solving by u-generation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a benchmark system to a JSON file")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--r", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve a system file")
    s.add_argument("--method", choices=("ugen", "regen", "total-degree"), default="ugen")
    s.add_argument("--system", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--drop", type=int, default=None, help="index of the equation to intersect last")
    _add_tracker_flags(s)

    b = sub.add_parser("bench", help="dropped-equation comparison of u-generation and regeneration")
    b.add_argument("--family", choices=FAMILIES, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int)
    b.add_argument("--r", type=int)
    b.add_argument("--json", default=None, help="also write the reports here")
    _add_tracker_flags(b)

    v = sub.add_parser("verify", help="re-check the residuals of a solution file")
    v.add_argument("--system", required=True)
    v.add_argument("--solutions", required=True)
    v.add_argument("--tol", type=float, default=1e-8)
    return parser


def cmd_gen(args) -> int:
    system, name = build_family(args.family, args.n, args.k, args.r, args.seed)
    save_system(args.out, system, name)
    print(f"wrote {name}: {len(system)} equations in {system.ring.nvars} variables to {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    system = load_system(args.system)
    settings = _settings(args)
    meta = {"method": args.method, "seed": args.seed}
    if args.method == "total-degree":
        target = system if all(p.is_homogeneous() for p in system) else homogenized(system)
        points, diag = solve_square(target, settings)
        ring, failures = target.ring, diag.failures
        meta["diagnostics"] = diag.to_dict()
    else:
        F, _ = prepare_dropped(system, args.drop)
        ring = F.ring
        witness = curve_witness(F, settings)
        rep = run_dropped_equation_experiment(system, args.drop, args.method, settings, witness=witness,
                                              epsilon=args.epsilon, eliminate_after=args.eliminate_after,
                                              g0_variant=args.g0_variant)
        points, failures = rep.points, rep.failures
        report = rep.to_dict()
        report.pop("wall_time")  # keeps reruns byte-identical
        meta["report"] = report
    save_solutions(args.out, points, ring, **meta)
    print(f"{len(points)} solutions written to {args.out}")
    if failures:
        print(f"warning: {failures} paths failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_bench(args) -> int:
    system, name = build_family(args.family, args.n, args.k, args.r, args.seed)
    settings = _settings(args)
    F, _ = prepare_dropped(system)
    witness = curve_witness(F, settings)
    reports = [run_dropped_equation_experiment(system, None, m, settings, name=name, witness=witness,
                                               epsilon=args.epsilon, eliminate_after=args.eliminate_after,
                                              g0_variant=args.g0_variant)
               for m in ("ugen", "regen")]
    print(format_table(reports))
    if args.json:
        dump_json(args.json, [r.to_dict() for r in reports])
    return EXIT_NUMERIC if any(r.failures for r in reports) else EXIT_OK


def cmd_verify(args) -> int:
    system = load_system(args.system)
    data = load_json(args.solutions)
    if not isinstance(data, dict) or "points" not in data:
        raise FormatError("solution file needs a 'points' list")
    ring = ring_from_dict(data)
    if ring != system.ring:
        system = homogenized(system) if not all(p.is_homogeneous() for p in system) else system
    if ring.variables != system.ring.variables:
        raise FormatError("solution variables do not match the system")
    system = system.recast(ring)
    points = [point_from_dict(p, ring) for p in data["points"]]
    res = check_points(list(system), points, ring) if points else np.zeros(0)
    bad = np.flatnonzero(res > args.tol)
    worst = float(res.max()) if len(res) else 0.0
    print(f"{len(points)} points, worst relative residual {worst:.3e}, {len(bad)} above {args.tol:g}")
    for i in bad[:20]:
        print(f"  point {i}: residual {res[i]:.3e}")
    return EXIT_NUMERIC if len(bad) else EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "verify": cmd_verify}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, FormatError, FileNotFoundError) as exc:
        print(f"ugen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WitnessError, RootFindingError, np.linalg.LinAlgError) as exc:
        print(f"ugen: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
