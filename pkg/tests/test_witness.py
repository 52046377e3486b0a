import warnings

import numpy as np
import pytest

from conftest import bilinear_ring, conic_line_points, parabola_system, random_bilinear
from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.bench.systems import gen_katsura, gen_mle_symmetric, homogenized
from ugen.tracking import MultiProjPoint, TrackerSettings, match_multisets
from ugen.witness import (PathFailureWarning, WitnessCollection, WitnessError, WitnessSet, check_points,
                          membership, move_slice, random_linear, slice_types, solve_square, total_degree_solve,
                          witness_collection, witness_curve, witness_set)

S0 = TrackerSettings(seed=0)


# --- total_degree_solve -----------------------------------------------------------------


def test_quadratic_in_one_affine_variable():
    R = Ring.from_names([["x", "h"]], ["h"])
    x, h = R.gens()
    pts = total_degree_solve(PolySystem(R, (x ** 2 - 4 * h ** 2,)), settings=S0)
    xs = sorted((p.coords[0] / p.coords[1]).real for p in pts)
    np.testing.assert_allclose(xs, [-2, 2], atol=1e-12)


def resultant_solutions(f, g, deg_y_f, deg_y_g, deg_res):
    """Affine common zeros of f(x, y), g(x, y) from the Sylvester resultant in y.

    The resultant's values are sampled on a circle and interpolated in x;
    the oracle never touches the homotopy code.
    """
    def ycoeffs(p, x, deg):
        c = np.zeros(deg + 1, dtype=complex)  # descending in y
        for e, a in p.terms.items():
            c[deg - e[1]] += a * x ** e[0]
        return c

    def sylvester(x):
        a, b = ycoeffs(f, x, deg_y_f), ycoeffs(g, x, deg_y_g)
        m, n = deg_y_f, deg_y_g
        S = np.zeros((m + n, m + n), dtype=complex)
        for i in range(n):
            S[i, i:i + m + 1] = a
        for i in range(m):
            S[n + i, i:i + n + 1] = b
        return np.linalg.det(S)

    K = 4 * (deg_res + 1)
    xs = 1.5 * np.exp(2j * np.pi * np.arange(K) / K)
    vals = np.array([sylvester(x) for x in xs])
    coeffs = np.polyfit(xs, vals, deg_res)
    out = []
    for x in np.roots(coeffs):
        ys = np.roots(ycoeffs(f, x, deg_y_f))
        y = ys[int(np.argmin([abs(g.evaluate([x, yy])) for yy in ys]))]
        out.append((x, y))
    return out


def test_quadric_cubic_pair_matches_resultant_oracle():
    rng = np.random.default_rng(11)
    A = Ring.from_names([["x", "y"]])
    x, y = A.gens()

    def dense(deg):
        p = MPoly(A)
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                p = p + complex(rng.normal(), rng.normal()) * x ** i * y ** j
        return p

    f, g = dense(2), dense(3)
    S = homogenized(PolySystem(A, (f, g)))
    pts = total_degree_solve(S, settings=S0)
    assert len(pts) == 6
    ours = [MultiProjPoint.single([p.coords[0] / p.coords[2], p.coords[1] / p.coords[2], 1]) for p in pts]
    ref = [MultiProjPoint.single([a, b, 1]) for a, b in resultant_solutions(f, g, 2, 3, 6)]
    assert match_multisets(ours, ref, 1e-6)


def test_non_square_rejected():
    R = Ring.from_names([["a", "b", "c"]])
    a, b, c = R.gens()
    with pytest.raises(ValueError):
        solve_square(PolySystem(R, (a * b,)))


def test_katsura8_full_system_saturates_bezout():
    S = homogenized(gen_katsura(8))
    pts, diag = solve_square(S, S0)
    assert diag.paths == 256
    assert len(pts) == 256


# --- witness_curve ----------------------------------------------------------------------


def test_parabola_witness_on_x2(parabola_witness):
    assert parabola_witness.degree == 2


def test_parabola_random_witness(parabola_random_witness):
    w = parabola_random_witness
    assert w.degree == 2 and w.dim == 1 and len(w.L) == 1
    assert check_points(w.F + w.L, w.W, w.ring).max() <= 1e-8


def test_line_in_plane_has_one_witness_point():
    R = Ring.from_names([["x0", "x1", "x2"]])
    x0, x1, x2 = R.gens()
    w = witness_curve(PolySystem(R, (x0 + 2 * x1 - 3j * x2,)), S0)
    assert w.degree == 1


def test_katsura8_curve_degree_128_and_reslice():
    S = homogenized(gen_katsura(8))
    F = S.drop(len(S) - 1)
    w = witness_curve(F, S0)
    assert w.degree == 128
    w2 = witness_curve(F, TrackerSettings(seed=1))
    assert w2.degree == 128


def test_wrong_dimension_raises():
    # two generic quadrics in P^2 meet in points, so slicing with a line leaves nothing
    R = Ring.from_names([["x0", "x1", "x2"]])
    x0, x1, x2 = R.gens()
    F = PolySystem(R, (x0 ** 2 - x1 * x2 + x2 ** 2, x1 ** 2 - 3 * x0 * x2))
    with pytest.raises((WitnessError, ValueError)):
        witness_curve(F, S0)


# --- move_slice -------------------------------------------------------------------------


def test_move_to_same_slice_is_identity(parabola_witness):
    w = parabola_witness
    assert move_slice(w, list(w.L)) is w


def test_two_moves_equal_one(parabola_random_witness):
    w = parabola_random_witness
    rng = np.random.default_rng(5)
    L1, L2 = [random_linear(w.ring, rng)], [random_linear(w.ring, rng)]
    via = move_slice(move_slice(w, L1, rng=rng), L2, rng=rng)
    direct = move_slice(w, L2, rng=rng)
    assert match_multisets(via.W, direct.W, 1e-6)


def test_parabola_moved_to_x1_matches_closed_form(parabola_witness):
    R, F, _ = parabola_system()
    moved = move_slice(parabola_witness, [R.var("x1")], S0)
    assert match_multisets(moved.W, conic_line_points(F, R.var("x1")), 1e-6)


def complete_intersection_curve():
    """Two random quadrics in P^3: a degree-4 curve."""
    rng = np.random.default_rng(21)
    R = Ring.from_names([["a", "b", "c", "d"]])
    gens = R.gens()
    qs = []
    for _ in range(2):
        q = MPoly(R)
        for i in range(4):
            for j in range(i, 4):
                q = q + complex(rng.normal(), rng.normal()) * gens[i] * gens[j]
        qs.append(q)
    return PolySystem(R, tuple(qs))


@pytest.mark.parametrize("fixture", ["parabola", "quadrics"])
def test_cardinality_is_slice_invariant(fixture):
    if fixture == "parabola":
        R, F, _ = parabola_system()
        w = witness_curve(PolySystem(R, (F,)), S0)
    else:
        w = witness_curve(complete_intersection_curve(), S0)
        assert w.degree == 4
    rng = np.random.default_rng(9)
    with warnings.catch_warnings():
        warnings.simplefilter("error", PathFailureWarning)
        for _ in range(10):
            moved = move_slice(w, [random_linear(w.ring, rng)], rng=rng)
            assert moved.degree == w.degree
            assert not moved.warnings
            assert check_points(moved.F + moved.L, moved.W, moved.ring).max() <= 1e-8


def test_witness_set_constructor_rechecks_points(parabola_witness):
    w = parabola_witness
    bad = MultiProjPoint.single([1, 0.5, 0.1])
    with pytest.raises(ValueError):
        WitnessSet(w.ring, w.F, w.L, (bad,), 1)
    with pytest.raises(ValueError):
        WitnessSet(w.ring, w.F, w.L, (w.W[0], w.W[0]), 1)
    with pytest.raises(ValueError):
        WitnessSet(w.ring, w.F, (), w.W, 1)


# --- membership -------------------------------------------------------------------------


def test_membership_cases(parabola_random_witness):
    w = parabola_random_witness
    assert membership(w, w.W[0], S0)
    assert membership(w, MultiProjPoint.single([1, 2, 2]), S0)
    rng = np.random.default_rng(4)
    R = w.ring
    for _ in range(3):
        p = MultiProjPoint.single(rng.normal(size=3) + 1j * rng.normal(size=3))
        assert check_points(w.F, [p], R).max() > 1e-3  # the oracle: clearly off the curve
        assert not membership(w, p, S0)


def test_membership_on_a_component_of_a_reducible_curve():
    # V(x0 * x1) is two lines; a witness set of one line should not contain the other
    R = Ring.from_names([["x0", "x1", "x2"]])
    x0, x1, x2 = R.gens()
    line = witness_curve(PolySystem(R, (x0,)), S0)
    assert membership(line, MultiProjPoint.single([0, 3, 1]), S0)
    assert not membership(line, MultiProjPoint.single([3, 0, 1]), S0)


# --- witness collections ----------------------------------------------------------------


def test_point_in_p1xp1():
    R = bilinear_ring()
    x0, x1, y0, y1 = R.gens()
    F = PolySystem(R, (x1 - 2 * x0, y1 + y0))
    wc = witness_collection(F, 0, S0)
    assert list(wc.sets) == [(0, 0)]
    (p,) = wc[(0, 0)].W
    assert p.distance(MultiProjPoint(np.array([1, 2, 1, -1]), R.groups)) < 1e-10


def test_bilinear_curve_has_bidegree_one_one():
    R = bilinear_ring()
    f = random_bilinear(R, np.random.default_rng(2))
    for seed in range(3):
        wc = witness_collection(PolySystem(R, (f,)), 1, TrackerSettings(seed=seed))
        assert wc.degrees() == {(1, 0): 1, (0, 1): 1}


def test_bidegree_consistency_of_a_product_curve():
    # a (2,1)-form in P^1 x P^2 cut by a (1,1)-form: bidegrees are slice-independent
    R = Ring.from_names([["x0", "x1"], ["y0", "y1", "y2"]])
    rng = np.random.default_rng(3)
    x0, x1, y0, y1, y2 = R.gens()
    xs, ys = [x0, x1], [y0, y1, y2]
    f = sum((complex(rng.normal(), rng.normal()) * a * b * c for a in xs for b in xs for c in ys), MPoly(R))
    g = sum((complex(rng.normal(), rng.normal()) * a * c for a in xs for c in ys), MPoly(R))
    F = PolySystem(R, (f, g))
    degs = [witness_collection(F, 1, TrackerSettings(seed=s)).degrees() for s in range(3)]
    assert degs[0] == degs[1] == degs[2]
    # class of the curve: (2a+b)(a+b) = 3ab + b^2 mod a^2; a*[C] = ab^2 -> 1, b*[C] = 3ab^2 -> 3
    assert degs[0] == {(1, 0): 1, (0, 1): 3}


def test_mle_32_collection_has_three_entries():
    U = np.array([[3, 1, 2], [1, 4, 5], [2, 5, 6]])
    S = homogenized(gen_mle_symmetric(3, 2, U))
    F = S.drop(len(S) - 1)
    wc = witness_collection(F, 1, TrackerSettings.for_mle())
    assert set(wc.sets) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    assert all(w.degree > 0 for w in wc.sets.values())


def test_slice_types_respect_factor_dimensions():
    R = Ring.from_names([["a", "b"], ["c", "d", "e"]])
    assert slice_types(R, 2) == [(1, 1), (0, 2)]
    assert slice_types(R, 0) == [(0, 0)]


def test_collection_rejects_oversized_types(parabola_witness):
    R = bilinear_ring()
    f = random_bilinear(R, np.random.default_rng(0))
    wc = witness_collection(PolySystem(R, (f,)), 1, S0)
    w = wc[(1, 0)]
    with pytest.raises(ValueError):
        WitnessCollection(R, wc.F, 1, {(2, -1): w})
    with pytest.raises(KeyError):
        wc[(0, 0)]


def test_witness_set_with_explicit_groups():
    R = bilinear_ring()
    f = random_bilinear(R, np.random.default_rng(1))
    w = witness_set(PolySystem(R, (f,)), [1], S0)
    assert w.degree == 1
