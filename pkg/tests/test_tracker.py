import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PARABOLA_POINTS, parabola_system
from ugen.algebra.poly import MPoly, PolySystem, Ring
from ugen.tracking import (FiniteRule, MultiProjPoint, PathStatus, TrackerSettings, classify_endpoint,
                           dedup_endpoints, make_straight_line, match_multisets, track_batch, track_path)
from ugen.tracking.homotopy import DegreeMismatchError, Homotopy, place_on_charts, random_charts


def parabola_cone_homotopy(gamma=np.exp(0.3j), seed=0):
    """The homotopy (g0, x2) -> (g1, u) on the cone over the first parabola, built by hand."""
    _, F, g1 = parabola_system()
    C = Ring.from_names([["u", "x0", "x1", "x2"]])
    u, x0, x1, x2 = C.gens()
    Fc, g1c = F.recast(C), g1.recast(C)
    g0 = x0 ** 2 - u ** 2
    charts = random_charts(C, np.random.default_rng(seed))
    H = make_straight_line(PolySystem(C, (g0, x2)), PolySystem(C, (g1c, u)), gamma, charts=charts, fixed=(Fc,))
    r2 = np.sqrt(2)
    starts = [place_on_charts(np.array([su, 1, s2 * r2, 0], dtype=complex), C, charts)
              for su in (1, -1) for s2 in (1, -1)]
    return H, starts, C


def expected_cone_points():
    return [MultiProjPoint(np.array((0,) + p, dtype=complex), ((0, 1, 2, 3),)).normalize()
            for p in PARABOLA_POINTS]


# --- make_straight_line -----------------------------------------------------------------


def test_identity_homotopy_keeps_start():
    R = Ring.from_names([["x", "h"]])
    x, h = R.gens()
    S = PolySystem(R, (x ** 2 - 3 * h ** 2,))
    charts = [MPoly.linear(R, [0.3, 1.0], constant=-1.0)]
    H = make_straight_line(S, S, 1.0, charts=charts)
    x0 = place_on_charts(np.array([np.sqrt(3), 1.0]), R, charts)
    r = track_path(H, x0)
    assert r.status is PathStatus.SUCCESS
    np.testing.assert_allclose(r.x, x0, atol=1e-12)


def test_u_homotopy_rows():
    H, _, C = parabola_cone_homotopy()
    assert H.nmoving == 2 and H.nfixed == 2
    u, x0, x1, x2 = C.gens()
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    val, _, _ = H.evaluate(X, np.full(3, 0.25))
    _, F, g1 = parabola_system()
    for k in range(3):
        x = X[k]
        row_g = 0.75 * H.gamma * (x0 ** 2 - u ** 2).evaluate(x) + 0.25 * g1.recast(C).evaluate(x)
        row_l = 0.75 * H.gamma * x[3] + 0.25 * x[0]
        np.testing.assert_allclose(val[k, 2:], [row_g, row_l], rtol=1e-12)


def test_midpoint_is_mean_of_gamma_start_and_target():
    rng = np.random.default_rng(1)
    R = Ring.from_names([["a", "b", "c"]])
    a, b, c = R.gens()
    S = PolySystem(R, (a ** 2 - b * c, a * b * c - c ** 3))
    T = PolySystem(R, (b ** 2 + 2j * a * c, a ** 3 + b ** 3 - c ** 3))
    gamma = np.exp(2.1j)
    H = make_straight_line(S, T, gamma)
    X = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
    val, _, Ht = H.evaluate(X, np.full(20, 0.5))
    for k in range(20):
        expect = 0.5 * (gamma * S.evaluate(X[k]) + T.evaluate(X[k]))
        np.testing.assert_allclose(val[k], expect, rtol=1e-12)
        np.testing.assert_allclose(Ht[k], T.evaluate(X[k]) - gamma * S.evaluate(X[k]), rtol=1e-12)


def test_degree_mismatch_and_gamma_checks():
    R = Ring.from_names([["a", "b"]])
    a, b = R.gens()
    with pytest.raises(DegreeMismatchError):
        make_straight_line(PolySystem(R, (a ** 2,)), PolySystem(R, (a * b * b,)))
    with pytest.raises(ValueError):
        make_straight_line(PolySystem(R, (a,)), PolySystem(R, (b,)), gamma=2.0)


def test_homotopy_time_derivative_vs_finite_difference():
    H, starts, _ = parabola_cone_homotopy()
    X = np.array(starts) + 0.1
    t = np.full(len(X), 0.4)
    _, _, Ht = H.evaluate(X, t)
    hp, _, _ = H.evaluate(X, t + 1e-6)
    hm, _, _ = H.evaluate(X, t - 1e-6)
    np.testing.assert_allclose(Ht, (hp - hm) / 2e-6, rtol=1e-6, atol=1e-8)


# --- track_path / track_batch -----------------------------------------------------------


def test_univariate_toy_follows_closed_form_path():
    # x^2 - 1 ~> x^2 - 4 along sqrt(1 + 3t), with gamma = 1
    R = Ring.from_names([["x"]])
    x = R.var("x")
    H = Homotopy(R, [x ** 2 - 1], [x ** 2 - 4], 1.0)
    seen = []
    r = track_path(H, np.array([1.0 + 0j]), TrackerSettings(), on_accept=lambda rows, X, t: seen.append((X, t)))
    assert r.status is PathStatus.SUCCESS
    assert abs(r.x[0] - 2) < 1e-10
    for X, t in seen:
        np.testing.assert_allclose(X[:, 0], np.sqrt(1 + 3 * t), atol=1e-6)


def test_parabola_cone_paths_reach_published_points():
    H, starts, C = parabola_cone_homotopy()
    results = track_batch(H, starts, rules=[FiniteRule(0, 0, True)])
    assert [r.status for r in results] == [PathStatus.SUCCESS] * 4
    ends = [r.endpoint for r in results]
    assert all(abs(p.coords[0]) < 1e-8 for p in ends)
    assert match_multisets(ends, expected_cone_points(), 1e-8)


def test_empty_batch():
    H, _, _ = parabola_cone_homotopy()
    assert track_batch(H, []) == []


def test_batch_equals_sequential_and_is_order_independent():
    H, starts, _ = parabola_cone_homotopy()
    batch = track_batch(H, starts)
    single = [track_path(H, s) for s in starts]
    for b, s in zip(batch, single):
        assert b.status == s.status
        assert b.endpoint.distance(s.endpoint) < 1e-10
    rev = track_batch(H, starts[::-1])
    assert match_multisets([r.endpoint for r in rev], [r.endpoint for r in batch], 1e-10)
    assert rev[0].endpoint.distance(batch[-1].endpoint) < 1e-10


def test_residual_small_after_every_accepted_step():
    H, starts, _ = parabola_cone_homotopy(gamma=np.exp(1.1j))
    s = TrackerSettings()
    worst = []

    def check(rows, X, t):
        val, _, _ = H.evaluate(X, t)
        worst.append(np.linalg.norm(val, axis=1).max())

    results = track_batch(H, starts, s, on_accept=check)
    assert len(worst) > 10
    assert max(worst) <= s.corrector_tol
    assert all(r.final_residual <= s.corrector_tol for r in results if r.status is PathStatus.SUCCESS)


@given(st.integers(0, 2 ** 31))
def test_path_count_conservation(seed):
    rng = np.random.default_rng(seed)
    H, starts, _ = parabola_cone_homotopy(gamma=np.exp(1j * rng.uniform(0, 6.28)), seed=seed)
    n = int(rng.integers(0, 5))
    chosen = [starts[int(k)] for k in rng.integers(0, 4, size=n)]
    # mix in garbage that cannot be polished
    chosen += [rng.normal(size=4) * 5 for _ in range(int(rng.integers(0, 2)))]
    results = track_batch(H, chosen, TrackerSettings(max_steps=200))
    assert len(results) == len(chosen)
    assert [r.index for r in results] == list(range(len(chosen)))
    assert all(isinstance(r.status, PathStatus) for r in results)


def test_min_step_failure_and_max_steps():
    H, starts, _ = parabola_cone_homotopy()
    r = track_path(H, starts[0], TrackerSettings(max_steps=3))
    assert r.status is PathStatus.MAX_STEPS_EXCEEDED
    # a homotopy with a genuine singularity on the path: x^2 - (1 - 2t)^2 style collision at t = 1/2
    R = Ring.from_names([["x"]])
    x = R.var("x")
    H2 = Homotopy(R, [x ** 2 - 1], [x ** 2 + 1], 1.0)  # roots collide at 0 for t = 1/2, real gamma
    r2 = track_path(H2, np.array([1.0 + 0j]))
    assert r2.status is PathStatus.MIN_STEP_FAILURE


def test_singular_endpoint_is_reported_unrefined():
    R = Ring.from_names([["x"]])
    x = R.var("x")
    H = Homotopy(R, [x ** 2 - 1], [x ** 2], np.exp(0.5j))
    r = track_path(H, np.array([1.0 + 0j]), TrackerSettings(min_step=1e-12, initial_step=1e-2))
    assert r.status in (PathStatus.SINGULAR, PathStatus.MIN_STEP_FAILURE)
    assert r.status is not PathStatus.SUCCESS


def test_settings_invariants():
    with pytest.raises(ValueError):
        TrackerSettings(min_step=0.1, initial_step=0.01)
    with pytest.raises(ValueError):
        TrackerSettings(max_corrector_iters=0)
    m = TrackerSettings.for_mle()
    assert m.min_step == 1e-14 and m.max_corrector_iters == 2 and m.infinity_threshold == 1e-6


# --- classify_endpoint ------------------------------------------------------------------


def test_classify_cone_conventions():
    rule = [FiniteRule(0, 0, True)]
    p = MultiProjPoint.single([0, 1, -1, -1]).normalize()
    assert classify_endpoint(p, rule).finite
    vertex = MultiProjPoint.single([1, 0, 0, 0]).normalize()
    v = classify_endpoint(vertex, rule)
    assert not v.finite and v.infinite_factors == (0,)


def test_classify_homogenizing_coordinates_large_is_finite():
    groups = ((0, 1), (2, 3), (4, 5))
    rules = [FiniteRule(g, grp[-1], False) for g, grp in enumerate(groups)]
    p = MultiProjPoint(np.array([1, 0.5, 2, 1e-3, 1, 3], dtype=complex), groups).normalize()
    assert classify_endpoint(p, rules, 1e-6).finite
    q = MultiProjPoint(np.array([1, 0.5, 2, 1e-3, 1, 1e-9], dtype=complex), groups).normalize()
    assert classify_endpoint(q, rules, 1e-6).infinite_factors == (2,)


# --- dedup / normalization --------------------------------------------------------------


def test_dedup_cases():
    p = MultiProjPoint.single([1, 2j, 3])
    reps, sizes = dedup_endpoints([p, p.normalize()])
    assert len(reps) == 1 and sizes == [2]
    pts = expected_cone_points()
    assert len(dedup_endpoints(pts)[0]) == 4


def test_dedup_perturbation_clusters():
    rng = np.random.default_rng(8)
    base = [MultiProjPoint.single(rng.normal(size=4) + 1j * rng.normal(size=4)).normalize() for _ in range(10)]
    noisy = []
    for p in base:
        for _ in range(3):
            noisy.append(MultiProjPoint.single(p.coords + 1e-9 * rng.normal(size=4)))
    reps, sizes = dedup_endpoints(noisy, 1e-6)
    assert len(reps) == 10 and sorted(sizes) == [3] * 10


complex_coord = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@given(st.lists(complex_coord, min_size=2, max_size=6).filter(lambda v: max(abs(z) for z in v) > 1e-3),
       st.lists(complex_coord, min_size=1, max_size=4).filter(lambda v: max(abs(z) for z in v) > 1e-3))
def test_normalize_idempotent_bitwise(a, b):
    coords = np.array(a + b, dtype=complex)
    groups = (tuple(range(len(a))), tuple(range(len(a), len(a) + len(b))))
    p = MultiProjPoint(coords, groups).normalize()
    assert p.normalize().bitwise_equal(p)
    for g in range(2):
        f = p.factor(g)
        assert abs(np.linalg.norm(f) - 1) < 1e-14
        k = int(np.argmax(np.abs(f) >= np.abs(f).max() * (1 - 1e-12)))
        assert f[k].imag == 0 and f[k].real > 0


@given(st.integers(0, 2 ** 31), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False,
                                                    allow_infinity=False))
def test_normalize_forgets_scaling(seed, lam):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    p = MultiProjPoint.single(x).normalize()
    q = MultiProjPoint.single(lam * x).normalize()
    assert np.allclose(p.coords, q.coords, atol=1e-12)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 2 ** 16))
def test_factored_start_rows_match_expansion(counts, seed):
    R = Ring.from_names([["a0", "a1", "a2"], ["b0", "b1"]])
    rng = np.random.default_rng(seed)
    mats, polys = [], []
    for k in counts:
        A = np.zeros((k, 5), dtype=complex)
        p = MPoly.constant(R, 1.0)
        for i in range(k):
            g = R.groups[int(rng.integers(2))]
            A[i, list(g)] = rng.normal(size=len(g)) + 1j * rng.normal(size=len(g))
            p = p * MPoly.linear(R, A[i, list(g)], g)
        mats.append(A)
        polys.append(p)
    target = [p + MPoly.constant(R, 0.0) for p in polys]
    X = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    a0 = mats[0][0]
    X[0] -= (a0 @ X[0]) / (a0 @ a0.conj()) * a0.conj()  # a vanishing factor must not break the derivative
    assert abs(a0 @ X[0]) < 1e-12
    t = np.array([0.2, 0.5, 0.9])
    plain = Homotopy(R, polys, target, 0.6 + 0.8j)
    fact = Homotopy(R, polys, target, 0.6 + 0.8j, start_factors=mats)
    for a, b in zip(plain.evaluate(X, t), fact.evaluate(X, t)):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
