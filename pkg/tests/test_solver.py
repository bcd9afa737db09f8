import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from stochfix import build, iterate, ks_rate_bound, lp_distance, moment_residual, solve, wasserstein_1d
from stochfix.core import EquationSystem, finite_law_sampler
from stochfix.errors import DomainError, NumericalError
from stochfix.models import quicksort_toll
from stochfix.solver import SamplePool, initial_pools, recenter, sliced_distance
from stochfix.streams import stream

from conftest import constant_system, identity_system
import oracles

small_ints = st.lists(st.integers(-20, 20), min_size=1, max_size=6)


def brute_force_lp(a, b, p):
    """Optimal coupling by enumeration of all permutations (n <= 6)."""
    n = len(a)
    best = min(sum(abs(a[i] - b[s[i]]) ** p for i in range(n)) for s in itertools.permutations(range(n)))
    return best / n if p == 1 else (best / n) ** (1.0 / p)


def test_wasserstein_matches_brute_force_exactly():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        a = rng.integers(-50, 50, n).astype(float)
        b = rng.integers(-50, 50, n).astype(float)
        for p in (1, 2):
            assert wasserstein_1d(a, b, p) == brute_force_lp(list(a), list(b), p)


def test_wasserstein_matches_brute_force_on_reals():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        a, b = rng.normal(size=n), rng.normal(size=n)
        p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        assert wasserstein_1d(a, b, p) == pytest.approx(brute_force_lp(list(a), list(b), p), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("a, b, p, expected", [
    ([0, 1], [0, 1], 1, 0.0), ([0], [1], 1, 1.0), ([0, 2], [1, 3], 1, 1.0),
])
def test_wasserstein_examples(a, b, p, expected):
    assert wasserstein_1d(a, b, p) == expected


def test_wasserstein_errors():
    with pytest.raises(DomainError):
        wasserstein_1d([0, 1], [0], 1)
    with pytest.raises(DomainError):
        wasserstein_1d([0], [1], 0.5)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(*[st.lists(st.integers(-20, 20), min_size=n, max_size=n)] * 3)),
       st.sampled_from([1.0, 2.0]))
def test_wasserstein_metric_axioms(abc, p):
    a, b, c = (np.array(x, dtype=float) for x in abc)
    ab = wasserstein_1d(a, b, p)
    assert ab == wasserstein_1d(b, a, p) >= 0
    assert wasserstein_1d(a, a, p) == 0
    assert (ab == 0) == (sorted(a) == sorted(b))
    assert ab <= wasserstein_1d(a, c, p) + wasserstein_1d(c, b, p) + 1e-12


@settings(max_examples=50)
@given(small_ints, small_ints)
def test_lp_distance_matches_scipy(a, b):
    assert lp_distance(a, b, 1) == pytest.approx(stats.wasserstein_distance(a, b), abs=1e-12)


def test_lp_distance_agrees_with_equal_size_formula():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=50), rng.normal(size=50)
    assert lp_distance(a, b, 2) == wasserstein_1d(a, b, 2)
    # duplicating a sample does not change its law
    assert lp_distance(np.repeat(a, 2), b, 2) == pytest.approx(wasserstein_1d(a, b, 2), rel=1e-12)


def test_sliced_distance_examples():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(500, 2))
    assert sliced_distance(a, a) == 0
    assert sliced_distance(a, a[rng.permutation(500)]) == 0
    v = np.array([0.6, -0.8]) * 2.0
    got = sliced_distance(a, a + v, directions=4096, p=1, rng=np.random.default_rng(3))
    assert got == pytest.approx(oracles.SLICED_SHIFT_FACTOR * 2.0, rel=0.02)
    b = rng.normal(size=(500, 2))
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    assert sliced_distance(a, b, rng=r1) == sliced_distance(b, a, rng=r2) > 0
    with pytest.raises(DomainError):
        sliced_distance(a[:, :1], b[:, :1])


def test_ks_rate_bound_examples():
    assert ks_rate_bound(0.01, 1.0, 1) == pytest.approx(0.141421, abs=1e-6)
    assert ks_rate_bound(0.01, 0.5, 2) == pytest.approx(0.0421, abs=1e-4)
    vals = [ks_rate_bound(x, 1.0, 2) for x in (1e-1, 1e-2, 1e-4, 1e-8)]
    assert all(x > y for x, y in zip(vals, vals[1:])) and vals[-1] < 1e-4
    for bad in ((0.0, 1.0, 1), (0.1, -1.0, 1), (0.1, 1.0, 0.5)):
        with pytest.raises(DomainError):
            ks_rate_bound(*bad)


def test_sample_pool_validation():
    with pytest.raises(DomainError):
        SamplePool(np.array([0.0, np.nan]))
    with pytest.raises(DomainError):
        SamplePool(np.zeros((0, 1)))
    p = SamplePool(np.arange(4.0))
    assert p.values.shape == (4, 1) and not p.values.flags.writeable


def test_identity_map_resamples():
    pool = SamplePool(stream(0).normal(size=20_000))
    (out,) = iterate(identity_system(), [pool], seed=3)
    assert out.generation == 1
    assert np.all(np.isin(out.values, pool.values))
    se = pool.values.std() / np.sqrt(pool.N)
    assert abs(out.mean()[0] - pool.mean()[0]) < 4 * se * np.sqrt(2)
    assert out.values.var() == pytest.approx(pool.values.var(), rel=4 * np.sqrt(2 / pool.N) * 1.5)


def test_constant_map_hits_constant():
    pool = SamplePool(stream(0).normal(size=5000))
    (out,) = iterate(constant_system(2.5), [pool])
    assert np.all(out.values == 2.5)


def test_quicksort_first_iterate_is_toll_law():
    system = build({"model": "quicksort"})
    pools = initial_pools(system, 100_000)
    (out,) = iterate(system, pools, seed=1)
    x = out.values[:, 0]
    assert abs(x.mean()) < 4 * x.std() / np.sqrt(x.size)
    ref = quicksort_toll(stream(99).random(100_000))
    assert stats.ks_2samp(x, ref).pvalue > 1e-3


def test_identity_distances_are_resampling_noise():
    system = identity_system()
    pools, diag = solve(system, 20_000, max_iters=8, min_iters=0, init="gaussian", seed=4)
    ratio = np.array(diag.distances)[:, 0] / np.array(diag.noise_floors)[:, 0]
    assert 0.5 < np.median(ratio) < 2.0


def test_misaligned_pools():
    system = build({"model": "urn_det", "a": 4, "b": 1, "c": 1, "d": 4})
    p1 = SamplePool(np.zeros(100))
    with pytest.raises(DomainError):
        iterate(system, [p1])
    with pytest.raises(DomainError):
        iterate(system, [p1, SamplePool(np.zeros(50))])
    with pytest.raises(DomainError):
        iterate(system, [p1, SamplePool(np.zeros((100, 2)))])


def test_persistent_overflow_raises():
    sampler = finite_law_sampler([1.0], [[[[1e300]]]], [[0.0]])
    system = EquationSystem(1, 1, ((0,),), (sampler,))
    with pytest.raises(NumericalError):
        iterate(system, [SamplePool(np.full(100, 1e300))])


def test_occasional_overflow_is_resampled():
    # atom 2 overflows; the retry draws fresh coefficients
    sampler = finite_law_sampler([0.999, 0.001], [[[[0.5]]], [[[1e300]]]], [[0.0], [0.0]])
    system = EquationSystem(1, 1, ((0,),), (sampler,))
    pool = SamplePool(np.full(20_000, 1e10))
    (out,) = iterate(system, [pool])
    assert np.all(np.isfinite(out.values)) and out.n_resampled > 0


def test_solve_rejects_small_pools():
    with pytest.raises(DomainError):
        solve(build({"model": "quicksort"}), 500)


def test_solve_is_thread_count_invariant():
    system = build({"model": "split2d", "b": 2, "law": "bst"})
    runs = [solve(system, 20_000, max_iters=4, min_iters=4, seed=5, threads=t) for t in (1, 4, 8)]
    ref = runs[0][0][0].values.tobytes()
    assert all(r[0][0].values.tobytes() == ref for r in runs)
    assert all(r[1].distances[-1].tobytes() == runs[0][1].distances[-1].tobytes() for r in runs)


def test_solve_seed_changes_result():
    system = build({"model": "quicksort"})
    a = solve(system, 5000, max_iters=3, min_iters=3, seed=1)[0][0].values
    b = solve(system, 5000, max_iters=3, min_iters=3, seed=2)[0][0].values
    assert not np.array_equal(a, b)


def test_quicksort_diagnostics(quicksort_solution):
    pools, diag, _ = quicksort_solution
    assert diag.converged and "noise floor" in diag.stop_rule
    assert all(np.all(d >= 0) for d in diag.distances)
    for c in diag.covariances:
        assert np.all(np.linalg.eigvalsh(c[0]) >= -1e-12)
    assert pools[0].generation == diag.iterations
    last = np.array(diag.distances[-3:])[:, 0] < 2 * np.array(diag.noise_floors[-3:])[:, 0]
    assert last.all()


def test_quicksort_second_moment_residual(quicksort_pool):
    system = build({"model": "quicksort"})
    res = moment_residual(system, [quicksort_pool], 2)
    assert res.z.max() <= 3
    x = quicksort_pool.values[:, 0]
    m2 = np.mean(x ** 2)
    assert abs(m2 - oracles.QUICKSORT_VAR) <= 3 * np.std(x ** 2) / np.sqrt(x.size)


def test_rrt_variance():
    pools, diag = solve(build({"model": "rrt"}), 200_000, seed=0)
    assert diag.converged
    assert pools[0].values.var() == pytest.approx(oracles.RRT_VAR, rel=0.02)


def test_constant_system_residual_is_zero():
    system = constant_system(1.5)
    pools, _ = solve(system, 2000, max_iters=3, min_iters=0)
    res = moment_residual(system, pools, 1, n_draws=1000)
    assert res.residual[0, 0] == 0.0 and res.z[0, 0] == 0.0


def test_urn_det_first_moments_vanish():
    system = build({"model": "urn_det", "a": 4, "b": 1, "c": 1, "d": 4})
    pools, diag = solve(system, 50_000, seed=2)
    assert diag.converged
    res = moment_residual(system, pools, 1, seed=2)
    assert np.all(res.z <= 4)
    np.testing.assert_allclose([p.mean()[0] for p in pools], 0.0, atol=1e-12)


def test_recenter_moves_means_to_target():
    pools = [SamplePool(np.arange(10.0)), SamplePool(np.arange(10.0) * 2)]
    out = recenter(pools, np.array([[1.0], [-1.0]]))
    assert out[0].mean()[0] == pytest.approx(1.0) and out[1].mean()[0] == pytest.approx(-1.0)
    assert out[0].values.var() == pytest.approx(pools[0].values.var())
