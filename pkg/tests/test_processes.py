import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from stochfix import run, scaled_batch
from stochfix.errors import ConfigError, DomainError
from stochfix.processes import (
    describe_process, path_length, polya_mean, quicksort_mean, rrt_pathlen_mean, simulate_raw,
    wiener_index,
)

import oracles

URN = {"replacement": [[4, 1], [1, 4]], "init": [1, 0]}


def test_tiny_quicksort():
    assert run("quicksort_cmp", 1).statistic.tolist() == [0]
    assert run("quicksort_cmp", 2, seed=5).statistic.tolist() == [1]
    assert run("quicksort_cmp_xch", 1).statistic.tolist() == [0, 0]


def test_quicksort_three_mean():
    x = simulate_raw("quicksort_cmp", 3, 20_000, seed=1)[:, 0]
    assert set(np.unique(x)) == {2, 3}
    assert abs(x.mean() - 8 / 3) <= 3 * x.std() / np.sqrt(x.size)


def test_exact_means_match_recurrence():
    for n in (1, 2, 3, 10, 57):
        assert quicksort_mean(n) == pytest.approx(oracles.quicksort_mean(n), rel=1e-12, abs=1e-12)
    # recursive tree: node i attaches to a uniform earlier node, E depth_i = H_i
    assert rrt_pathlen_mean(1) == 0 and rrt_pathlen_mean(2) == 1
    assert rrt_pathlen_mean(3) == pytest.approx(2.5)


def test_exact_mean_agrees_with_simulation():
    for model, mean in (("quicksort_cmp", quicksort_mean(200)), ("rrt_pathlen", rrt_pathlen_mean(200))):
        x = simulate_raw(model, 200, 4000, seed=2)[:, 0]
        assert abs(x.mean() - mean) <= 4 * x.std() / np.sqrt(x.size), model


def test_recursive_tree_small_cases():
    for i in range(5):
        r = run("rrt_pathlen", 2, run_index=i)
        assert r.statistic.tolist() == [1] and r.scaled[0] == 0
    for i in range(20):
        r = run("rrt_pathlen", 3, run_index=i)
        assert r.scaled[0] == pytest.approx(-1 / 6 if r.statistic[0] == 2 else 1 / 6, abs=1e-15)


def test_urn_one_step_and_balance():
    assert run("polya", 1, params=URN).statistic.tolist() == [5, 1]
    x = simulate_raw("polya", 300, 500, seed=3, params=URN)
    assert np.all(x.sum(axis=1) == 1 + 300 * 5) and np.all(x >= 0)
    rnd = simulate_raw("polya", 300, 500, seed=3, params={"p1": 0.7, "p2": 0.6, "init": [2, 3]})
    assert np.all(rnd.sum(axis=1) == 5 + 300)


def test_urn_mean_agrees_with_simulation():
    n = 200
    x = simulate_raw("polya", n, 4000, seed=4, params=URN)[:, 0]
    m = polya_mean([[4, 1], [1, 4]], [1, 0], n)
    assert m.sum() == pytest.approx(1 + 5 * n)
    assert abs(x.mean() - m[0]) <= 4 * x.std() / np.sqrt(x.size)


def test_urn_scaling_exponent():
    assert describe_process("polya", URN).exponents[0] == pytest.approx(0.6)
    assert describe_process("polya", {"p1": 0.7, "p2": 0.6}).exponents[0] == pytest.approx(0.3)


def test_untenable_urn():
    with pytest.raises(ConfigError):
        run("polya", 5, params={"replacement": [[-2, 3], [3, -2]], "init": [1, 0]})


@pytest.mark.parametrize("model, params", [
    ("polya", {"replacement": [[1, 1], [2, 1]]}),
    ("polya", {"replacement": [[1.5, 1], [1, 1.5]]}),
    ("polya", {"p1": 1.2, "p2": 0.5}),
    ("polya", {}),
    ("split_pathlen", {"s": 2, "s0": 3}),
    ("split_pathlen", {"b": 2, "s": 1, "s0": 1, "s1": 1}),
    ("heapsort", {}),
])
def test_invalid_process_configs(model, params):
    with pytest.raises(ConfigError):
        run(model, 10, params=params)


def test_domain_errors():
    with pytest.raises(DomainError):
        run("quicksort_cmp", 0)
    with pytest.raises(DomainError):
        scaled_batch("quicksort_cmp", 10, 999)
    with pytest.raises(DomainError):
        scaled_batch("split_pathlen", 10, 1000, centering="exact")


def test_explicit_tree_statistics():
    path3 = [-1, 0, 1]
    assert wiener_index(path3) == 4 and path_length(path3) == 3
    cherry = [-1, 0, 0]
    assert wiener_index(cherry) == 4 and path_length(cherry) == 2
    # two items in the root node and one below it
    assert wiener_index([-1, 0], counts=[2, 1]) == 2 and path_length([-1, 0], counts=[2, 1]) == 1
    with pytest.raises(DomainError):
        wiener_index([-1, -1])
    with pytest.raises(DomainError):
        path_length([1, 0, -1, 2][:2] + [-1])


def test_wiener_index_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 15))
        parent = [-1] + [int(rng.integers(0, i)) for i in range(1, n)]
        adj = np.full((n, n), np.inf)
        np.fill_diagonal(adj, 0)
        for u, p in enumerate(parent):
            if p >= 0:
                adj[u, p] = adj[p, u] = 1
        for k in range(n):
            adj = np.minimum(adj, adj[:, k:k + 1] + adj[k:k + 1, :])
        assert wiener_index(parent) == adj.sum() / 2


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 60), st.integers(1, 3), st.integers(0, 2**31))
def test_split_tree_path_length_range(n, s, seed):
    params = {"b": 2, "s": s, "s0": 1, "s1": 0}
    w, psi = run("split_pathlen_wiener", n, seed=seed, params=params).statistic
    assert 0 <= psi <= n * (n - 1) // 2
    assert 0 <= w <= n ** 3
    assert run("split_pathlen", n, seed=seed, params=params).statistic[0] == psi


def test_bst_path_length_is_quicksort_law():
    a = simulate_raw("split_pathlen", 100, 5000, seed=5)[:, 0]
    b = simulate_raw("quicksort_cmp", 100, 5000, seed=6)[:, 0]
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_batches_are_thread_invariant():
    for model, params in (("quicksort_cmp_xch", None), ("split_pathlen_wiener", None), ("polya", URN)):
        ref = simulate_raw(model, 300, 1200, seed=7, params=params, threads=1)
        for t in (2, 4):
            np.testing.assert_array_equal(simulate_raw(model, 300, 1200, seed=7, params=params, threads=t), ref)


def test_scaled_batch_quicksort():
    batch = scaled_batch("quicksort_cmp", 2000, 3000, seed=8)
    assert batch.centering == "exact"
    x = batch.scaled[:, 0]
    assert abs(x.mean()) <= 4 * x.std() / np.sqrt(x.size)
    assert x.var() == pytest.approx(oracles.QUICKSORT_VAR, rel=0.1)
    other = scaled_batch("quicksort_cmp", 2000, 3000, seed=8, centering="batch")
    assert other.scaled[:, 0].mean() == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_array_equal(other.raw, batch.raw)


def test_scaled_batch_wiener_exponents():
    batch = scaled_batch("split_pathlen_wiener", 200, 1000, seed=9)
    assert batch.exponents == (2.0, 1.0) and batch.labels == ("wiener", "pathlen")
    assert batch.centering == "batch"
    np.testing.assert_allclose(batch.scaled[:, 1], (batch.raw[:, 1] - batch.raw[:, 1].mean()) / 200)


def test_quicksort_batch_variance_at_scale():
    x = scaled_batch("quicksort_cmp", 10_000, 10_000, seed=0).scaled[:, 0]
    assert x.var() == pytest.approx(oracles.QUICKSORT_VAR, rel=0.1)
