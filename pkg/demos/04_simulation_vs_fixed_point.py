"""Scaled statistics of the discrete processes against the solved limit laws.

Quicksort comparisons and the path length of random recursive trees,
centered at their exact means and divided by n, converge to the fixed
points of the Quicksort and recursive-tree equations.  The Kolmogorov
distance is compared with the bound implied by the measured l1 distance and
the density maximum.
"""
from scipy import stats

from stochfix import build, kde, ks_rate_bound, lp_distance, scaled_batch, solve

for process, model, n in (("quicksort_cmp", "quicksort", 10_000), ("rrt_pathlen", "rrt", 10_000)):
    pool = solve(build({"model": model}), 200_000, seed=0)[0][0].values[:, 0]
    batch = scaled_batch(process, n, 10_000, seed=0)
    y = batch.scaled[:, 0]
    ks = stats.ks_2samp(pool, y).statistic
    l1 = lp_distance(pool, y, 1)
    f_sup = kde(pool).max()
    print(f"{process} (n = {n}, {y.size} runs, {batch.centering} centering)")
    print(f"  variance: simulated {y.var():.4f}, fixed point {pool.var():.4f}")
    print(f"  KS {ks:.4f}, l1 {l1:.4f}, bound from l1 and max density {ks_rate_bound(l1, f_sup, 1):.4f}")
