"""Solve the Quicksort fixed-point equation and look at the limit law.

X = U X' + (1 - U) X'' + g(U) with g(u) = 2u ln u + 2(1-u) ln(1-u) + 1.
The pool iteration starts from a point mass, resamples the two copies
independently and stops once successive pools differ by no more than
resampling noise.
"""
import time

import numpy as np

from stochfix import build, invert_pool, moment_residual, solve

system = build({"model": "quicksort"})
t0 = time.perf_counter()
pools, diag = solve(system, 200_000, seed=0)
x = pools[0].values[:, 0]
print(f"{diag.iterations} iterations in {time.perf_counter() - t0:.1f} s ({diag.stop_rule})")

print("iteration  l2 distance  noise floor")
for k, (dist, floor) in enumerate(zip(diag.distances, diag.noise_floors), 1):
    if k <= 5 or k % 5 == 0 or k == diag.iterations:
        print(f"{k:9d}  {dist[0]:11.5f}  {floor[0]:11.5f}")

exact_var = 7 - 2 * np.pi ** 2 / 3
print(f"\nmean {x.mean():+.5f}   variance {x.var():.5f} (exact {exact_var:.5f})")
print(f"skewness {((x - x.mean()) ** 3).mean() / x.std() ** 3:.4f}")
for order in (1, 2):
    res = moment_residual(system, pools, order)
    print(f"order-{order} moment residual {res.residual.ravel()[0]:+.2e} ({res.z.max():.2f} standard errors)")

grid = invert_pool(pools[0])
print(f"\ndensity: mode at {grid.argmax()[0]:.3f}, peak {grid.max():.4f}, integral {grid.integral():.4f}")
for q in (-2, -1, 0, 1, 2, 3):
    print(f"  f({q:+d}) = {float(grid.at(q)):.4f}")
