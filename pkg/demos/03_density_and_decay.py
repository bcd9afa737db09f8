"""Density recovery and characteristic-function decay.

A uniform law has |phi(t)| ~ 1/t, so the fitted decay exponent is close to 1.
The Quicksort limit has a smooth density and |phi| decays faster than any
power: the fitted exponent grows as the fitting window moves out.
"""
import numpy as np

from stochfix import build, decay_fit, decay_grid, invert_pool, kde, l1_distance, solve
from stochfix.density import decay_profile
from stochfix.streams import stream

u = stream(1).uniform(-1, 1, 100_000)
fit = decay_fit(decay_grid(u))
print(f"uniform(-1, 1): beta_hat = {fit.beta_hat:.3f} on t in [{fit.window[0]:.1f}, {fit.window[1]:.1f}]")

g = stream(2).normal(size=100_000)
grid = invert_pool(g)
x = grid.axes[0]
inner = np.abs(x) < 4
err = np.abs(grid.values[inner] - np.exp(-x[inner] ** 2 / 2) / np.sqrt(2 * np.pi)).max()
print(f"gaussian pool: inverted density sup error {err:.4f}, "
      f"imaginary residue {grid.diagnostics['imag_relative']:.1e}")

pool = solve(build({"model": "quicksort"}), 200_000, seed=0)[0][0]
cf = decay_grid(pool)
fit = decay_fit(cf)
print(f"\nquicksort: beta_hat = {fit.beta_hat:.3f}, superpolynomial: {fit.superpolynomial}")
for f in decay_profile(cf, fit.window[0]):
    print(f"  window from t = {f.window[0]:6.2f}: beta_hat = {f.beta_hat:.2f}")

inv, ker = invert_pool(pool), kde(pool)
print(f"inversion vs KDE: L1 gap {l1_distance(inv, ker):.4f}, "
      f"bandwidth {ker.params['bandwidth'][0]:.4f}")
