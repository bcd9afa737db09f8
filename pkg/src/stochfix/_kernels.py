"""Compiled inner loops.  All kernels release the GIL and write into
caller-owned output slices, so Python threads can run disjoint chunks."""
from __future__ import annotations

import numpy as np
from numba import njit

SQRT2PI = np.sqrt(2.0 * np.pi)


@njit(nogil=True, cache=True)
def ecf1d_chunk(x, t0, dt, out):
    """out[k] = sum_i exp(i (t0 + k dt) x_i) (unnormalized)."""
    n = out.shape[0]
    for k in range(n):
        out[k] = 0.0
    for i in range(x.shape[0]):
        z = np.exp(1j * t0 * x[i])
        step = np.exp(1j * dt * x[i])
        for k in range(n):
            out[k] += z
            z *= step


@njit(nogil=True, cache=True)
def ecf2d_rows(x, t1, t2_0, dt2, out):
    """out[a, k] = sum_i exp(i (t1[a] x_i1 + (t2_0 + k dt2) x_i2))."""
    na, nk = out.shape
    for a in range(na):
        for k in range(nk):
            out[a, k] = 0.0
    for i in range(x.shape[0]):
        step = np.exp(1j * dt2 * x[i, 1])
        base = np.exp(1j * t2_0 * x[i, 1])
        for a in range(na):
            z = base * np.exp(1j * t1[a] * x[i, 0])
            for k in range(nk):
                out[a, k] += z
                z *= step


@njit(nogil=True, cache=True)
def ecf_points(x, t, out):
    """out[p] = sum_i exp(i <t_p, x_i>) for arbitrary frequency points."""
    for p in range(t.shape[0]):
        acc = 0.0 + 0.0j
        for i in range(x.shape[0]):
            s = 0.0
            for c in range(x.shape[1]):
                s += t[p, c] * x[i, c]
            acc += np.exp(1j * s)
        out[p] = acc


@njit(nogil=True, cache=True)
def kde1d(x, x0, dx, h, out):
    """Gaussian kernel sums on the grid x0 + j dx, truncated at 8h."""
    ng = out.shape[0]
    for j in range(ng):
        out[j] = 0.0
    reach = 8.0 * h
    for i in range(x.shape[0]):
        lo = int(np.ceil((x[i] - reach - x0) / dx))
        hi = int(np.floor((x[i] + reach - x0) / dx))
        if lo < 0:
            lo = 0
        if hi > ng - 1:
            hi = ng - 1
        for j in range(lo, hi + 1):
            u = (x0 + j * dx - x[i]) / h
            out[j] += np.exp(-0.5 * u * u)
    norm = 1.0 / (x.shape[0] * h * SQRT2PI)
    for j in range(ng):
        out[j] *= norm


@njit(nogil=True, cache=True)
def kde2d(x, x0, dx, y0, dy, h1, h2, out):
    n1, n2 = out.shape
    for a in range(n1):
        for b in range(n2):
            out[a, b] = 0.0
    r1, r2 = 8.0 * h1, 8.0 * h2
    w2 = np.empty(n2)
    for i in range(x.shape[0]):
        lo1 = max(int(np.ceil((x[i, 0] - r1 - x0) / dx)), 0)
        hi1 = min(int(np.floor((x[i, 0] + r1 - x0) / dx)), n1 - 1)
        lo2 = max(int(np.ceil((x[i, 1] - r2 - y0) / dy)), 0)
        hi2 = min(int(np.floor((x[i, 1] + r2 - y0) / dy)), n2 - 1)
        for b in range(lo2, hi2 + 1):
            v = (y0 + b * dy - x[i, 1]) / h2
            w2[b] = np.exp(-0.5 * v * v)
        for a in range(lo1, hi1 + 1):
            u = (x0 + a * dx - x[i, 0]) / h1
            w1 = np.exp(-0.5 * u * u)
            for b in range(lo2, hi2 + 1):
                out[a, b] += w1 * w2[b]
    norm = 1.0 / (x.shape[0] * h1 * h2 * 2.0 * np.pi)
    for a in range(n1):
        for b in range(n2):
            out[a, b] *= norm
